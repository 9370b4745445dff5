#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "matmi/wave.hpp"

namespace matmi {

using cplx = std::complex<double>;

// omega_j = (j + 1) * d_omega, j = 0 .. count-1.
struct FrequencyGrid {
  double d_omega = 0.0;
  int count = 0;

  double omega(int j) const { return (j + 1) * d_omega; }
  double omega_max() const { return count * d_omega; }
};

// Defaults: omega_max = 0.8 * pi / dt (Nyquist with safety factor),
// d_omega = min(pi c0 / D, 2 pi / (T + D / c0)) with D the sensor diameter.
FrequencyGrid make_frequency_grid(const BoundaryRecord& record, double omega_max = 0.0, double d_omega = 0.0);
double sensor_diameter(const std::vector<Sensor>& sensors);

// ghat(omega) = sum_n g(t_n) w(t_n) exp(i omega t_n) dt (trapezoid weights,
// cosine taper on the last taper_fraction of the record).
Eigen::MatrixXcd to_frequency(const BoundaryRecord& record, const FrequencyGrid& grid,
                              double taper_fraction = 0.2);

// Gamma = -(i/4) H0(omega |x - y| / c0).
cplx fundamental_solution(double omega, const Vec2& x, const Vec2& y, const AcousticMedium& medium);
// d Gamma / d nu_x.
cplx fundamental_solution_dnormal(double omega, const Vec2& x, const Vec2& nu_x, const Vec2& y,
                                  const AcousticMedium& medium);

// Fast H0, H1 (first kind) for bulk evaluation: cubic Hermite table on
// [0.5, 500], library Bessel functions below, asymptotic series above.
class HankelTable {
 public:
  HankelTable();
  cplx h0(double x) const;
  cplx h1(double x) const;

 private:
  double lo_, hi_, step_;
  std::vector<double> j0_, y0_, j1_, y1_;  // values
  std::vector<double> dj0_, dy0_, dj1_, dy1_;  // derivatives
  double hermite(const std::vector<double>& f, const std::vector<double>& df, double x) const;
};

const HankelTable& hankel_table();

// (1/2 I + K*)[ghat] with midpoint quadrature and the curvature limit
// kappa / (4 pi) on the diagonal.
Eigen::VectorXcd half_plus_kstar(const Eigen::VectorXcd& ghat, double omega, const std::vector<Sensor>& sensors,
                                 const AcousticMedium& medium);

struct ImagingIndex {
  std::vector<Vec2> points;
  std::vector<char> excluded;  // points on or outside the sensor polygon
  FrequencyGrid grid;
  Eigen::MatrixXcd values;     // points x frequencies
};

// I(z, omega) = sum_x w_x [conj(Gamma(x, z)) Phi(x) - Gamma(x, z) conj(Phi(x))],
// phi is sensors x frequencies. Evaluated in parallel over z.
ImagingIndex imaging_index(const Eigen::MatrixXcd& phi, const FrequencyGrid& grid, const std::vector<Sensor>& sensors,
                           const std::vector<Vec2>& points, const AcousticMedium& medium, int threads = 0);

// -1 / (pi c0^2)
double inversion_constant(const AcousticMedium& medium);

// f0(z) = (C / (i rho0)) sum_j omega_j I(z, omega_j) d_omega
std::vector<double> reconstruct_source(const ImagingIndex& index, const AcousticMedium& medium);

struct SourceRecoveryOptions {
  double omega_max = 0.0;
  double d_omega = 0.0;
  double taper_fraction = 0.2;
  int threads = 0;
};

struct SourceRecoveryInfo {
  FrequencyGrid grid;
  double constant = 0.0;
  std::size_t excluded_points = 0;
  double max_real_part_ratio = 0.0;  // max |Re I| / max |I|
};

// Whole chain g -> f0 evaluated at the nodes of a mesh; excluded boundary
// nodes are filled from their neighbors.
ScalarField recover_source(const BoundaryRecord& record, const MeshPtr& mesh, const SourceRecoveryOptions& options = {},
                           SourceRecoveryInfo* info = nullptr);

}  // namespace matmi
