#pragma once

#include <vector>

#include "matmi/fem.hpp"
#include "matmi/field.hpp"

namespace matmi {

struct Inclusion {
  Vec2 center;
  double radius = 0.0;
  double amplitude = 0.0;
  double exponent = 2.0;  // profile amplitude * (1 - (d/R)^2)^exponent, d < R
};

struct PhantomSpec {
  double sigma0 = 1.0;
  double lower = 0.5;  // clamp bound a
  double upper = 5.0;  // clamp bound b
  double guard_band = 0.1;
  std::vector<Inclusion> inclusions;

  double evaluate(const Vec2& p) const;
  // Throws ParameterError on bound violations or guard-band overlap.
  void validate(const Ellipse& domain) const;
};

// Two bumps inside the (x/2)^2 + y^2 < 1 ellipse.
PhantomSpec default_phantom();

ScalarField evaluate_phantom(const PhantomSpec& spec, const MeshPtr& mesh, const Ellipse& domain);

struct Mat2 {
  double xx = 0, xy = 0, yx = 0, yy = 0;
};

// A1(x) = offset + G x with trace(G) = 0, so div A1 = 0 and
// B1 = curl A1 = G.yx - G.xy is constant.
struct ExcitationSpec {
  Vec2 a1_offset;
  Mat2 a1_gradient;
  double b0 = 1.0;
  double t_pulse = 1.0;
  std::vector<double> pulse;  // u sampled uniformly on [0, t_pulse]

  Vec2 a1(const Vec2& p) const;
  double b1() const { return a1_gradient.yx - a1_gradient.xy; }
  double pulse_amplitude() const { return pulse.back() - pulse.front(); }
  void validate() const;
  // A1 at triangle centroids (exact cell averages for affine A1).
  VectorField a1_field(const MeshPtr& mesh) const;
};

std::vector<double> smooth_ramp(int samples);
ExcitationSpec standard_excitation(double scale = 1e-2);
// A1 = c (-y, x)
ExcitationSpec rotational_excitation(double c);

struct AcousticMedium {
  double rho0 = 1.0;
  double lambda0 = 1.0;

  double c0() const;
  void validate() const;
};

ScalarField solve_potential(const ScalarField& sigma, const ExcitationSpec& exc,
                            const SolverOptions& options = {});
VectorField current_density(const ScalarField& sigma, const ScalarField& potential,
                            const ExcitationSpec& exc);
ScalarField lorentz_source(const VectorField& current, const ExcitationSpec& exc,
                           const AcousticMedium& medium);

}  // namespace matmi
