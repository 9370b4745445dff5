#pragma once

#include <optional>
#include <string>
#include <vector>

#include "matmi/forward.hpp"

namespace matmi {

enum class Algorithm { OptimalControl, FixedPoint, OrthogonalField };

std::string_view to_string(Algorithm a);       // "oc", "fp", "of"
Algorithm algorithm_from_string(std::string_view s);
std::string_view long_name(Algorithm a);       // "optimal-control", ...

// How F = rot(J) enters the viscosity operator eta I + F F^T.
//   None: F as given.  Pointwise: F / |F| (unit direction field).
enum class FieldScaling { None, Pointwise };

// Elliptic ring {sqrt((x/ax)^2 + (y/ay)^2) >= min_radius} where sigma is known.
struct ReferenceRegion {
  Ellipse domain;
  double min_radius = 0.85;
  std::vector<char> node_mask(const Mesh& mesh) const;
};

struct InversionConfig {
  Algorithm algorithm = Algorithm::OrthogonalField;
  double lower = 0.5;
  double upper = 5.0;
  double step = 8e-7;           // mu
  int max_iterations = 50;
  double viscosity = 5e-4;      // eta
  double current_floor = 0.05;  // fraction of max |J|
  double smoothing_width = 2.0; // in units of mesh h; 0 disables
  double tolerance = 1e-6;      // relative update norm; 0 disables
  double initial_sigma = 1.0;
  double sigma0 = 1.0;          // known value on the reference region
  ReferenceRegion region;
  FieldScaling scaling = FieldScaling::Pointwise;
  SolverOptions solver{1e-12, 50000, SolverMethod::Direct};

  void validate() const;
};

struct ReconstructionReport {
  Algorithm algorithm = Algorithm::OrthogonalField;
  std::vector<double> misfit_history;
  std::vector<double> update_history;
  std::optional<double> final_error;
  int iterations = 0;
  double wall_ms = 0.0;
  double scale_factor = 1.0;
  std::size_t unreliable_count = 0;
  std::size_t fallback_count = 0;
  bool converged = false;
  std::vector<std::string> notes;
};

// T[f] = min(max(f, a), b)
ScalarField clamp(const ScalarField& sigma, double lower, double upper);

ScalarField forward_op(const ScalarField& sigma, const ExcitationSpec& exc, const SolverOptions& options = {});

// q solving div(sigma grad q) = -div(h (A1 + grad F[sigma])), zero mean.
ScalarField frechet_derivative(const ScalarField& sigma, const ScalarField& h, const ExcitationSpec& exc,
                               const SolverOptions& options = {});

double misfit(const ScalarField& sigma, const std::vector<VectorField>& currents,
              const std::vector<ExcitationSpec>& excitations, const SolverOptions& options = {});

struct MisfitGradient {
  double value = 0.0;            // misfit at sigma
  std::vector<double> density;   // per-triangle g_T with <dJ, h> = sum area_T g_T h_T
  ScalarField nodal;             // lumped-L2 representative
  double directional(const ScalarField& h) const;
};

// g = sum_i r_i . e_i + grad s_i . e_i, e_i = grad F_i + A1_i,
// r_i = sigma e_i - J_i, and the adjoint s_i solving
// int sigma grad s . grad phi = -int sigma r_i . grad phi (zero mean).
MisfitGradient misfit_gradient(const ScalarField& sigma, const std::vector<VectorField>& currents,
                               const std::vector<ExcitationSpec>& excitations, const SolverOptions& options = {});

// Both sides of  int sigma r . grad(dF[sigma] h) = int h grad s . (A1 + grad F).
struct AdjointSides {
  double lhs = 0.0;
  double rhs = 0.0;
};
AdjointSides adjoint_identity(const ScalarField& sigma, const ScalarField& h, const VectorField& current,
                              const ExcitationSpec& exc, const SolverOptions& options = {});

ScalarField optimal_control_invert(const std::vector<VectorField>& currents,
                                   const std::vector<ExcitationSpec>& excitations, const InversionConfig& cfg,
                                   ReconstructionReport* report = nullptr,
                                   const ScalarField* initial = nullptr);

ScalarField fixed_point_invert(const VectorField& current, const ExcitationSpec& exc, const InversionConfig& cfg,
                               ReconstructionReport* report = nullptr, const ScalarField* initial = nullptr);

// Mass-lumped Gaussian averaging of a nodal field, width in meters.
ScalarField gaussian_smooth(const ScalarField& field, double width);

VectorField orthogonal_field(const VectorField& current);

// div((eta I + F F^T) grad U) = -div((eta I + F F^T) A1), zero mean.
ScalarField viscosity_solve(const VectorField& field, const ExcitationSpec& exc, double eta,
                            FieldScaling scaling = FieldScaling::None, const SolverOptions& options = {});

struct ResistivityResult {
  ScalarField sigma;              // raw nodal conductivity (not clamped)
  std::vector<char> reliable;     // per triangle
  std::size_t unreliable_count = 0;
};

// 1/sigma = |grad U + A1| / |J| where |J| >= floor (absolute); other
// triangles take the nearest reliable value (breadth-first over neighbors).
ResistivityResult resistivity_from_potential(const ScalarField& potential, const ExcitationSpec& exc,
                                             const VectorField& current, double floor);

struct RescaleResult {
  ScalarField sigma;
  double factor = 1.0;
};
RescaleResult rescale(const ScalarField& sigma_raw, const std::vector<char>& region, double sigma0);

ScalarField orthogonal_field_invert(const VectorField& current, const ExcitationSpec& exc, const InversionConfig& cfg,
                                    ReconstructionReport* report = nullptr);

// ||a - b|| / ||b|| with mass-matrix quadrature.
double relative_error(const ScalarField& reconstructed, const ScalarField& truth);

// Pearson correlation of two nodal fields weighted by the lumped mass.
double weighted_correlation(const ScalarField& a, const ScalarField& b);

std::string report_to_json(const ReconstructionReport& report, const InversionConfig& cfg, int indent = 2);

}  // namespace matmi
