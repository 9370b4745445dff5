#include "matmi/forward.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "matmi/errors.hpp"

namespace matmi {

double PhantomSpec::evaluate(const Vec2& p) const {
  double s = sigma0;
  for (const auto& inc : inclusions) {
    const double d = norm(p - inc.center);
    if (d < inc.radius) {
      const double q = 1.0 - (d / inc.radius) * (d / inc.radius);
      s += inc.amplitude * std::pow(q, inc.exponent);
    }
  }
  return s;
}

void PhantomSpec::validate(const Ellipse& domain) const {
  if (!(lower > 0.0) || !(upper > lower)) throw ParameterError("phantom: need 0 < a < b");
  if (sigma0 < lower || sigma0 > upper) throw ParameterError("phantom: sigma0 outside [a, b]");
  if (!(guard_band > 0.0)) throw ParameterError("phantom: guard band must be positive");
  for (std::size_t i = 0; i < inclusions.size(); ++i) {
    const auto& inc = inclusions[i];
    std::ostringstream who;
    who << "phantom: inclusion " << i;
    if (!(inc.radius > 0.0)) throw ParameterError(who.str() + " has nonpositive radius");
    if (!(inc.exponent > 0.0)) throw ParameterError(who.str() + " needs a positive profile exponent");
    if (!domain.contains(inc.center)) throw ParameterError(who.str() + " is centered outside the domain");
    if (domain.distance_to_boundary(inc.center) < inc.radius + guard_band)
      throw ParameterError(who.str() + " overlaps the guard band");
    const double peak = evaluate(inc.center);
    if (peak < lower || peak > upper || sigma0 + inc.amplitude < lower || sigma0 + inc.amplitude > upper)
      throw ParameterError(who.str() + " violates the clamp bounds [a, b]");
  }
}

PhantomSpec default_phantom() {
  PhantomSpec p;
  p.sigma0 = 1.0;
  p.lower = 0.5;
  p.upper = 5.0;
  p.guard_band = 0.15;
  p.inclusions = {{{-0.8, 0.2}, 0.45, 1.0, 2.0}, {{0.7, -0.1}, 0.4, 2.0, 2.0}};
  return p;
}

ScalarField evaluate_phantom(const PhantomSpec& spec, const MeshPtr& mesh, const Ellipse& domain) {
  spec.validate(domain);
  std::vector<double> v(mesh->node_count());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = spec.evaluate(mesh->nodes()[i]);
    if (v[i] < spec.lower || v[i] > spec.upper)
      throw ParameterError("phantom: evaluated conductivity leaves [a, b]");
  }
  return {mesh, ScalarRole::Conductivity, std::move(v)};
}

Vec2 ExcitationSpec::a1(const Vec2& p) const {
  const Mat2& g = a1_gradient;
  return {a1_offset.x + g.xx * p.x + g.xy * p.y, a1_offset.y + g.yx * p.x + g.yy * p.y};
}

void ExcitationSpec::validate() const {
  const Mat2& g = a1_gradient;
  const double scale = std::abs(g.xx) + std::abs(g.xy) + std::abs(g.yx) + std::abs(g.yy);
  if (std::abs(g.xx + g.yy) > 1e-14 * std::max(scale, 1e-300))
    throw ParameterError("excitation: A1 must be divergence-free (trace of its gradient is nonzero)");
  if (pulse.size() < 2) throw ParameterError("excitation: pulse needs at least two samples");
  if (!(t_pulse > 0.0)) throw ParameterError("excitation: T_pulse must be positive");
}

VectorField ExcitationSpec::a1_field(const MeshPtr& mesh) const {
  std::vector<Vec2> v(mesh->triangle_count());
  for (std::size_t t = 0; t < v.size(); ++t) v[t] = a1(mesh->centroid(t));
  return {mesh, VectorRole::VectorPotential, std::move(v)};
}

std::vector<double> smooth_ramp(int samples) {
  std::vector<double> u(samples);
  for (int i = 0; i < samples; ++i) {
    const double s = static_cast<double>(i) / (samples - 1);
    u[i] = s - std::sin(2.0 * std::numbers::pi * s) / (2.0 * std::numbers::pi);
  }
  return u;
}

ExcitationSpec standard_excitation(double scale) {
  ExcitationSpec e;
  e.a1_offset = {scale, scale};
  e.a1_gradient = {0.0, 0.5 * scale, -0.5 * scale, 0.0};
  e.pulse = smooth_ramp(101);
  return e;
}

ExcitationSpec rotational_excitation(double c) {
  ExcitationSpec e;
  e.a1_gradient = {0.0, -c, c, 0.0};
  e.pulse = smooth_ramp(101);
  return e;
}

double AcousticMedium::c0() const { return std::sqrt(lambda0 / rho0); }

void AcousticMedium::validate() const {
  if (!(rho0 > 0.0) || !(lambda0 > 0.0)) throw ParameterError("medium: rho0 and lambda0 must be positive");
}

ScalarField solve_potential(const ScalarField& sigma, const ExcitationSpec& exc, const SolverOptions& options) {
  exc.validate();
  const SparseSystem sys = assemble_elliptic(sigma, exc.a1_field(sigma.mesh), Constraint::ZeroMean);
  return solve_spd(sys, options, ScalarRole::Potential);
}

VectorField current_density(const ScalarField& sigma, const ScalarField& potential, const ExcitationSpec& exc) {
  require_same_mesh(sigma.mesh, potential.mesh, "current_density");
  const VectorField grad = gradient(potential);
  std::vector<Vec2> j(grad.size());
  for (std::size_t t = 0; t < j.size(); ++t)
    j[t] = sigma.at_centroid(t) * (grad[t] + exc.a1(sigma.mesh->centroid(t)));
  return {sigma.mesh, VectorRole::Current, std::move(j)};
}

ScalarField lorentz_source(const VectorField& current, const ExcitationSpec& exc, const AcousticMedium& medium) {
  medium.validate();
  exc.validate();
  const double du = exc.pulse_amplitude();
  if (du == 0.0) throw ParameterError("lorentz_source: degenerate pulse, u(T_pulse) = u(0)");
  ScalarField f = curl_vector(current);
  const double factor = std::abs(exc.b0) * du / medium.rho0;
  for (double& v : f.values) v *= factor;
  f.role = ScalarRole::Source;
  return f;
}

}  // namespace matmi
