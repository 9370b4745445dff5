#include "matmi/current.hpp"

#include <cmath>

#include "matmi/errors.hpp"

namespace matmi {

ScalarField recover_stream(const ScalarField& f, const ExcitationSpec& exc, const AcousticMedium& med,
                           const SolverOptions& options) {
  med.validate();
  if (exc.b0 == 0.0) throw ParameterError("recover_stream: |B0| must be nonzero");
  const double du = exc.pulse_amplitude();
  if (du == 0.0) throw ParameterError("recover_stream: degenerate pulse, u(T_pulse) = u(0)");
  const MeshPtr& mesh = f.mesh;
  const ScalarField one(mesh, ScalarRole::Generic, 1.0);
  const VectorField zero(mesh, VectorRole::Generic, std::vector<Vec2>(mesh->triangle_count()));
  SparseSystem sys = assemble_elliptic(one, zero, Constraint::DirichletZero);
  // int grad w . grad phi = -int g phi
  const double scale = -med.rho0 / (std::abs(exc.b0) * du);
  ScalarField load(mesh, ScalarRole::Generic, f.values);
  for (double& v : load.values) v *= scale;
  add_source_load(sys, load);
  return solve_spd(sys, options, ScalarRole::Stream);
}

VectorField recover_current(const ScalarField& w) {
  VectorField j = curl_scalar(w);
  j.role = VectorRole::Current;
  return j;
}

}  // namespace matmi
