#pragma once

#include "matmi/forward.hpp"

namespace matmi {

// Stream function of the current: with J = curl w one has curl J = lap w, so
//   lap w = rho0 f / (|B0| (u(T) - u(0))),  w = 0 on the boundary.
ScalarField recover_stream(const ScalarField& source, const ExcitationSpec& exc, const AcousticMedium& medium,
                           const SolverOptions& options = {});

// J = curl w.
VectorField recover_current(const ScalarField& stream);

}  // namespace matmi
