#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace matmi;
using namespace matmi::test;

namespace {

const SolverOptions kDirect{1e-12, 50000, SolverMethod::Direct};

// Scale |B0| du / rho0 for the standard excitation (du = 1) with B0 = 2, rho0 = 1.25.
ExcitationSpec excitation() {
  ExcitationSpec e = standard_excitation();
  e.b0 = 2.0;
  return e;
}
const AcousticMedium kMedium{1.25, 1.0};
double factor() { return 2.0 * 1.0 / 1.25; }

}  // namespace

TEST(Stream, ZeroSourceGivesZero) {
  const MeshPtr m = disk(0.1);
  EXPECT_EQ(max_abs(recover_stream(ScalarField(m, ScalarRole::Source, 0.0), excitation(), kMedium).values), 0.0);
}

TEST(Stream, ConstantSourceGivesParaboloid) {
  // lap w = 2 s0 c on the unit disk with w = 0 on the boundary: w = -s0 c (1 - r^2) / 2.
  const double s0 = 1.5, c = 0.4;
  std::vector<double> errs;
  for (double h : {0.1, 0.05}) {
    const MeshPtr m = disk(h);
    const ScalarField f(m, ScalarRole::Source, 2.0 * s0 * c * factor());
    const ScalarField w = recover_stream(f, excitation(), kMedium, kDirect);
    errs.push_back(nodal_error(w, [&](const Vec2& p) { return -s0 * c * (1.0 - dot(p, p)) / 2.0; }));
  }
  EXPECT_GE(errs[0] / errs[1], 3.5) << errs[0] << " " << errs[1];
  EXPECT_LE(errs[1], 1e-3);
}

TEST(Stream, ManufacturedBumpIsRecovered) {
  // w = (1 - r^2)^2 has lap w = 16 r^2 - 8.
  std::vector<double> errs;
  for (double h : {0.1, 0.05}) {
    const MeshPtr m = disk(h);
    const ScalarField f = nodal(m, [](const Vec2& p) { return factor() * (16.0 * dot(p, p) - 8.0); }, ScalarRole::Source);
    const ScalarField w = recover_stream(f, excitation(), kMedium, kDirect);
    errs.push_back(nodal_error(w, [](const Vec2& p) { return std::pow(1.0 - dot(p, p), 2); }));
  }
  EXPECT_GE(errs[0] / errs[1], 3.5) << errs[0] << " " << errs[1];
}

TEST(Stream, DegenerateExcitationIsRejected) {
  const MeshPtr m = disk(0.2);
  ExcitationSpec e = excitation();
  e.b0 = 0.0;
  EXPECT_THROW(recover_stream(ScalarField(m, ScalarRole::Source, 1.0), e, kMedium), ParameterError);
  e = excitation();
  e.pulse = {0.3, 0.3};
  EXPECT_THROW(recover_stream(ScalarField(m, ScalarRole::Source, 1.0), e, kMedium), ParameterError);
}

TEST(RecoverCurrent, ZeroStreamGivesZero) {
  const MeshPtr m = disk(0.1);
  const VectorField J = recover_current(ScalarField(m, ScalarRole::Stream, 0.0));
  for (const Vec2& v : J.values) EXPECT_EQ(norm(v), 0.0);
  EXPECT_EQ(J.role, VectorRole::Current);
}

TEST(RecoverCurrent, ParaboloidStream) {
  std::vector<double> errs;
  for (double h : {0.1, 0.05}) {
    const MeshPtr m = disk(h);
    const VectorField J = recover_current(nodal(m, [](const Vec2& p) { return 1.0 - dot(p, p); }, ScalarRole::Stream));
    errs.push_back(centroid_error(J, [](const Vec2& p) { return Vec2{2.0 * p.y, -2.0 * p.x}; }));
  }
  EXPECT_GE(errs[0] / errs[1], 1.7);
  EXPECT_LE(errs[1], 0.05);
}

TEST(RecoverCurrent, HelmholtzRoundTrip) {
  // J = curl (1 - r^2)^2 is divergence-free with zero normal flux.
  auto exact = [](const Vec2& p) {
    const double s = 1.0 - dot(p, p);
    return Vec2{4.0 * p.y * s, -4.0 * p.x * s};
  };
  std::vector<double> errs;
  for (double h : {0.1, 0.05}) {
    const MeshPtr m = disk(h);
    const VectorField J = cellwise(m, exact, VectorRole::Current);
    const ScalarField f = lorentz_source(J, excitation(), kMedium);
    const VectorField back = recover_current(recover_stream(f, excitation(), kMedium, kDirect));
    errs.push_back(centroid_error(back, exact) / l2_norm(J));
  }
  EXPECT_GE(observed_order(errs[0], errs[1]), 0.8) << errs[0] << " " << errs[1];
  EXPECT_LE(errs[1], 0.1);
}
