#include <gtest/gtest.h>

#include <limits>
#include <sstream>

#include "helpers.hpp"

using namespace matmi;
using namespace matmi::test;

namespace {

ScalarField bump(const MeshPtr& m, Vec2 c, double R) {
  return nodal(m, [=](const Vec2& p) {
    const double d2 = dot(p - c, p - c) / (R * R);
    return d2 < 1.0 ? (1.0 - d2) * (1.0 - d2) * (1.0 - d2) : 0.0;
  }, ScalarRole::Source);
}

WaveOptions small_options() {
  WaveOptions o;
  o.grid_spacing = 0.02;
  o.sensors = 64;
  o.t_final = 3.0;
  return o;
}

}  // namespace

TEST(Wave, ZeroSourceGivesZeroRecord) {
  const MeshPtr m = disk(0.1);
  const BoundaryRecord r = simulate_wave(ScalarField(m, ScalarRole::Source, 0.0), AcousticMedium{}, {1, 1}, small_options());
  EXPECT_EQ(max_abs(r.samples), 0.0);
  EXPECT_EQ(r.sensors.size(), 64u);
  EXPECT_GT(r.steps, 100u);
}

TEST(Wave, BumpArrivesAtTravelTime) {
  const MeshPtr m = disk(0.02);
  const double R = 0.06, shift = 0.3;
  AcousticMedium med{1.0, 2.25};  // c0 = 1.5
  WaveOptions o = small_options();
  o.grid_spacing = 0.01;
  o.sensors = 64;
  o.t_final = 1.2;
  const BoundaryRecord centered = simulate_wave(bump(m, {0, 0}, R), med, {1, 1}, o);
  const BoundaryRecord shifted = simulate_wave(bump(m, {shift, 0}, R), med, {1, 1}, o);
  auto arrival = [](const BoundaryRecord& r, std::size_t s) {
    const double peak = max_abs(r.samples);
    for (std::size_t n = 0; n < r.steps; ++n)
      if (std::abs(r.at(s, n)) > 1e-2 * peak) return static_cast<double>(n) * r.dt;
    return std::numeric_limits<double>::infinity();
  };
  // Absolute: the front leaves the support at radius R and is sampled by a
  // one-sided stencil reaching 4 dx inside the boundary.
  const double dx = o.grid_spacing, c = med.c0(), dt = centered.dt;
  for (std::size_t s = 0; s < centered.sensors.size(); s += 8) {
    const double t = arrival(centered, s);
    EXPECT_GE(t, (1.0 - R - 4.0 * dx) / c - 2.0 * dt) << "sensor " << s;
    EXPECT_LE(t, (1.0 - 2.0 * dx) / c + 2.0 * dt) << "sensor " << s;
  }
  // Relative: moving the source by `shift` toward sensor 0 (at angle 0) and
  // away from sensor 32 (angle pi) changes the travel time by shift / c0.
  EXPECT_NEAR(arrival(centered, 0) - arrival(shifted, 0), shift / c, 2.0 * dt);
  EXPECT_NEAR(arrival(shifted, 32) - arrival(centered, 32), shift / c, 2.0 * dt);
}

TEST(Wave, DiscreteEnergyIsConserved) {
  const MeshPtr m = standard_ellipse(0.05);
  WaveOptions o = small_options();
  o.t_final = 4.0;
  WaveDiagnostics diag;
  simulate_wave(bump(m, {0.4, 0.2}, 0.3), AcousticMedium{}, standard_domain(), o, &diag);
  ASSERT_GT(diag.energy.size(), 10u);
  const double e0 = diag.energy.front();
  ASSERT_GT(e0, 0.0);
  for (double e : diag.energy) EXPECT_NEAR(e, e0, 0.01 * e0);
}

TEST(Wave, RecordIsLinearInSource) {
  const MeshPtr m = standard_ellipse(0.08);
  const ScalarField f1 = bump(m, {0.5, 0.1}, 0.3), f2 = bump(m, {-0.7, -0.2}, 0.4);
  ScalarField f12 = f1;
  for (std::size_t i = 0; i < f12.size(); ++i) f12[i] += 2.0 * f2[i];
  const WaveOptions o = small_options();
  const BoundaryRecord a = simulate_wave(f1, AcousticMedium{}, standard_domain(), o);
  const BoundaryRecord b = simulate_wave(f2, AcousticMedium{}, standard_domain(), o);
  const BoundaryRecord c = simulate_wave(f12, AcousticMedium{}, standard_domain(), o);
  const double scale = max_abs(c.samples);
  for (std::size_t k = 0; k < c.samples.size(); ++k)
    ASSERT_NEAR(c.samples[k], a.samples[k] + 2.0 * b.samples[k], 1e-12 * scale);
}

TEST(Wave, CflViolationIsRejected) {
  const MeshPtr m = disk(0.1);
  WaveOptions o = small_options();
  o.cfl = 0.9;
  EXPECT_THROW(simulate_wave(bump(m, {0, 0}, 0.3), AcousticMedium{}, {1, 1}, o), ParameterError);
}

TEST(Wave, RecordRoundTripsThroughText) {
  const MeshPtr m = disk(0.1);
  WaveOptions o = small_options();
  o.t_final = 0.5;
  BoundaryRecord r = simulate_wave(bump(m, {0.1, 0}, 0.4), AcousticMedium{1.2, 0.8}, {1, 1}, o);
  std::stringstream ss;
  write_record(ss, r);
  const BoundaryRecord q = read_record(ss);
  ASSERT_EQ(q.samples.size(), r.samples.size());
  EXPECT_EQ(q.samples, r.samples);
  EXPECT_EQ(q.dt, r.dt);
  EXPECT_EQ(q.medium.rho0, 1.2);
  EXPECT_EQ(q.sensors[3].position.x, r.sensors[3].position.x);
  EXPECT_EQ(q.sensors[3].weight, r.sensors[3].weight);
  std::stringstream bad("matmi-record v2\n");
  EXPECT_THROW(read_record(bad), DataError);
}
