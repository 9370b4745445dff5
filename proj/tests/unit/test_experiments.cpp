#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "matmi/io.hpp"
#include "matmi/rng.hpp"

using namespace matmi;
using namespace matmi::test;

namespace {

VectorField difference(const VectorField& a, const VectorField& b) {
  VectorField d = a;
  for (std::size_t t = 0; t < d.size(); ++t) d[t] = a[t] - b[t];
  return d;
}

VectorField smooth_current(const MeshPtr& m) {
  return cellwise(m, [](const Vec2& p) { return Vec2{1.0 + 0.3 * p.y, -0.5 + 0.2 * p.x * p.y}; }, VectorRole::Current);
}

ExperimentConfig small_config() {
  ExperimentConfig c = parse_config(R"(
[mesh]
h = 0.1
[wave]
grid_spacing = 0.04
sensors = 96
record_stride = 2
[imaging]
omega_max = 20
[pipeline]
algorithms = of
[noise]
levels = 0.02, 0.10
realizations = 4
seed = 11
)");
  return c;
}

}  // namespace

TEST(Noise, LevelZeroIsBitwiseCopy) {
  const MeshPtr m = standard_ellipse(0.1);
  const VectorField J = smooth_current(m);
  const VectorField n = add_noise(J, 0.0, 5);
  for (std::size_t t = 0; t < J.size(); ++t) {
    EXPECT_EQ(n[t].x, J[t].x);
    EXPECT_EQ(n[t].y, J[t].y);
  }
}

TEST(Noise, RelativeSizeMatchesLevel) {
  const MeshPtr m = standard_ellipse(0.04);
  ASSERT_GE(m->triangle_count(), 2000u);
  const VectorField J = smooth_current(m);
  for (double level : {0.02, 0.1}) {
    const VectorField n = add_noise(J, level, CounterRng::derive(3, 1, 2, 0));
    const double ratio = l2_norm(difference(n, J)) / l2_norm(J);
    EXPECT_NEAR(ratio, level, 0.1 * level) << level;
  }
}

TEST(Noise, SameKeyIsReproducibleAndKeysDiffer) {
  const MeshPtr m = standard_ellipse(0.1);
  const VectorField J = smooth_current(m);
  const VectorField a = add_noise(J, 0.05, 42), b = add_noise(J, 0.05, 42), c = add_noise(J, 0.05, 43);
  bool differs = false;
  for (std::size_t t = 0; t < J.size(); ++t) {
    EXPECT_EQ(a[t].x, b[t].x);
    EXPECT_EQ(a[t].y, b[t].y);
    differs = differs || a[t].x != c[t].x;
  }
  EXPECT_TRUE(differs);
}

TEST(Noise, ComponentsHaveHalfVariance) {
  const CounterRng rng(CounterRng::derive(9));
  double s1 = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const auto [a, b] = rng.normal_pair(static_cast<std::uint64_t>(k));
    s1 += a + b;
    s2 += a * a + b * b;
  }
  EXPECT_NEAR(s1 / (2.0 * n), 0.0, 0.01);
  EXPECT_NEAR(s2 / (2.0 * n), 1.0, 0.01);
}

TEST(Noise, RecordNoiseIsRelativeToRms) {
  BoundaryRecord r;
  r.sensors.resize(4);
  r.steps = 5000;
  r.dt = 0.01;
  r.samples.resize(4 * r.steps);
  for (std::size_t i = 0; i < r.samples.size(); ++i) r.samples[i] = std::sin(0.01 * static_cast<double>(i));
  const BoundaryRecord n = add_noise(r, 0.05, 17);
  double d2 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < r.samples.size(); ++i) {
    d2 += (n.samples[i] - r.samples[i]) * (n.samples[i] - r.samples[i]);
    s2 += r.samples[i] * r.samples[i];
  }
  EXPECT_NEAR(std::sqrt(d2 / s2), 0.05, 0.005);
  EXPECT_EQ(add_noise(r, 0.0, 17).samples, r.samples);
}

TEST(RelativeError, ZeroScaledAndQuadratureOracle) {
  const MeshPtr m = standard_ellipse(0.05);
  const ScalarField s = nodal(m, [](const Vec2& p) { return 1.0 + 0.5 * p.x; });
  EXPECT_EQ(relative_error(s, s), 0.0);
  ScalarField s11 = s;
  for (double& v : s11.values) v *= 1.1;
  EXPECT_NEAR(relative_error(s11, s), 0.1, 1e-12);
  // Midpoint-rule quadrature of the same ratio converges to the P1 value.
  const ScalarField r = nodal(m, [](const Vec2& p) { return 1.0 + 0.5 * p.x + 0.1 * p.y * p.y; });
  double num = 0.0, den = 0.0;
  for (std::size_t t = 0; t < m->triangle_count(); ++t) {
    const Vec2 c = m->centroid(t);
    const double d = 0.1 * c.y * c.y, b = 1.0 + 0.5 * c.x;
    num += m->area(t) * d * d;
    den += m->area(t) * b * b;
  }
  EXPECT_NEAR(relative_error(r, s), std::sqrt(num / den), 0.02 * std::sqrt(num / den));
}

TEST(Correlation, SelfAndAffine) {
  const MeshPtr m = standard_ellipse(0.1);
  const ScalarField s = smooth_random(m, 4);
  ScalarField t = s;
  for (double& v : t.values) v = 3.0 - 2.0 * v;
  EXPECT_NEAR(weighted_correlation(s, s), 1.0, 1e-12);
  EXPECT_NEAR(weighted_correlation(s, t), -1.0, 1e-12);
}

TEST(Csv, SeventeenSignificantDigits) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_EQ(format_double(std::nan("")), "nan");
  SweepResult r;
  r.noise_level = 0.05;
  r.algorithm = Algorithm::FixedPoint;
  r.mean_error = 0.25;
  r.std_error = 0.0;
  r.errors = {0.25};
  const std::string csv = sweep_csv({r});
  std::istringstream is(csv);
  std::string header, row;
  std::getline(is, header);
  std::getline(is, row);
  EXPECT_EQ(header, "noise_level,algorithm,mean_error,std_error,n");
  EXPECT_EQ(row, "0.050000000000000003,fixed-point,0.25,0,1");
}

TEST(Config, DefaultsParseAndValidate) {
  const ExperimentConfig c = parse_config("");
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.mesh.semi_axis_x, 2.0);
  EXPECT_EQ(c.mesh.semi_axis_y, 1.0);
  EXPECT_EQ(c.excitations.size(), 1u);
}

TEST(Config, ReadsValues) {
  const ExperimentConfig c = small_config();
  EXPECT_EQ(c.mesh.h, 0.1);
  EXPECT_EQ(c.noise_levels, (std::vector<double>{0.02, 0.10}));
  EXPECT_EQ(c.realizations, 4);
  EXPECT_EQ(c.seed, 11u);
  ASSERT_EQ(c.algorithms.size(), 1u);
  EXPECT_EQ(c.algorithms[0], Algorithm::OrthogonalField);
}

TEST(Config, RejectsInvalidInput) {
  for (const char* text : {"[mesh]\nh = -1\n", "[mesh]\nbogus = 1\n", "[pipeline]\nalgorithms = xx\n",
                           "[noise]\nlevels = 1.5\n", "[noise]\nrealizations = 0\n", "[mesh]\nh = 0.1x\n",
                           "[pipeline]\nmode = sideways\n", "[inversion]\nsolver = lu\n",
                           "[pipeline]\nnoise_target = record\n", "[orthogonal_field]\nscaling = odd\n"})
    EXPECT_THROW(parse_config(text).validate(), ConfigError) << text;
  EXPECT_THROW(load_config("/nonexistent/matmi.ini"), ConfigError);
}

TEST(Io, MeshAndFieldsRoundTrip) {
  const MeshPtr m = standard_ellipse(0.2);
  std::stringstream ms;
  write_mesh(ms, *m);
  const MeshPtr back = read_mesh(ms);
  ASSERT_EQ(back->node_count(), m->node_count());
  ASSERT_EQ(back->triangle_count(), m->triangle_count());
  for (std::size_t i = 0; i < m->node_count(); ++i) {
    EXPECT_EQ(back->nodes()[i].x, m->nodes()[i].x);
    EXPECT_EQ(back->nodes()[i].y, m->nodes()[i].y);
  }
  const ScalarField s = smooth_random(m, 8);
  std::stringstream ss;
  write_field(ss, s);
  EXPECT_EQ(read_scalar_field(ss, m).values, s.values);
  const VectorField v = smooth_current(m);
  std::stringstream vs;
  write_field(vs, v);
  const VectorField vb = read_vector_field(vs, m);
  for (std::size_t t = 0; t < v.size(); ++t) {
    EXPECT_EQ(vb[t].x, v[t].x);
    EXPECT_EQ(vb[t].y, v[t].y);
  }
}

TEST(Io, FieldOnWrongMeshIsRejected) {
  const MeshPtr a = standard_ellipse(0.2), b = standard_ellipse(0.3);
  std::stringstream ss;
  write_field(ss, smooth_random(a, 1));
  EXPECT_ANY_THROW(read_scalar_field(ss, b));
}

TEST(Transfer, ConstantFieldIsPreserved) {
  const MeshPtr fine = standard_ellipse(0.05), coarse_mesh = standard_ellipse(0.1);
  const VectorField f = cellwise(fine, [](const Vec2&) { return Vec2{0.3, -1.2}; });
  const VectorField c = transfer_current(f, coarse_mesh);
  for (std::size_t t = 0; t < c.size(); ++t) {
    EXPECT_NEAR(c[t].x, 0.3, 1e-12);
    EXPECT_NEAR(c[t].y, -1.2, 1e-12);
  }
}

TEST(Pipeline, ErrorGrowsWithNoiseAndRowsMatch) {
  const ExperimentConfig c = small_config();
  const PipelineOutcome o = run_pipeline(c, false);
  ASSERT_EQ(o.results.size(), 2u);
  EXPECT_EQ(o.failed_runs, 0);
  EXPECT_EQ(o.total_runs, 8);
  for (const auto& r : o.results) EXPECT_EQ(r.errors.size(), 4u);
  EXPECT_LT(o.results[0].mean_error, o.results[1].mean_error);
}

TEST(Pipeline, ResultsDoNotDependOnJobCount) {
  ExperimentConfig c = small_config();
  c.jobs = 1;
  const PipelineOutcome one = run_pipeline(c, false);
  c.jobs = 3;
  const PipelineOutcome three = run_pipeline(c, false);
  EXPECT_EQ(sweep_csv(one.results), sweep_csv(three.results));
}

TEST(Pipeline, WritesOutputs) {
  ExperimentConfig c = small_config();
  c.realizations = 1;
  c.output = (std::filesystem::temp_directory_path() / "matmi_pipeline_test").string();
  std::filesystem::remove_all(c.output);
  run_pipeline(c, true);
  for (const char* f : {"sweep.csv", "summary.json", "fields/mesh.txt", "fields/sigma_true.txt",
                        "realizations/L00_R0000.json", "reports/report_of_L0.json", "fields/sigma_of_L0.txt"})
    EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(c.output) / f)) << f;
  std::filesystem::remove_all(c.output);
}

TEST(Pipeline, FullChainIsNoBetterThanGivenCurrents) {
  ExperimentConfig c = small_config();
  c.noise_levels = {0.0};
  c.realizations = 1;
  const PipelineOutcome given = run_pipeline(c, false);
  c.mode = PipelineMode::FullChain;
  const PipelineOutcome chain = run_pipeline(c, false);
  ASSERT_EQ(chain.failed_runs, 0);
  EXPECT_LE(given.results[0].mean_error, chain.results[0].mean_error);
}
