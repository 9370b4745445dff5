#include "matmi/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "matmi/io.hpp"
#include "matmi/rng.hpp"

namespace matmi {

namespace fs = std::filesystem;

VectorField add_noise(const VectorField& J, double level, std::uint64_t key) {
  if (!(level >= 0.0)) throw ParameterError("add_noise: level must be >= 0");
  VectorField out = J;
  if (level == 0.0) return out;
  const double rms = l2_norm(J) / std::sqrt(J.mesh->total_area());
  const double amp = level * rms * std::sqrt(0.5);
  const CounterRng rng(key);
  for (std::size_t t = 0; t < out.size(); ++t) {
    const auto [g1, g2] = rng.normal_pair(t);
    out.values[t] += amp * Vec2{g1, g2};
  }
  return out;
}

BoundaryRecord add_noise(const BoundaryRecord& rec, double level, std::uint64_t key) {
  if (!(level >= 0.0)) throw ParameterError("add_noise: level must be >= 0");
  BoundaryRecord out = rec;
  if (level == 0.0) return out;
  double ss = 0.0;
  for (double v : rec.samples) ss += v * v;
  const double amp = level * std::sqrt(ss / static_cast<double>(rec.samples.size()));
  const CounterRng rng(key);
  for (std::size_t n = 0; n < out.samples.size(); n += 2) {
    const auto [g1, g2] = rng.normal_pair(n / 2);
    out.samples[n] += amp * g1;
    if (n + 1 < out.samples.size()) out.samples[n + 1] += amp * g2;
  }
  return out;
}

VectorField transfer_current(const VectorField& fine, const MeshPtr& coarse) {
  if (fine.mesh.get() == coarse.get()) return fine;
  const TriangleLocator loc(coarse);
  std::vector<Vec2> acc(coarse->triangle_count());
  std::vector<double> w(coarse->triangle_count(), 0.0);
  for (std::size_t t = 0; t < fine.size(); ++t) {
    const auto hit = loc.locate_or_nearest(fine.mesh->centroid(t));
    acc[static_cast<std::size_t>(hit.triangle)] += fine.mesh->area(t) * fine[t];
    w[static_cast<std::size_t>(hit.triangle)] += fine.mesh->area(t);
  }
  // Coarse triangles holding no fine centroid (only if the meshes are
  // comparable) fall back to point sampling at their centroid.
  std::optional<TriangleLocator> fine_loc;
  for (std::size_t t = 0; t < acc.size(); ++t) {
    if (w[t] > 0.0) {
      acc[t] *= 1.0 / w[t];
    } else {
      if (!fine_loc) fine_loc.emplace(fine.mesh);
      acc[t] = fine[static_cast<std::size_t>(fine_loc->locate_or_nearest(coarse->centroid(t)).triangle)];
    }
  }
  return {coarse, VectorRole::Current, std::move(acc)};
}

GroundTruth make_ground_truth(const ExperimentConfig& cfg) {
  const Ellipse ell = cfg.mesh.ellipse();
  GroundTruth g;
  g.mesh = build_ellipse_mesh(ell.ax, ell.ay, cfg.mesh.h);
  g.sigma = evaluate_phantom(cfg.phantom, g.mesh, ell);
  if (cfg.mesh.reference_h > 0.0 && cfg.mesh.reference_h < cfg.mesh.h) {
    g.reference_mesh = build_ellipse_mesh(ell.ax, ell.ay, cfg.mesh.reference_h);
    g.reference_sigma = evaluate_phantom(cfg.phantom, g.reference_mesh, ell);
  } else {
    g.reference_mesh = g.mesh;
    g.reference_sigma = g.sigma;
  }
  const SolverOptions direct{1e-12, 50000, SolverMethod::Direct};
  for (const auto& exc : cfg.excitations) {
    const ScalarField V = solve_potential(g.reference_sigma, exc, direct);
    g.reference_currents.push_back(current_density(g.reference_sigma, V, exc));
    g.currents.push_back(transfer_current(g.reference_currents.back(), g.mesh));
  }
  return g;
}

ChainResult run_acoustic_chain(const ExperimentConfig& cfg, const GroundTruth& truth, std::size_t k,
                               double record_noise, std::uint64_t key) {
  const ExcitationSpec& exc = cfg.excitations.at(k);
  ChainResult out;
  out.true_source = lorentz_source(truth.reference_currents.at(k), exc, cfg.medium);
  out.record = simulate_wave(out.true_source, cfg.medium, cfg.mesh.ellipse(), cfg.wave);
  if (record_noise > 0.0) out.record = add_noise(out.record, record_noise, key);
  SourceRecoveryOptions opt = cfg.imaging;
  if (opt.threads == 0) opt.threads = cfg.jobs;
  out.source = recover_source(out.record, truth.mesh, opt, &out.info);
  out.stream = recover_stream(out.source, exc, cfg.medium);
  out.current = recover_current(out.stream);
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string sweep_csv(const std::vector<SweepResult>& results) {
  std::string s = "noise_level,algorithm,mean_error,std_error,n\n";
  for (const auto& r : results)
    s += format_double(r.noise_level) + "," + std::string(long_name(r.algorithm)) + "," +
         format_double(r.mean_error) + "," + format_double(r.std_error) + "," + std::to_string(r.errors.size()) +
         "\n";
  return s;
}

namespace {

struct RunSlot {
  std::vector<std::optional<double>> errors;  // per algorithm
  std::vector<std::string> failures;
  std::vector<std::optional<ScalarField>> sigma;
  std::vector<std::optional<ReconstructionReport>> reports;
};

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw DataError("cannot write '" + p.string() + "'");
  os << text;
}

}  // namespace

PipelineOutcome run_pipeline(const ExperimentConfig& cfg, bool write_outputs) {
  cfg.validate();
  const GroundTruth truth = make_ground_truth(cfg);
  const std::size_t n_exc = cfg.excitations.size();
  const bool needs_second = std::find(cfg.algorithms.begin(), cfg.algorithms.end(), Algorithm::OptimalControl) !=
                                cfg.algorithms.end() && cfg.oc_excitations > 1;
  const std::size_t used_exc = needs_second ? std::min<std::size_t>(n_exc, cfg.oc_excitations) : 1;

  std::vector<VectorField> base = truth.currents;
  if (cfg.mode == PipelineMode::FullChain && cfg.noise_target == NoiseTarget::Current)
    for (std::size_t k = 0; k < used_exc; ++k) base[k] = run_acoustic_chain(cfg, truth, k).current;

  const std::size_t n_levels = cfg.noise_levels.size(), n_real = static_cast<std::size_t>(cfg.realizations);
  const std::size_t n_alg = cfg.algorithms.size();
  std::vector<RunSlot> slots(n_levels * n_real);
  fs::path out_dir(cfg.output);
  if (write_outputs) {
    fs::create_directories(out_dir / "realizations");
    fs::create_directories(out_dir / "reports");
    fs::create_directories(out_dir / "fields");
  }

  auto run_one = [&](std::size_t li, std::size_t r) {
    RunSlot& slot = slots[li * n_real + r];
    slot.errors.assign(n_alg, std::nullopt);
    slot.failures.assign(n_alg, "");
    slot.sigma.assign(n_alg, std::nullopt);
    slot.reports.assign(n_alg, std::nullopt);
    const double level = cfg.noise_levels[li];
    std::vector<VectorField> data(used_exc);
    try {
      for (std::size_t k = 0; k < used_exc; ++k) {
        const std::uint64_t key = CounterRng::derive(cfg.seed, li, r, k);
        if (cfg.noise_target == NoiseTarget::Record)
          data[k] = run_acoustic_chain(cfg, truth, k, level, key).current;
        else
          data[k] = add_noise(base[k], level, key);
      }
    } catch (const std::exception& e) {
      for (auto& f : slot.failures) f = std::string("data synthesis failed: ") + e.what();
      return;
    }
    for (std::size_t a = 0; a < n_alg; ++a) {
      const Algorithm alg = cfg.algorithms[a];
      const InversionConfig& ic = cfg.inversion(alg);
      ReconstructionReport rep;
      try {
        ScalarField s;
        if (alg == Algorithm::OptimalControl) {
          std::vector<VectorField> js(data.begin(), data.begin() + static_cast<long>(cfg.oc_excitations));
          std::vector<ExcitationSpec> es(cfg.excitations.begin(),
                                         cfg.excitations.begin() + static_cast<long>(cfg.oc_excitations));
          s = optimal_control_invert(js, es, ic, &rep);
        } else if (alg == Algorithm::FixedPoint) {
          s = fixed_point_invert(data[0], cfg.excitations[0], ic, &rep);
        } else {
          s = orthogonal_field_invert(data[0], cfg.excitations[0], ic, &rep);
        }
        const double err = relative_error(s, truth.sigma);
        rep.final_error = err;
        slot.errors[a] = err;
        if (r == 0) {
          slot.sigma[a] = std::move(s);
          slot.reports[a] = std::move(rep);
        }
      } catch (const std::exception& e) {
        slot.failures[a] = e.what();
      }
    }
    if (write_outputs) {
      nlohmann::ordered_json j;
      j["noise_level"] = level;
      j["realization"] = r;
      j["seed"] = cfg.seed;
      j["rng"] = std::string(CounterRng::kName);
      for (std::size_t a = 0; a < n_alg; ++a) {
        const std::string name(long_name(cfg.algorithms[a]));
        if (slot.errors[a]) j["errors"][name] = *slot.errors[a];
        else j["failures"][name] = slot.failures[a];
      }
      char name[64];
      std::snprintf(name, sizeof name, "L%02zu_R%04zu.json", li, r);
      write_text(out_dir / "realizations" / name, j.dump(2) + "\n");
    }
  };

  const std::size_t n_tasks = n_levels * n_real;
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < n_tasks; i = next++) run_one(i / n_real, i % n_real);
  };
  const int jobs = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(n_tasks)));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // Single-threaded merge in (level, algorithm) order.
  PipelineOutcome outcome;
  for (std::size_t li = 0; li < n_levels; ++li)
    for (std::size_t a = 0; a < n_alg; ++a) {
      SweepResult res;
      res.noise_level = cfg.noise_levels[li];
      res.algorithm = cfg.algorithms[a];
      for (std::size_t r = 0; r < n_real; ++r) {
        const auto& e = slots[li * n_real + r].errors[a];
        ++outcome.total_runs;
        if (e) res.errors.push_back(*e);
        else { ++res.failures; ++outcome.failed_runs; }
      }
      const double n = static_cast<double>(res.errors.size());
      if (res.errors.empty()) {
        res.mean_error = res.std_error = std::nan("");
      } else {
        double s = 0.0;
        for (double e : res.errors) s += e;
        res.mean_error = s / n;
        double v = 0.0;
        for (double e : res.errors) v += (e - res.mean_error) * (e - res.mean_error);
        res.std_error = res.errors.size() > 1 ? std::sqrt(v / (n - 1.0)) : 0.0;
      }
      outcome.results.push_back(std::move(res));
    }

  if (write_outputs) {
    write_text(out_dir / "sweep.csv", sweep_csv(outcome.results));
    write_mesh((out_dir / "fields" / "mesh.txt").string(), *truth.mesh);
    write_field((out_dir / "fields" / "sigma_true.txt").string(), truth.sigma);
    nlohmann::ordered_json summary;
    summary["seed"] = cfg.seed;
    summary["rng"] = std::string(CounterRng::kName);
    summary["mode"] = to_string(cfg.mode);
    summary["noise_target"] = cfg.noise_target == NoiseTarget::Record ? "record" : "current";
    summary["mesh"] = {{"semi_axis_x", cfg.mesh.semi_axis_x},
                       {"semi_axis_y", cfg.mesh.semi_axis_y},
                       {"h", cfg.mesh.h},
                       {"reference_h", cfg.mesh.reference_h},
                       {"nodes", truth.mesh->node_count()},
                       {"triangles", truth.mesh->triangle_count()}};
    summary["total_runs"] = outcome.total_runs;
    summary["failed_runs"] = outcome.failed_runs;
    for (const auto& r : outcome.results)
      summary["results"].push_back({{"noise_level", r.noise_level},
                                    {"algorithm", std::string(long_name(r.algorithm))},
                                    {"mean_error", r.mean_error},
                                    {"std_error", r.std_error},
                                    {"n", r.errors.size()},
                                    {"failures", r.failures}});
    write_text(out_dir / "summary.json", summary.dump(2) + "\n");
    for (std::size_t li = 0; li < n_levels; ++li) {
      const RunSlot& slot = slots[li * n_real];
      for (std::size_t a = 0; a < n_alg; ++a) {
        const std::string tag = std::string(to_string(cfg.algorithms[a])) + "_L" + std::to_string(li);
        if (slot.sigma[a]) write_field((out_dir / "fields" / ("sigma_" + tag + ".txt")).string(), *slot.sigma[a]);
        if (slot.reports[a])
          write_text(out_dir / "reports" / ("report_" + tag + ".json"),
                     report_to_json(*slot.reports[a], cfg.inversion(cfg.algorithms[a])) + "\n");
      }
    }
  }
  return outcome;
}

}  // namespace matmi
