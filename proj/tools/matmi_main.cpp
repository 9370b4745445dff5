#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>

#include "matmi/experiments.hpp"
#include "matmi/io.hpp"
#include "matmi/rng.hpp"

namespace fs = std::filesystem;
using namespace matmi;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::string out;
};

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? default_config() : load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.jobs) cfg.jobs = *c.jobs;
  if (!c.out.empty()) cfg.output = c.out;
  cfg.validate();
  return cfg;
}

void add_common(CLI::App* app, Common& c, bool config_required) {
  auto* opt = app->add_option("--config", c.config, "experiment configuration file")->check(CLI::ExistingFile);
  if (config_required) opt->required();
  app->add_option("--seed", c.seed, "RNG seed (overrides the config)");
  app->add_option("--jobs", c.jobs, "worker threads (overrides the config)")->check(CLI::PositiveNumber);
}

MeshPtr sibling_mesh(const std::string& explicit_path, const std::string& data_path) {
  const fs::path p = explicit_path.empty() ? fs::path(data_path).parent_path() / "mesh.txt" : fs::path(explicit_path);
  if (!fs::exists(p)) throw DataError("mesh file '" + p.string() + "' not found (use --mesh)");
  return read_mesh(p.string());
}

void write_json(const fs::path& p, const nlohmann::ordered_json& j) {
  std::ofstream os(p);
  if (!os) throw DataError("cannot write '" + p.string() + "'");
  os << j.dump(2) << "\n";
}

void ensure_parent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

int cmd_simulate(const Common& c) {
  const ExperimentConfig cfg = load(c);
  const fs::path dir(cfg.output);
  fs::create_directories(dir);
  const GroundTruth truth = make_ground_truth(cfg);
  const ExcitationSpec& exc = cfg.excitations.front();
  const SolverOptions direct{1e-12, 50000, SolverMethod::Direct};
  const ScalarField V = solve_potential(truth.sigma, exc, direct);
  const VectorField J = current_density(truth.sigma, V, exc);
  const ScalarField f = lorentz_source(J, exc, cfg.medium);
  const ScalarField f_ref = lorentz_source(truth.reference_currents.front(), exc, cfg.medium);
  WaveDiagnostics diag;
  const BoundaryRecord rec = simulate_wave(f_ref, cfg.medium, cfg.mesh.ellipse(), cfg.wave, &diag);
  write_mesh((dir / "mesh.txt").string(), *truth.mesh);
  write_field((dir / "sigma.txt").string(), truth.sigma);
  write_field((dir / "potential.txt").string(), V);
  write_field((dir / "current.txt").string(), J);
  write_field((dir / "source.txt").string(), f);
  write_record((dir / "record.txt").string(), rec);
  nlohmann::ordered_json j;
  j["seed"] = cfg.seed;
  j["rng"] = std::string(CounterRng::kName);
  j["nodes"] = truth.mesh->node_count();
  j["triangles"] = truth.mesh->triangle_count();
  j["sensors"] = rec.sensors.size();
  j["dt"] = rec.dt;
  j["steps"] = rec.steps;
  j["wave_grid"] = {diag.grid_nx, diag.grid_ny};
  j["wave_energy_initial"] = diag.energy.empty() ? 0.0 : diag.energy.front();
  j["wave_energy_final"] = diag.energy.empty() ? 0.0 : diag.energy.back();
  write_json(dir / "simulate.json", j);
  std::cout << "wrote " << dir.string() << "/{mesh,sigma,potential,current,source,record}.txt\n";
  return kExitOk;
}

int cmd_recover_source(const Common& c, const std::string& record_path, const std::string& out,
                       const std::string& mesh_path, std::optional<double> omega_max) {
  ExperimentConfig cfg = c.config.empty() ? default_config() : load(c);
  if (c.jobs) cfg.jobs = *c.jobs;
  const BoundaryRecord rec = read_record(record_path);
  const MeshPtr mesh = sibling_mesh(mesh_path, record_path);
  SourceRecoveryOptions opt = cfg.imaging;
  if (omega_max) opt.omega_max = *omega_max;
  if (opt.threads == 0) opt.threads = cfg.jobs;
  SourceRecoveryInfo info;
  const ScalarField f = recover_source(rec, mesh, opt, &info);
  ensure_parent(out);
  write_field(out, f);
  nlohmann::ordered_json j;
  j["field"] = fs::path(out).filename().string();
  j["evaluation"] = "mesh nodes";
  j["nodes"] = mesh->node_count();
  j["d_omega"] = info.grid.d_omega;
  j["frequency_count"] = info.grid.count;
  j["omega_max"] = info.grid.omega_max();
  j["C2D"] = info.constant;
  j["rho0"] = rec.medium.rho0;
  j["c0"] = rec.medium.c0();
  j["excluded_points"] = info.excluded_points;
  j["max_real_part_ratio"] = info.max_real_part_ratio;
  write_json(out + ".json", j);
  return kExitOk;
}

int cmd_recover_current(const Common& c, const std::string& source_path, const std::string& out,
                        const std::string& mesh_path, int excitation) {
  const ExperimentConfig cfg = load(c);
  if (excitation < 0 || excitation >= static_cast<int>(cfg.excitations.size()))
    throw ConfigError("--excitation index out of range");
  const MeshPtr mesh = sibling_mesh(mesh_path, source_path);
  const ScalarField f = read_scalar_field(source_path, mesh);
  const ScalarField w = recover_stream(f, cfg.excitations[static_cast<std::size_t>(excitation)], cfg.medium);
  const VectorField J = recover_current(w);
  ensure_parent(out);
  write_field(out, J);
  return kExitOk;
}

int cmd_invert(const Common& c, const std::string& algorithm, const std::vector<std::string>& currents,
               const std::string& out, const std::string& report_path, const std::string& mesh_path,
               const std::string& truth_path) {
  const ExperimentConfig cfg = load(c);
  Algorithm alg;
  try {
    alg = algorithm_from_string(algorithm);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  const MeshPtr mesh = sibling_mesh(mesh_path, currents.front());
  std::vector<VectorField> js;
  for (const auto& p : currents) js.push_back(read_vector_field(p, mesh));
  const InversionConfig& ic = cfg.inversion(alg);
  ReconstructionReport rep;
  ScalarField sigma;
  if (alg == Algorithm::OptimalControl) {
    if (js.size() > cfg.excitations.size()) throw ConfigError("more --current files than configured excitations");
    std::vector<ExcitationSpec> es(cfg.excitations.begin(), cfg.excitations.begin() + static_cast<long>(js.size()));
    sigma = optimal_control_invert(js, es, ic, &rep);
  } else {
    if (js.size() != 1) throw ConfigError("fixed-point and orthogonal-field take exactly one --current");
    sigma = alg == Algorithm::FixedPoint ? fixed_point_invert(js[0], cfg.excitations[0], ic, &rep)
                                         : orthogonal_field_invert(js[0], cfg.excitations[0], ic, &rep);
  }
  const ScalarField truth = truth_path.empty() ? evaluate_phantom(cfg.phantom, mesh, cfg.mesh.ellipse())
                                               : read_scalar_field(truth_path, mesh);
  rep.final_error = relative_error(sigma, truth);
  ensure_parent(out);
  write_field(out, sigma);
  if (!report_path.empty()) {
    ensure_parent(report_path);
    std::ofstream os(report_path);
    if (!os) throw DataError("cannot write '" + report_path + "'");
    os << report_to_json(rep, ic) << "\n";
  }
  std::cout << long_name(alg) << ": relative error " << format_double(*rep.final_error) << " after "
            << rep.iterations << " iterations\n";
  return kExitOk;
}

int report_sweep(const PipelineOutcome& out, const ExperimentConfig& cfg) {
  std::cout << sweep_csv(out.results);
  std::cout << "outputs in " << cfg.output << " (" << out.failed_runs << "/" << out.total_runs << " runs failed)\n";
  if (out.total_runs > 0 && out.failed_runs == out.total_runs) return kExitSolver;
  return kExitOk;
}

int cmd_sweep(const Common& c) {
  const ExperimentConfig cfg = load(c);
  return report_sweep(run_pipeline(cfg, true), cfg);
}

int cmd_run_all(const Common& c) {
  const ExperimentConfig cfg = load(c);
  Common sim = c;
  sim.out = (fs::path(cfg.output) / "simulate").string();
  cmd_simulate(sim);
  return report_sweep(run_pipeline(cfg, true), cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"matmi: magnetoacoustic tomography with magnetic induction toolkit"};
  app.require_subcommand(1);
  Common common;

  auto* simulate = app.add_subcommand("simulate", "forward model and boundary record for the first excitation");
  add_common(simulate, common, false);
  simulate->add_option("--out", common.out, "output directory");

  std::string record, out, mesh, source, algorithm, report, truth;
  std::optional<double> omega_max;
  std::vector<std::string> currents;
  int excitation = 0;

  auto* rsrc = app.add_subcommand("recover-source", "boundary record -> acoustic source");
  add_common(rsrc, common, false);
  rsrc->add_option("--record", record, "matmi-record file")->required()->check(CLI::ExistingFile);
  rsrc->add_option("--out", out, "output field file")->required();
  rsrc->add_option("--mesh", mesh, "mesh file (default: mesh.txt next to the record)");
  rsrc->add_option("--omega-max", omega_max, "frequency cutoff")->check(CLI::PositiveNumber);

  auto* rcur = app.add_subcommand("recover-current", "acoustic source -> current density");
  add_common(rcur, common, true);
  rcur->add_option("--source", source, "source field file")->required()->check(CLI::ExistingFile);
  rcur->add_option("--out", out, "output vector field file")->required();
  rcur->add_option("--mesh", mesh, "mesh file (default: mesh.txt next to the source)");
  rcur->add_option("--excitation", excitation, "excitation index in the config");

  auto* inv = app.add_subcommand("invert", "current density -> conductivity");
  add_common(inv, common, true);
  inv->add_option("--algorithm", algorithm, "oc, fp or of")->required();
  inv->add_option("--current", currents, "vector field file (repeat for several excitations)")
      ->required()
      ->check(CLI::ExistingFile);
  inv->add_option("--out", out, "output conductivity field")->required();
  inv->add_option("--report", report, "report JSON");
  inv->add_option("--mesh", mesh, "mesh file (default: mesh.txt next to the current)");
  inv->add_option("--truth", truth, "true conductivity field (default: the configured phantom)");

  auto* sweep = app.add_subcommand("sweep-noise", "noise sweep over levels and realizations");
  add_common(sweep, common, false);
  sweep->add_option("--out", common.out, "output directory");

  auto* all = app.add_subcommand("run-all", "simulate, then the configured sweep");
  add_common(all, common, false);
  all->add_option("--out", common.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(common);
    if (rsrc->parsed()) return cmd_recover_source(common, record, out, mesh, omega_max);
    if (rcur->parsed()) return cmd_recover_current(common, source, out, mesh, excitation);
    if (inv->parsed()) return cmd_invert(common, algorithm, currents, out, report, mesh, truth);
    if (sweep->parsed()) return cmd_sweep(common);
    if (all->parsed()) return cmd_run_all(common);
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const ParameterError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ModelError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
