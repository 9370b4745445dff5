#include "matmi/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace matmi {

namespace pt = boost::property_tree;

const InversionConfig& ExperimentConfig::inversion(Algorithm a) const {
  switch (a) {
    case Algorithm::OptimalControl: return oc;
    case Algorithm::FixedPoint: return fp;
    default: return of;
  }
}

std::string to_string(PipelineMode m) { return m == PipelineMode::FullChain ? "full-chain" : "current-given"; }

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.phantom = default_phantom();
  c.excitations = {standard_excitation()};
  c.wave.grid_spacing = 0.01;
  c.wave.record_stride = 4;
  c.imaging.omega_max = 60.0;
  InversionConfig base;
  base.region.domain = c.mesh.ellipse();
  base.sigma0 = c.phantom.sigma0;
  base.lower = c.phantom.lower;
  base.upper = c.phantom.upper;
  c.oc = c.fp = c.of = base;
  c.oc.algorithm = Algorithm::OptimalControl;
  c.oc.step = 8e-7;
  c.oc.max_iterations = 50;
  c.oc.initial_sigma = 3.0;
  c.oc.tolerance = 0.0;
  c.fp.algorithm = Algorithm::FixedPoint;
  c.fp.max_iterations = 9;
  c.fp.initial_sigma = 1.0;
  c.of.algorithm = Algorithm::OrthogonalField;
  return c;
}

void ExperimentConfig::validate() const {
  if (!(mesh.semi_axis_x > 0.0) || !(mesh.semi_axis_y > 0.0) || !(mesh.h > 0.0))
    throw ConfigError("config: mesh sizes must be positive");
  if (mesh.reference_h < 0.0 || (mesh.reference_h > 0.0 && mesh.reference_h > mesh.h))
    throw ConfigError("config: reference_h must be 0 or finer than h");
  if (excitations.empty()) throw ConfigError("config: at least one excitation is required");
  for (const auto& e : excitations) e.validate();
  medium.validate();
  const Ellipse ell = mesh.ellipse();
  phantom.validate(ell);
  if (noise_levels.empty()) throw ConfigError("config: at least one noise level is required");
  for (double l : noise_levels)
    if (!(l >= 0.0 && l < 1.0)) throw ConfigError("config: noise levels must lie in [0, 1)");
  if (realizations < 1) throw ConfigError("config: realization count must be >= 1");
  if (jobs < 1) throw ConfigError("config: jobs must be >= 1");
  if (algorithms.empty()) throw ConfigError("config: no algorithm selected");
  if (noise_target == NoiseTarget::Record && mode != PipelineMode::FullChain)
    throw ConfigError("config: noise_target = record requires mode = full-chain");
  if (oc_excitations < 1 || oc_excitations > static_cast<int>(excitations.size()))
    throw ConfigError("config: optimal_control.excitations exceeds the configured excitations");
  for (const auto* c : {&oc, &fp, &of}) {
    c->validate();
    // The reference region must sit where sigma = sigma0 is known.
    for (const auto& inc : phantom.inclusions)
      for (int k = 0; k < 360; ++k) {
        const double a = 2.0 * std::numbers::pi * k / 360.0;
        const Vec2 p = inc.center + inc.radius * Vec2{std::cos(a), std::sin(a)};
        if (std::sqrt(ell.level(p)) >= c->region.min_radius)
          throw ConfigError("config: reference region overlaps an inclusion");
      }
  }
}

namespace {

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  bool has_section(const std::string& s) const { return tree_.find(s) != tree_.not_found(); }

  template <class T>
  void get(const std::string& section, const std::string& key, T& out) {
    used_.insert(section + "." + key);
    auto sec = tree_.get_child_optional(section);
    if (!sec) return;
    auto v = sec->get_optional<std::string>(key);
    if (!v) return;
    out = convert<T>(*v, section + "." + key);
  }

  std::optional<std::string> raw(const std::string& section, const std::string& key) {
    used_.insert(section + "." + key);
    auto sec = tree_.get_child_optional(section);
    if (!sec) return std::nullopt;
    auto v = sec->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return *v;
  }

  void check_unused() const {
    for (const auto& [section, body] : tree_) {
      if (body.empty() && !body.data().empty())
        throw ConfigError("config: key '" + section + "' outside of a section");
      for (const auto& [key, value] : body)
        if (!used_.count(section + "." + key))
          throw ConfigError("config: unknown key '" + key + "' in section [" + section + "]");
    }
  }

  template <class T>
  static T convert(const std::string& s, const std::string& where) {
    std::istringstream is(s);
    T v{};
    if (!(is >> v)) throw ConfigError("config: cannot parse '" + s + "' for " + where);
    std::string rest;
    if (is >> rest) throw ConfigError("config: trailing text '" + rest + "' for " + where);
    return v;
  }

 private:
  const pt::ptree& tree_;
  std::set<std::string> used_;
};

template <>
std::string Reader::convert<std::string>(const std::string& s, const std::string&) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    out.push_back(item.substr(b, item.find_last_not_of(" \t") - b + 1));
  }
  return out;
}

ExcitationSpec read_excitation(Reader& r, const std::string& sec) {
  std::string preset = "standard";
  double scale = 1e-2, angle = 0.0;
  r.get(sec, "preset", preset);
  r.get(sec, "scale", scale);
  r.get(sec, "offset_angle_deg", angle);
  ExcitationSpec e;
  if (preset == "standard") {
    e = standard_excitation(scale);
    const double a = angle * std::numbers::pi / 180.0;
    const Vec2 o = e.a1_offset;
    e.a1_offset = {std::cos(a) * o.x - std::sin(a) * o.y, std::sin(a) * o.x + std::cos(a) * o.y};
  } else if (preset == "rotational") {
    e = rotational_excitation(scale);
  } else if (preset == "custom") {
    e = standard_excitation(0.0);
    r.get(sec, "a1_offset_x", e.a1_offset.x);
    r.get(sec, "a1_offset_y", e.a1_offset.y);
    r.get(sec, "a1_gxx", e.a1_gradient.xx);
    r.get(sec, "a1_gxy", e.a1_gradient.xy);
    r.get(sec, "a1_gyx", e.a1_gradient.yx);
    e.a1_gradient.yy = -e.a1_gradient.xx;
  } else {
    throw ConfigError("config: unknown excitation preset '" + preset + "' in [" + sec + "]");
  }
  int samples = static_cast<int>(e.pulse.size());
  r.get(sec, "b0", e.b0);
  r.get(sec, "t_pulse", e.t_pulse);
  r.get(sec, "pulse_samples", samples);
  if (samples < 2) throw ConfigError("config: pulse_samples must be >= 2");
  e.pulse = smooth_ramp(samples);
  return e;
}

FieldScaling scaling_from(const std::string& s) {
  if (s == "pointwise") return FieldScaling::Pointwise;
  if (s == "none") return FieldScaling::None;
  throw ConfigError("config: field scaling must be 'pointwise' or 'none'");
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream is(text);
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  Reader r(tree);
  ExperimentConfig c = default_config();

  r.get("mesh", "semi_axis_x", c.mesh.semi_axis_x);
  r.get("mesh", "semi_axis_y", c.mesh.semi_axis_y);
  r.get("mesh", "h", c.mesh.h);
  r.get("mesh", "reference_h", c.mesh.reference_h);

  r.get("phantom", "sigma0", c.phantom.sigma0);
  r.get("phantom", "lower", c.phantom.lower);
  r.get("phantom", "upper", c.phantom.upper);
  r.get("phantom", "guard_band", c.phantom.guard_band);
  if (auto inc = r.raw("phantom", "inclusions")) {
    c.phantom.inclusions.clear();
    if (Reader::convert<std::string>(*inc, "") != "none")
      for (const auto& item : split(*inc, ';')) {
        std::istringstream is(item);
        Inclusion in;
        if (!(is >> in.center.x >> in.center.y >> in.radius >> in.amplitude))
          throw ConfigError("config: inclusion needs 'x y radius amplitude [exponent]'");
        if (!(is >> in.exponent)) in.exponent = 2.0;
        c.phantom.inclusions.push_back(in);
      }
  }

  c.excitations = {read_excitation(r, "excitation")};
  if (r.has_section("excitation2")) c.excitations.push_back(read_excitation(r, "excitation2"));

  r.get("medium", "rho0", c.medium.rho0);
  r.get("medium", "lambda0", c.medium.lambda0);

  r.get("wave", "grid_spacing", c.wave.grid_spacing);
  r.get("wave", "cfl", c.wave.cfl);
  r.get("wave", "t_final", c.wave.t_final);
  r.get("wave", "sensors", c.wave.sensors);
  r.get("wave", "record_stride", c.wave.record_stride);

  r.get("imaging", "omega_max", c.imaging.omega_max);
  r.get("imaging", "d_omega", c.imaging.d_omega);
  r.get("imaging", "taper_fraction", c.imaging.taper_fraction);

  std::string mode = to_string(c.mode), target = "current", algos;
  r.get("pipeline", "mode", mode);
  r.get("pipeline", "noise_target", target);
  if (mode == "full-chain") c.mode = PipelineMode::FullChain;
  else if (mode == "current-given") c.mode = PipelineMode::CurrentGiven;
  else throw ConfigError("config: pipeline.mode must be 'current-given' or 'full-chain'");
  if (target == "record") c.noise_target = NoiseTarget::Record;
  else if (target == "current") c.noise_target = NoiseTarget::Current;
  else throw ConfigError("config: pipeline.noise_target must be 'current' or 'record'");
  if (auto a = r.raw("pipeline", "algorithms")) {
    c.algorithms.clear();
    for (const auto& item : split(*a, ',')) {
      try {
        c.algorithms.push_back(algorithm_from_string(item));
      } catch (const ParameterError& e) {
        throw ConfigError(std::string("config: ") + e.what());
      }
    }
  }

  // Settings shared by every algorithm.
  double lower = c.phantom.lower, upper = c.phantom.upper, radius = 0.85, tol = 1e-12;
  std::string solver = "direct";
  r.get("inversion", "lower", lower);
  r.get("inversion", "upper", upper);
  r.get("inversion", "reference_radius", radius);
  r.get("inversion", "solver", solver);
  r.get("inversion", "solver_tol", tol);
  if (solver != "direct" && solver != "cg") throw ConfigError("config: inversion.solver must be 'direct' or 'cg'");
  for (auto* ic : {&c.oc, &c.fp, &c.of}) {
    ic->lower = lower;
    ic->upper = upper;
    ic->sigma0 = c.phantom.sigma0;
    ic->region = {c.mesh.ellipse(), radius};
    ic->solver.method = solver == "direct" ? SolverMethod::Direct : SolverMethod::ConjugateGradient;
    ic->solver.tol = tol;
  }
  r.get("optimal_control", "step", c.oc.step);
  r.get("optimal_control", "iterations", c.oc.max_iterations);
  r.get("optimal_control", "initial_sigma", c.oc.initial_sigma);
  r.get("optimal_control", "tolerance", c.oc.tolerance);
  r.get("optimal_control", "excitations", c.oc_excitations);
  r.get("fixed_point", "iterations", c.fp.max_iterations);
  r.get("fixed_point", "initial_sigma", c.fp.initial_sigma);
  r.get("fixed_point", "floor", c.fp.current_floor);
  r.get("fixed_point", "smoothing", c.fp.smoothing_width);
  r.get("fixed_point", "tolerance", c.fp.tolerance);
  std::string scaling = "pointwise";
  r.get("orthogonal_field", "viscosity", c.of.viscosity);
  r.get("orthogonal_field", "floor", c.of.current_floor);
  r.get("orthogonal_field", "scaling", scaling);
  c.of.scaling = scaling_from(scaling);

  if (auto lv = r.raw("noise", "levels")) {
    c.noise_levels.clear();
    for (const auto& item : split(*lv, ',')) c.noise_levels.push_back(Reader::convert<double>(item, "noise.levels"));
  }
  r.get("noise", "realizations", c.realizations);
  r.get("noise", "seed", c.seed);
  r.get("run", "jobs", c.jobs);
  r.get("run", "output", c.output);

  r.check_unused();
  try {
    c.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

}  // namespace matmi
