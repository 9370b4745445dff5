#include "matmi/inversion.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <json.hpp>
#include <sstream>

#include "matmi/errors.hpp"

namespace matmi {

namespace {

constexpr std::string_view kShort[] = {"oc", "fp", "of"};
constexpr std::string_view kLong[] = {"optimal-control", "fixed-point", "orthogonal-field"};

std::vector<double> centroid_values(const ScalarField& f) {
  std::vector<double> v(f.mesh->triangle_count());
  for (std::size_t t = 0; t < v.size(); ++t) v[t] = f.at_centroid(t);
  return v;
}

// e_T = grad F_T + A1(c_T)
std::vector<Vec2> total_field(const ScalarField& potential, const ExcitationSpec& exc) {
  const VectorField g = gradient(potential);
  std::vector<Vec2> e(g.size());
  for (std::size_t t = 0; t < e.size(); ++t) e[t] = g[t] + exc.a1(potential.mesh->centroid(t));
  return e;
}

// Triangle values to nodes by area-weighted averaging over incident triangles
// accepted by `use`; nodes without any keep `fallback`.
template <class Use>
std::vector<double> to_nodes(const Mesh& m, const std::vector<double>& tri_values, Use&& use,
                             const std::vector<double>& fallback, std::vector<char>* touched = nullptr) {
  std::vector<double> out(m.node_count());
  if (touched) touched->assign(m.node_count(), 0);
  const auto& off = m.node_triangle_offsets();
  const auto& lst = m.node_triangle_list();
  for (std::size_t i = 0; i < out.size(); ++i) {
    double s = 0.0, w = 0.0;
    for (int k = off[i]; k < off[i + 1]; ++k) {
      const int t = lst[k];
      if (!use(t)) continue;
      s += m.area(t) * tri_values[t];
      w += m.area(t);
    }
    if (w > 0.0) {
      out[i] = s / w;
      if (touched) (*touched)[i] = 1;
    } else {
      out[i] = fallback[i];
    }
  }
  return out;
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

void check_currents(const ScalarField& sigma, const std::vector<VectorField>& currents,
                    const std::vector<ExcitationSpec>& excitations) {
  if (currents.empty() || currents.size() != excitations.size())
    throw UsageError("misfit: need one current field per excitation");
  for (const auto& j : currents) require_same_mesh(sigma.mesh, j.mesh, "misfit");
}

}  // namespace

std::string_view to_string(Algorithm a) { return kShort[static_cast<int>(a)]; }
std::string_view long_name(Algorithm a) { return kLong[static_cast<int>(a)]; }

Algorithm algorithm_from_string(std::string_view s) {
  for (int i = 0; i < 3; ++i)
    if (s == kShort[i] || s == kLong[i]) return static_cast<Algorithm>(i);
  throw ParameterError("unknown algorithm '" + std::string(s) + "' (expected oc, fp or of)");
}

std::vector<char> ReferenceRegion::node_mask(const Mesh& mesh) const {
  std::vector<char> mask(mesh.node_count());
  for (std::size_t i = 0; i < mask.size(); ++i)
    mask[i] = std::sqrt(domain.level(mesh.nodes()[i])) >= min_radius - 1e-12 ? 1 : 0;
  return mask;
}

void InversionConfig::validate() const {
  if (!(lower > 0.0) || !(upper > lower)) throw ParameterError("inversion: need 0 < a < b");
  if (!(step > 0.0)) throw ParameterError("inversion: step size mu must be positive");
  if (!(viscosity > 0.0)) throw ParameterError("inversion: viscosity eta must be positive");
  if (!(current_floor > 0.0) || current_floor >= 1.0)
    throw ParameterError("inversion: current floor must lie in (0, 1)");
  if (max_iterations < 1) throw ParameterError("inversion: iteration cap must be >= 1");
  if (smoothing_width < 0.0) throw ParameterError("inversion: smoothing width must be >= 0");
  if (tolerance < 0.0) throw ParameterError("inversion: tolerance must be >= 0");
  if (!(sigma0 > 0.0)) throw ParameterError("inversion: sigma0 must be positive");
  if (!(region.min_radius > 0.0) || region.min_radius >= 1.0)
    throw ParameterError("inversion: reference region radius must lie in (0, 1)");
}

ScalarField clamp(const ScalarField& sigma, double lower, double upper) {
  ScalarField out = sigma;
  for (double& v : out.values) v = std::clamp(v, lower, upper);
  out.role = ScalarRole::Conductivity;
  return out;
}

ScalarField forward_op(const ScalarField& sigma, const ExcitationSpec& exc, const SolverOptions& options) {
  return solve_potential(sigma, exc, options);
}

ScalarField frechet_derivative(const ScalarField& sigma, const ScalarField& h, const ExcitationSpec& exc,
                               const SolverOptions& options) {
  require_same_mesh(sigma.mesh, h.mesh, "frechet_derivative");
  const ScalarField F = forward_op(sigma, exc, options);
  const auto e = total_field(F, exc);
  const auto& m = *sigma.mesh;
  std::vector<SymTensor> K(m.triangle_count());
  std::vector<Vec2> q(m.triangle_count());
  for (std::size_t t = 0; t < K.size(); ++t) {
    const double s = sigma.at_centroid(t);
    K[t] = {s, 0.0, s};
    q[t] = h.at_centroid(t) * e[t];
  }
  return solve_spd(assemble_diffusion(sigma.mesh, K, q, Constraint::ZeroMean), options, ScalarRole::Potential);
}

double misfit(const ScalarField& sigma, const std::vector<VectorField>& currents,
              const std::vector<ExcitationSpec>& excs, const SolverOptions& options) {
  check_currents(sigma, currents, excs);
  const auto& m = *sigma.mesh;
  const auto sc = centroid_values(sigma);
  double total = 0.0;
  for (std::size_t i = 0; i < currents.size(); ++i) {
    const auto e = total_field(forward_op(sigma, excs[i], options), excs[i]);
    for (std::size_t t = 0; t < e.size(); ++t) {
      const Vec2 r = sc[t] * e[t] - currents[i][t];
      total += 0.5 * m.area(t) * dot(r, r);
    }
  }
  return total;
}

double MisfitGradient::directional(const ScalarField& h) const {
  require_same_mesh(nodal.mesh, h.mesh, "MisfitGradient::directional");
  double s = 0.0;
  for (std::size_t t = 0; t < density.size(); ++t) s += h.mesh->area(t) * density[t] * h.at_centroid(t);
  return s;
}

namespace {

// Adjoint s: int sigma grad s . grad phi = -int sigma r . grad phi.
ScalarField adjoint_state(const ScalarField& sigma, const std::vector<double>& sc, const std::vector<Vec2>& r,
                          const SolverOptions& options) {
  std::vector<SymTensor> K(sc.size());
  std::vector<Vec2> q(sc.size());
  for (std::size_t t = 0; t < sc.size(); ++t) {
    K[t] = {sc[t], 0.0, sc[t]};
    q[t] = sc[t] * r[t];
  }
  return solve_spd(assemble_diffusion(sigma.mesh, K, q, Constraint::ZeroMean), options, ScalarRole::Generic);
}

}  // namespace

MisfitGradient misfit_gradient(const ScalarField& sigma, const std::vector<VectorField>& currents,
                               const std::vector<ExcitationSpec>& excs, const SolverOptions& options) {
  check_currents(sigma, currents, excs);
  const auto& m = *sigma.mesh;
  const auto sc = centroid_values(sigma);
  MisfitGradient g;
  g.density.assign(m.triangle_count(), 0.0);
  for (std::size_t i = 0; i < currents.size(); ++i) {
    const auto e = total_field(forward_op(sigma, excs[i], options), excs[i]);
    std::vector<Vec2> r(e.size());
    for (std::size_t t = 0; t < e.size(); ++t) {
      r[t] = sc[t] * e[t] - currents[i][t];
      g.value += 0.5 * m.area(t) * dot(r[t], r[t]);
    }
    const VectorField gs = gradient(adjoint_state(sigma, sc, r, options));
    for (std::size_t t = 0; t < e.size(); ++t) g.density[t] += dot(r[t], e[t]) + dot(gs[t], e[t]);
  }
  // Lumped-L2 representative: <dJ, h> = sum_i m_i g_i h_i exactly.
  std::vector<double> nodal(m.node_count(), 0.0);
  for (std::size_t t = 0; t < m.triangle_count(); ++t)
    for (int v : m.triangles()[t]) nodal[v] += m.area(t) * g.density[t] / 3.0;
  for (std::size_t i = 0; i < nodal.size(); ++i) nodal[i] /= m.lumped_mass()[i];
  g.nodal = ScalarField(sigma.mesh, ScalarRole::Generic, std::move(nodal));
  return g;
}

AdjointSides adjoint_identity(const ScalarField& sigma, const ScalarField& h, const VectorField& current,
                              const ExcitationSpec& exc, const SolverOptions& options) {
  require_same_mesh(sigma.mesh, current.mesh, "adjoint_identity");
  const auto& m = *sigma.mesh;
  const auto sc = centroid_values(sigma);
  const auto e = total_field(forward_op(sigma, exc, options), exc);
  std::vector<Vec2> r(e.size());
  for (std::size_t t = 0; t < e.size(); ++t) r[t] = sc[t] * e[t] - current[t];
  const VectorField gq = gradient(frechet_derivative(sigma, h, exc, options));
  const VectorField gs = gradient(adjoint_state(sigma, sc, r, options));
  AdjointSides sides;
  for (std::size_t t = 0; t < e.size(); ++t) {
    sides.lhs += m.area(t) * sc[t] * dot(r[t], gq[t]);
    sides.rhs += m.area(t) * h.at_centroid(t) * dot(gs[t], e[t]);
  }
  return sides;
}

ScalarField optimal_control_invert(const std::vector<VectorField>& currents, const std::vector<ExcitationSpec>& excs,
                                   const InversionConfig& cfg, ReconstructionReport* report,
                                   const ScalarField* initial) {
  cfg.validate();
  if (currents.empty()) throw UsageError("optimal_control_invert: no current data");
  const auto t0 = std::chrono::steady_clock::now();
  const MeshPtr& mesh = currents.front().mesh;
  ScalarField sigma = initial ? *initial : ScalarField(mesh, ScalarRole::Conductivity, cfg.initial_sigma);
  ReconstructionReport rep;
  rep.algorithm = Algorithm::OptimalControl;
  double previous = std::numeric_limits<double>::infinity();
  int increases = 0;
  for (int n = 0; n < cfg.max_iterations; ++n) {
    const ScalarField sc = clamp(sigma, cfg.lower, cfg.upper);
    const MisfitGradient g = misfit_gradient(sc, currents, excs, cfg.solver);
    ScalarField next = sc;
    for (std::size_t i = 0; i < next.size(); ++i) next.values[i] -= cfg.step * g.nodal[i];
    ScalarField diff = next;
    for (std::size_t i = 0; i < diff.size(); ++i) diff.values[i] -= sc.values[i];
    const double update = l2_norm(diff) / l2_norm(sc);
    rep.misfit_history.push_back(g.value);
    rep.update_history.push_back(update);
    rep.iterations = n + 1;
    increases = g.value > previous ? increases + 1 : 0;
    previous = g.value;
    if (increases >= 5) {
      std::ostringstream msg;
      msg << "optimal control: misfit increased over 5 consecutive steps (mu = " << cfg.step
          << ", misfit " << g.value << "); reduce the step size";
      throw SolverError(msg.str(), g.value, n + 1);
    }
    sigma = std::move(next);
    if (cfg.tolerance > 0.0 && update < cfg.tolerance) {
      rep.converged = true;
      break;
    }
  }
  sigma = clamp(sigma, cfg.lower, cfg.upper);
  rep.wall_ms = elapsed_ms(t0);
  if (report) *report = std::move(rep);
  return sigma;
}

ScalarField gaussian_smooth(const ScalarField& f, double width) {
  if (!(width > 0.0)) return f;
  const Mesh& m = *f.mesh;
  const auto& x = m.nodes();
  const double cut = 3.0 * width;
  double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
  for (const auto& p : x) {
    x0 = std::min(x0, p.x); y0 = std::min(y0, p.y);
    x1 = std::max(x1, p.x); y1 = std::max(y1, p.y);
  }
  const int nx = static_cast<int>((x1 - x0) / cut) + 1, ny = static_cast<int>((y1 - y0) / cut) + 1;
  std::vector<std::vector<int>> cells(static_cast<std::size_t>(nx) * ny);
  auto cell_of = [&](const Vec2& p) {
    return std::pair{std::min(nx - 1, static_cast<int>((p.x - x0) / cut)),
                     std::min(ny - 1, static_cast<int>((p.y - y0) / cut))};
  };
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto [ci, cj] = cell_of(x[i]);
    cells[cj * nx + ci].push_back(static_cast<int>(i));
  }
  const double inv2w2 = 1.0 / (2.0 * width * width);
  const auto& mass = m.lumped_mass();
  ScalarField out = f;
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto [ci, cj] = cell_of(x[i]);
    double s = 0.0, w = 0.0;
    for (int j = std::max(0, cj - 1); j <= std::min(ny - 1, cj + 1); ++j)
      for (int k = std::max(0, ci - 1); k <= std::min(nx - 1, ci + 1); ++k)
        for (int n : cells[j * nx + k]) {
          const Vec2 d = x[n] - x[i];
          const double d2 = dot(d, d);
          if (d2 > cut * cut) continue;
          const double kw = std::exp(-d2 * inv2w2) * mass[n];
          s += kw * f.values[n];
          w += kw;
        }
    out.values[i] = s / w;
  }
  return out;
}

ScalarField fixed_point_invert(const VectorField& J, const ExcitationSpec& exc, const InversionConfig& cfg,
                               ReconstructionReport* report, const ScalarField* initial) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const MeshPtr& mesh = J.mesh;
  const Mesh& m = *mesh;
  double jmax = 0.0;
  for (const auto& v : J.values) jmax = std::max(jmax, norm(v));
  if (jmax == 0.0) throw DataError("fixed_point_invert: current vanishes identically");
  std::vector<char> mask(m.triangle_count());
  for (std::size_t t = 0; t < mask.size(); ++t) mask[t] = norm(J[t]) > cfg.current_floor * jmax;
  ScalarField sigma = initial ? clamp(*initial, cfg.lower, cfg.upper)
                              : ScalarField(mesh, ScalarRole::Conductivity, cfg.initial_sigma);
  ReconstructionReport rep;
  rep.algorithm = Algorithm::FixedPoint;
  rep.unreliable_count = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 0));
  for (int n = 0; n < cfg.max_iterations; ++n) {
    const auto e = total_field(forward_op(sigma, exc, cfg.solver), exc);
    const auto sc = centroid_values(sigma);
    double emax = 0.0, mis = 0.0;
    for (std::size_t t = 0; t < e.size(); ++t) {
      emax = std::max(emax, norm(e[t]));
      const Vec2 r = sc[t] * e[t] - J[t];
      mis += 0.5 * m.area(t) * dot(r, r);
    }
    std::vector<double> gt(e.size(), 0.0);
    for (std::size_t t = 0; t < e.size(); ++t) {
      if (!mask[t]) continue;
      const double e2 = dot(e[t], e[t]);
      if (e2 <= 1e-16 * emax * emax) {
        gt[t] = sc[t];
        ++rep.fallback_count;
      } else {
        gt[t] = dot(e[t], J[t]) / e2;
      }
    }
    std::vector<char> touched;
    ScalarField g(mesh, ScalarRole::Generic,
                  to_nodes(m, gt, [&](int t) { return mask[t] != 0; }, sigma.values, &touched));
    const ScalarField smooth = gaussian_smooth(g, cfg.smoothing_width * m.h());
    ScalarField next = sigma;
    for (std::size_t i = 0; i < next.size(); ++i)
      if (touched[i]) next.values[i] = std::clamp(smooth.values[i], cfg.lower, cfg.upper);
    ScalarField diff = next;
    for (std::size_t i = 0; i < diff.size(); ++i) diff.values[i] -= sigma.values[i];
    const double update = l2_norm(diff) / l2_norm(sigma);
    rep.misfit_history.push_back(mis);
    rep.update_history.push_back(update);
    rep.iterations = n + 1;
    sigma = std::move(next);
    if (cfg.tolerance > 0.0 && update < cfg.tolerance) {
      rep.converged = true;
      break;
    }
  }
  if (rep.fallback_count > 0)
    rep.notes.push_back("stabilization fallback on " + std::to_string(rep.fallback_count) +
                        " triangle updates where |grad V + A1| vanished");
  rep.wall_ms = elapsed_ms(t0);
  if (report) *report = std::move(rep);
  return sigma;
}

VectorField orthogonal_field(const VectorField& J) {
  std::vector<Vec2> f(J.size());
  for (std::size_t t = 0; t < f.size(); ++t) f[t] = {-J[t].y, J[t].x};
  return {J.mesh, VectorRole::OrthogonalField, std::move(f)};
}

ScalarField viscosity_solve(const VectorField& F, const ExcitationSpec& exc, double eta, FieldScaling scaling,
                            const SolverOptions& options) {
  if (!(eta > 0.0)) throw ParameterError("viscosity_solve: eta must be positive");
  exc.validate();
  const Mesh& m = *F.mesh;
  double fmax = 0.0;
  for (const auto& v : F.values) fmax = std::max(fmax, norm(v));
  std::vector<SymTensor> K(m.triangle_count());
  std::vector<Vec2> q(m.triangle_count());
  for (std::size_t t = 0; t < K.size(); ++t) {
    Vec2 f = F[t];
    if (scaling == FieldScaling::Pointwise) {
      const double n = norm(f);
      f = n > 1e-14 * fmax ? (1.0 / n) * f : Vec2{};
    }
    K[t] = {eta + f.x * f.x, f.x * f.y, eta + f.y * f.y};
    q[t] = K[t].apply(exc.a1(m.centroid(t)));
  }
  return solve_spd(assemble_diffusion(F.mesh, K, q, Constraint::ZeroMean), options, ScalarRole::ViscosityPotential);
}

ResistivityResult resistivity_from_potential(const ScalarField& U, const ExcitationSpec& exc, const VectorField& J,
                                             double floor) {
  if (!(floor > 0.0)) throw ParameterError("resistivity_from_potential: floor must be positive");
  require_same_mesh(U.mesh, J.mesh, "resistivity_from_potential");
  const Mesh& m = *U.mesh;
  const auto e = total_field(U, exc);
  const std::size_t nt = m.triangle_count();
  std::vector<double> s(nt, 0.0);
  ResistivityResult res;
  res.reliable.assign(nt, 0);
  std::deque<int> queue;
  for (std::size_t t = 0; t < nt; ++t) {
    const double jn = norm(J[t]), en = norm(e[t]);
    if (jn >= floor && en > 0.0 && std::isfinite(jn / en)) {
      s[t] = jn / en;
      res.reliable[t] = 1;
      queue.push_back(static_cast<int>(t));
    }
  }
  res.unreliable_count = nt - queue.size();
  if (queue.empty()) throw DataError("resistivity_from_potential: |J| is below the floor everywhere");
  // Breadth-first extension: each unreliable triangle takes the mean of its
  // already-filled neighbors in the first layer that reaches it.
  std::vector<char> filled(res.reliable);
  const auto& nbr = m.triangle_neighbors();
  while (!queue.empty()) {
    std::vector<int> layer;
    for (int t : queue)
      for (int k = 0; k < 3; ++k) {
        const int u = nbr[t][k];
        if (u >= 0 && !filled[u]) {
          filled[u] = 2;
          layer.push_back(u);
        }
      }
    queue.clear();
    for (int u : layer) {
      double sum = 0.0;
      int n = 0;
      for (int k = 0; k < 3; ++k) {
        const int v = nbr[u][k];
        if (v >= 0 && filled[v] == 1) { sum += s[v]; ++n; }
      }
      s[u] = sum / n;
    }
    for (int u : layer) {
      filled[u] = 1;
      queue.push_back(u);
    }
  }
  std::vector<double> dummy(m.node_count(), 0.0);
  res.sigma = ScalarField(U.mesh, ScalarRole::Conductivity, to_nodes(m, s, [](int) { return true; }, dummy));
  return res;
}

RescaleResult rescale(const ScalarField& raw, const std::vector<char>& region, double sigma0) {
  if (region.size() != raw.size()) throw UsageError("rescale: region mask size differs from node count");
  const auto& mass = raw.mesh->lumped_mass();
  double s = 0.0, w = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i)
    if (region[i]) { s += mass[i] * raw.values[i]; w += mass[i]; }
  if (w == 0.0) throw DataError("rescale: reference region is empty");
  const double mean = s / w;
  if (mean == 0.0 || !std::isfinite(mean)) throw DataError("rescale: zero mean over the reference region");
  RescaleResult out{raw, sigma0 / mean};
  for (double& v : out.sigma.values) v *= out.factor;
  out.sigma.role = ScalarRole::Conductivity;
  return out;
}

ScalarField orthogonal_field_invert(const VectorField& J, const ExcitationSpec& exc, const InversionConfig& cfg,
                                    ReconstructionReport* report) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  double jmax = 0.0;
  for (const auto& v : J.values) jmax = std::max(jmax, norm(v));
  if (jmax == 0.0) throw DataError("orthogonal_field_invert: current vanishes identically");
  const ScalarField U = viscosity_solve(orthogonal_field(J), exc, cfg.viscosity, cfg.scaling, cfg.solver);
  const ResistivityResult raw = resistivity_from_potential(U, exc, J, cfg.current_floor * jmax);
  const RescaleResult scaled = rescale(raw.sigma, cfg.region.node_mask(*J.mesh), cfg.sigma0);
  ScalarField sigma = clamp(scaled.sigma, cfg.lower, cfg.upper);
  ReconstructionReport rep;
  rep.algorithm = Algorithm::OrthogonalField;
  rep.iterations = 1;
  rep.scale_factor = scaled.factor;
  rep.unreliable_count = raw.unreliable_count;
  rep.misfit_history.push_back(misfit(sigma, {J}, {exc}, cfg.solver));
  const ScalarField start(J.mesh, ScalarRole::Conductivity, cfg.sigma0);
  ScalarField diff = sigma;
  for (std::size_t i = 0; i < diff.size(); ++i) diff.values[i] -= start.values[i];
  rep.update_history.push_back(l2_norm(diff) / l2_norm(start));
  rep.converged = true;
  if (raw.unreliable_count > 0)
    rep.notes.push_back(std::to_string(raw.unreliable_count) +
                        " triangles below the current floor were filled from reliable neighbors");
  rep.wall_ms = elapsed_ms(t0);
  if (report) *report = std::move(rep);
  return sigma;
}

double relative_error(const ScalarField& rec, const ScalarField& truth) {
  require_same_mesh(rec.mesh, truth.mesh, "relative_error");
  const double den = l2_norm(truth);
  if (den == 0.0) throw DataError("relative_error: reference field has zero norm");
  ScalarField d = rec;
  for (std::size_t i = 0; i < d.size(); ++i) d.values[i] -= truth.values[i];
  return l2_norm(d) / den;
}

double weighted_correlation(const ScalarField& a, const ScalarField& b) {
  require_same_mesh(a.mesh, b.mesh, "weighted_correlation");
  const auto& w = a.mesh->lumped_mass();
  double sw = 0, ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) { sw += w[i]; ma += w[i] * a[i]; mb += w[i] * b[i]; }
  ma /= sw;
  mb /= sw;
  double cab = 0, caa = 0, cbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cab += w[i] * (a[i] - ma) * (b[i] - mb);
    caa += w[i] * (a[i] - ma) * (a[i] - ma);
    cbb += w[i] * (b[i] - mb) * (b[i] - mb);
  }
  if (caa == 0.0 || cbb == 0.0) return 0.0;
  return cab / std::sqrt(caa * cbb);
}

std::string report_to_json(const ReconstructionReport& r, const InversionConfig& cfg, int indent) {
  nlohmann::ordered_json j;
  j["algorithm"] = std::string(long_name(r.algorithm));
  j["params"] = {{"lower", cfg.lower},
                 {"upper", cfg.upper},
                 {"step", cfg.step},
                 {"max_iterations", cfg.max_iterations},
                 {"viscosity", cfg.viscosity},
                 {"current_floor", cfg.current_floor},
                 {"smoothing_width", cfg.smoothing_width},
                 {"tolerance", cfg.tolerance},
                 {"initial_sigma", cfg.initial_sigma},
                 {"sigma0", cfg.sigma0},
                 {"reference_min_radius", cfg.region.min_radius},
                 {"field_scaling", cfg.scaling == FieldScaling::Pointwise ? "pointwise" : "none"}};
  j["history"] = {{"misfit", r.misfit_history}, {"update", r.update_history}};
  j["final_error"] = r.final_error ? nlohmann::ordered_json(*r.final_error) : nlohmann::ordered_json(nullptr);
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["scale_factor"] = r.scale_factor;
  j["unreliable_triangles"] = r.unreliable_count;
  j["fallback_updates"] = r.fallback_count;
  j["notes"] = r.notes;
  j["wall_ms"] = r.wall_ms;
  return j.dump(indent);
}

}  // namespace matmi
