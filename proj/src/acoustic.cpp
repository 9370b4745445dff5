#include "matmi/acoustic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include "matmi/errors.hpp"

namespace matmi {

using namespace std::complex_literals;

double sensor_diameter(const std::vector<Sensor>& s) {
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size(); ++j) d = std::max(d, norm(s[i].position - s[j].position));
  return d;
}

FrequencyGrid make_frequency_grid(const BoundaryRecord& rec, double omega_max, double d_omega) {
  rec.validate();
  const double nyquist = std::numbers::pi / rec.dt;
  const double c0 = rec.medium.c0();
  const double diam = sensor_diameter(rec.sensors);
  if (omega_max <= 0.0) omega_max = 0.8 * nyquist;
  if (omega_max > nyquist * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "frequency grid: omega_max = " << omega_max << " exceeds the record Nyquist frequency " << nyquist;
    throw ParameterError(msg.str());
  }
  const double dw_limit = std::numbers::pi * c0 / diam;
  if (d_omega <= 0.0) d_omega = std::min(dw_limit, 2.0 * std::numbers::pi / (rec.duration() + diam / c0));
  if (d_omega > dw_limit * (1.0 + 1e-12))
    throw ParameterError("frequency grid: d_omega does not resolve the domain (must be <= pi c0 / diameter)");
  FrequencyGrid g;
  g.d_omega = d_omega;
  g.count = std::max(1, static_cast<int>(std::floor(omega_max / d_omega + 1e-9)));
  return g;
}

Eigen::MatrixXcd to_frequency(const BoundaryRecord& rec, const FrequencyGrid& grid, double taper_fraction) {
  rec.validate();
  if (grid.omega_max() > std::numbers::pi / rec.dt * (1.0 + 1e-12))
    throw ParameterError("to_frequency: grid exceeds the record Nyquist frequency");
  const std::size_t ns = rec.sensors.size(), nt = rec.steps;
  const double T = rec.duration();
  const double t_start = (1.0 - taper_fraction) * T;
  Eigen::VectorXd w(static_cast<Eigen::Index>(nt));
  for (std::size_t n = 0; n < nt; ++n) {
    const double t = n * rec.dt;
    double taper = 1.0;
    if (taper_fraction > 0.0 && t > t_start)
      taper = 0.5 * (1.0 + std::cos(std::numbers::pi * (t - t_start) / (taper_fraction * T)));
    w[n] = taper * rec.dt * ((n == 0 || n + 1 == nt) ? 0.5 : 1.0);
  }
  Eigen::MatrixXcd out(static_cast<Eigen::Index>(ns), grid.count);
  std::vector<cplx> phase(nt);
  for (int j = 0; j < grid.count; ++j) {
    const double om = grid.omega(j);
    for (std::size_t n = 0; n < nt; ++n) phase[n] = w[n] * std::polar(1.0, om * n * rec.dt);
    for (std::size_t s = 0; s < ns; ++s) {
      cplx acc = 0.0;
      const double* g = &rec.samples[s * nt];
      for (std::size_t n = 0; n < nt; ++n) acc += g[n] * phase[n];
      out(static_cast<Eigen::Index>(s), j) = acc;
    }
  }
  return out;
}

cplx fundamental_solution(double omega, const Vec2& x, const Vec2& y, const AcousticMedium& med) {
  const double r = norm(x - y);
  if (r == 0.0) throw ParameterError("fundamental_solution: x = y is a singularity");
  const double kr = omega / med.c0() * r;
  return -0.25i * cplx(std::cyl_bessel_j(0.0, kr), std::cyl_neumann(0.0, kr));
}

cplx fundamental_solution_dnormal(double omega, const Vec2& x, const Vec2& nu, const Vec2& y,
                                  const AcousticMedium& med) {
  const Vec2 d = x - y;
  const double r = norm(d);
  if (r == 0.0) throw ParameterError("fundamental_solution: x = y is a singularity");
  const double k = omega / med.c0();
  const cplx h1(std::cyl_bessel_j(1.0, k * r), std::cyl_neumann(1.0, k * r));
  return 0.25i * k * h1 * dot(d, nu) / r;
}

namespace {

cplx hankel_asymptotic(int order, double x) {
  const double nu2 = 4.0 * order * order;
  cplx term = 1.0, sum = 1.0;
  const cplx ix = 1i / x;
  for (int k = 1; k <= 14; ++k) {
    term *= (nu2 - (2.0 * k - 1) * (2.0 * k - 1)) / (8.0 * k) * ix;
    sum += term;
  }
  const double chi = x - order * std::numbers::pi / 2.0 - std::numbers::pi / 4.0;
  return std::sqrt(2.0 / (std::numbers::pi * x)) * std::polar(1.0, chi) * sum;
}

}  // namespace

HankelTable::HankelTable() : lo_(0.5), hi_(500.0), step_(0.005) {
  const int n = static_cast<int>(std::round((hi_ - lo_) / step_)) + 1;
  for (auto* v : {&j0_, &y0_, &j1_, &y1_, &dj0_, &dy0_, &dj1_, &dy1_}) v->resize(n);
  for (int i = 0; i < n; ++i) {
    const double x = lo_ + i * step_;
    j0_[i] = std::cyl_bessel_j(0.0, x);
    y0_[i] = std::cyl_neumann(0.0, x);
    j1_[i] = std::cyl_bessel_j(1.0, x);
    y1_[i] = std::cyl_neumann(1.0, x);
    dj0_[i] = -j1_[i];
    dy0_[i] = -y1_[i];
    dj1_[i] = j0_[i] - j1_[i] / x;
    dy1_[i] = y0_[i] - y1_[i] / x;
  }
}

double HankelTable::hermite(const std::vector<double>& f, const std::vector<double>& df, double x) const {
  const double u = (x - lo_) / step_;
  const auto i = std::min(static_cast<std::size_t>(u), f.size() - 2);
  const double s = u - static_cast<double>(i);
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * f[i] + (s3 - 2 * s2 + s) * step_ * df[i] + (-2 * s3 + 3 * s2) * f[i + 1] +
         (s3 - s2) * step_ * df[i + 1];
}

cplx HankelTable::h0(double x) const {
  if (x < lo_) return {std::cyl_bessel_j(0.0, x), std::cyl_neumann(0.0, x)};
  if (x >= hi_) return hankel_asymptotic(0, x);
  return {hermite(j0_, dj0_, x), hermite(y0_, dy0_, x)};
}

cplx HankelTable::h1(double x) const {
  if (x < lo_) return {std::cyl_bessel_j(1.0, x), std::cyl_neumann(1.0, x)};
  if (x >= hi_) return hankel_asymptotic(1, x);
  return {hermite(j1_, dj1_, x), hermite(y1_, dy1_, x)};
}

const HankelTable& hankel_table() {
  static const HankelTable table;
  return table;
}

Eigen::VectorXcd half_plus_kstar(const Eigen::VectorXcd& ghat, double omega, const std::vector<Sensor>& s,
                                 const AcousticMedium& med) {
  const auto n = static_cast<Eigen::Index>(s.size());
  if (ghat.size() != n) throw UsageError("half_plus_kstar: data size differs from sensor count");
  const HankelTable& tab = hankel_table();
  const double k = omega / med.c0();
  Eigen::VectorXcd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    cplx acc = (0.5 + s[i].weight * s[i].curvature / (4.0 * std::numbers::pi)) * ghat[i];
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const Vec2 d = s[i].position - s[j].position;
      const double r = norm(d);
      const cplx kern = 0.25i * k * tab.h1(k * r) * dot(d, s[i].normal) / r;
      acc += s[j].weight * kern * ghat[j];
    }
    out[i] = acc;
  }
  return out;
}

namespace {

bool strictly_inside(const std::vector<Sensor>& s, const Vec2& p, double tol) {
  int winding = 0;
  const std::size_t n = s.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = s[i].position;
    const Vec2& b = s[(i + 1) % n].position;
    const Vec2 e = b - a;
    const double len2 = dot(e, e);
    const double t = std::clamp(dot(p - a, e) / len2, 0.0, 1.0);
    if (norm(p - (a + t * e)) <= tol) return false;
    if (a.y <= p.y) {
      if (b.y > p.y && cross(e, p - a) > 0) ++winding;
    } else if (b.y <= p.y && cross(e, p - a) < 0) {
      --winding;
    }
  }
  return winding != 0;
}

}  // namespace

ImagingIndex imaging_index(const Eigen::MatrixXcd& phi, const FrequencyGrid& grid, const std::vector<Sensor>& s,
                           const std::vector<Vec2>& points, const AcousticMedium& med, int threads) {
  if (phi.rows() != static_cast<Eigen::Index>(s.size()) || phi.cols() != grid.count)
    throw UsageError("imaging_index: processed data has the wrong shape");
  ImagingIndex idx;
  idx.points = points;
  idx.grid = grid;
  idx.excluded.assign(points.size(), 0);
  idx.values = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(points.size()), grid.count);
  const double tol = 1e-9 * sensor_diameter(s);
  for (std::size_t p = 0; p < points.size(); ++p) idx.excluded[p] = strictly_inside(s, points[p], tol) ? 0 : 1;

  const HankelTable& tab = hankel_table();
  const double inv_c = 1.0 / med.c0();
  // Weighted data, sensor-major for contiguous access.
  std::vector<cplx> wphi(s.size() * grid.count);
  for (std::size_t k = 0; k < s.size(); ++k)
    for (int j = 0; j < grid.count; ++j) wphi[k * grid.count + j] = s[k].weight * phi(static_cast<Eigen::Index>(k), j);

  auto work = [&](std::size_t begin, std::size_t end) {
    std::vector<cplx> acc(grid.count);
    for (std::size_t p = begin; p < end; ++p) {
      if (idx.excluded[p]) continue;
      std::fill(acc.begin(), acc.end(), cplx(0.0));
      for (std::size_t k = 0; k < s.size(); ++k) {
        const double r = norm(s[k].position - points[p]);
        const cplx* w = &wphi[k * grid.count];
        for (int j = 0; j < grid.count; ++j) {
          const cplx gamma = -0.25i * tab.h0(grid.omega(j) * inv_c * r);
          acc[j] += std::conj(gamma) * w[j];
        }
      }
      // conj(G) Phi - G conj(Phi) = 2 i Im(conj(G) Phi)
      for (int j = 0; j < grid.count; ++j) idx.values(static_cast<Eigen::Index>(p), j) = cplx(0.0, 2.0 * acc[j].imag());
    }
  };
  unsigned nthreads = threads > 0 ? static_cast<unsigned>(threads) : std::max(1u, std::thread::hardware_concurrency());
  nthreads = std::min<unsigned>(nthreads, static_cast<unsigned>(std::max<std::size_t>(1, points.size())));
  if (nthreads <= 1) {
    work(0, points.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (points.size() + nthreads - 1) / nthreads;
    for (unsigned t = 0; t < nthreads; ++t) {
      const std::size_t b = t * chunk, e = std::min(points.size(), b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }
  return idx;
}

double inversion_constant(const AcousticMedium& med) { return -1.0 / (std::numbers::pi * med.c0() * med.c0()); }

std::vector<double> reconstruct_source(const ImagingIndex& idx, const AcousticMedium& med) {
  const cplx pre = inversion_constant(med) / (1i * med.rho0);
  std::vector<double> f(idx.points.size(), 0.0);
  for (std::size_t p = 0; p < f.size(); ++p) {
    if (idx.excluded[p]) continue;
    cplx acc = 0.0;
    for (int j = 0; j < idx.grid.count; ++j) acc += idx.grid.omega(j) * idx.values(static_cast<Eigen::Index>(p), j);
    f[p] = (pre * acc * idx.grid.d_omega).real();
  }
  return f;
}

ScalarField recover_source(const BoundaryRecord& rec, const MeshPtr& mesh, const SourceRecoveryOptions& opt,
                           SourceRecoveryInfo* info) {
  const FrequencyGrid grid = make_frequency_grid(rec, opt.omega_max, opt.d_omega);
  const Eigen::MatrixXcd ghat = to_frequency(rec, grid, opt.taper_fraction);
  Eigen::MatrixXcd phi(ghat.rows(), ghat.cols());
  for (int j = 0; j < grid.count; ++j) phi.col(j) = half_plus_kstar(ghat.col(j), grid.omega(j), rec.sensors, rec.medium);
  const ImagingIndex idx = imaging_index(phi, grid, rec.sensors, mesh->nodes(), rec.medium, opt.threads);
  std::vector<double> f = reconstruct_source(idx, rec.medium);
  // Fill excluded nodes by repeated neighbor averaging.
  std::vector<char> known(f.size());
  std::size_t excluded = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    known[i] = !idx.excluded[i];
    excluded += idx.excluded[i];
  }
  if (excluded == f.size()) throw DataError("recover_source: every evaluation point lies outside the sensor polygon");
  const auto& off = mesh->node_triangle_offsets();
  const auto& lst = mesh->node_triangle_list();
  bool pending = excluded > 0;
  while (pending) {
    pending = false;
    std::vector<char> next = known;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (known[i]) continue;
      double sum = 0.0;
      int n = 0;
      for (int k = off[i]; k < off[i + 1]; ++k)
        for (int v : mesh->triangles()[lst[k]])
          if (known[v]) { sum += f[v]; ++n; }
      if (n > 0) { f[i] = sum / n; next[i] = 1; } else { pending = true; }
    }
    known.swap(next);
  }
  if (info) {
    info->grid = grid;
    info->constant = inversion_constant(rec.medium);
    info->excluded_points = excluded;
    double mx = 0.0;
    for (Eigen::Index p = 0; p < idx.values.rows(); ++p)
      for (Eigen::Index j = 0; j < idx.values.cols(); ++j) mx = std::max(mx, std::abs(idx.values(p, j)));
    info->max_real_part_ratio = mx > 0 ? idx.values.real().cwiseAbs().maxCoeff() / mx : 0.0;
  }
  return {mesh, ScalarRole::Source, std::move(f)};
}

}  // namespace matmi
