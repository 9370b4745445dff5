#include "matmi/wave.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "matmi/errors.hpp"

namespace matmi {

std::vector<Sensor> ellipse_sensors(const Ellipse& domain, int count) {
  const auto ts = domain.equal_arc_parameters(count);
  const double w = domain.perimeter() / count;
  std::vector<Sensor> out(count);
  for (int j = 0; j < count; ++j)
    out[j] = {domain.point(ts[j]), domain.outward_normal(ts[j]), domain.curvature(ts[j]), w};
  return out;
}

std::vector<Sensor> polygon_sensors(const std::vector<Vec2>& pos) {
  const std::size_t n = pos.size();
  if (n < 3) throw DataError("polygon_sensors: need at least three sensors");
  std::vector<Sensor> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Vec2& a = pos[(j + n - 1) % n];
    const Vec2& b = pos[j];
    const Vec2& c = pos[(j + 1) % n];
    const Vec2 d = c - a;
    out[j].position = b;
    out[j].normal = (1.0 / norm(d)) * Vec2{d.y, -d.x};
    out[j].weight = 0.5 * (norm(b - a) + norm(c - b));
    // Circumcircle curvature, signed positive for a convex ccw polygon.
    const double la = norm(b - a), lb = norm(c - b), lc = norm(c - a);
    out[j].curvature = 2.0 * cross(b - a, c - b) / (la * lb * lc);
  }
  return out;
}

void BoundaryRecord::validate(double diameter) const {
  if (!(dt > 0.0)) throw DataError("record: dt must be positive");
  if (sensors.empty() || steps < 2) throw DataError("record: empty");
  if (samples.size() != sensors.size() * steps) throw DataError("record: sample count mismatch");
  if (diameter > 0.0 && duration() < 2.0 * diameter / medium.c0() * (1.0 - 1e-12))
    throw DataError("record: duration shorter than two domain traversals");
}

namespace {

struct Stencil {
  int idx[4];
  double w[4];
};

class Grid {
 public:
  Grid(const Ellipse& e, double dx, double min_arm) : e_(e), dx_(dx) {
    hx_ = static_cast<int>(std::ceil(e.ax / dx)) + 3;
    hy_ = static_cast<int>(std::ceil(e.ay / dx)) + 3;
    nx_ = 2 * hx_ + 1;
    ny_ = 2 * hy_ + 1;
    inside_.assign(static_cast<std::size_t>(nx_) * ny_, 0);
    for (int j = 0; j < ny_; ++j)
      for (int i = 0; i < nx_; ++i)
        if (e.level(pos(i, j)) < 1.0) inside_[id(i, j)] = 1;
    for (int j = 0; j < ny_; ++j)
      for (int i = 0; i < nx_; ++i) {
        if (!inside_[id(i, j)]) continue;
        Row r;
        r.self = id(i, j);
        const Vec2 p = pos(i, j);
        // Arms to the neighbor or to the boundary crossing.
        const double sx = e.ax * std::sqrt(std::max(0.0, 1.0 - (p.y / e.ay) * (p.y / e.ay)));
        const double sy = e.ay * std::sqrt(std::max(0.0, 1.0 - (p.x / e.ax) * (p.x / e.ax)));
        auto arm = [&](bool in, double gap) {
          return in ? dx : std::clamp(gap, min_arm * dx, dx);
        };
        const bool ie = inside_[id(i + 1, j)], iw = inside_[id(i - 1, j)];
        const bool in = inside_[id(i, j + 1)], is = inside_[id(i, j - 1)];
        const double he = arm(ie, sx - p.x), hw = arm(iw, p.x + sx);
        const double hn = arm(in, sy - p.y), hs = arm(is, p.y + sy);
        r.nbr[0] = ie ? id(i + 1, j) : -1;
        r.nbr[1] = iw ? id(i - 1, j) : -1;
        r.nbr[2] = in ? id(i, j + 1) : -1;
        r.nbr[3] = is ? id(i, j - 1) : -1;
        r.c[0] = 2.0 / (he * (he + hw));
        r.c[1] = 2.0 / (hw * (he + hw));
        r.c[2] = 2.0 / (hn * (hn + hs));
        r.c[3] = 2.0 / (hs * (hn + hs));
        r.center = -2.0 / (he * hw) - 2.0 / (hn * hs);
        rows_.push_back(r);
      }
  }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t size() const { return inside_.size(); }
  std::size_t interior() const { return rows_.size(); }
  int id(int i, int j) const { return j * nx_ + i; }
  Vec2 pos(int i, int j) const { return {(i - hx_) * dx_, (j - hy_) * dx_}; }

  template <class Fn>
  void for_each_interior(Fn&& fn) const {
    for (const auto& r : rows_) fn(r.self);
  }

  void laplacian(const std::vector<double>& p, std::vector<double>& out) const {
    for (const auto& r : rows_) {
      double s = r.center * p[r.self];
      for (int k = 0; k < 4; ++k)
        if (r.nbr[k] >= 0) s += r.c[k] * p[r.nbr[k]];
      out[r.self] = s;
    }
  }

  Stencil bilinear(const Vec2& q) const {
    const double fx = q.x / dx_ + hx_, fy = q.y / dx_ + hy_;
    const int i = std::clamp(static_cast<int>(std::floor(fx)), 0, nx_ - 2);
    const int j = std::clamp(static_cast<int>(std::floor(fy)), 0, ny_ - 2);
    const double u = fx - i, v = fy - j;
    return {{id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1)},
            {(1 - u) * (1 - v), u * (1 - v), (1 - u) * v, u * v}};
  }

 private:
  struct Row {
    int self = 0;
    int nbr[4];
    double c[4];
    double center = 0;
  };
  Ellipse e_;
  double dx_;
  int hx_, hy_, nx_, ny_;
  std::vector<char> inside_;
  std::vector<Row> rows_;
};

double eval(const Stencil& s, const std::vector<double>& p) {
  return s.w[0] * p[s.idx[0]] + s.w[1] * p[s.idx[1]] + s.w[2] * p[s.idx[2]] + s.w[3] * p[s.idx[3]];
}

}  // namespace

BoundaryRecord simulate_wave(const ScalarField& source, const AcousticMedium& medium, const Ellipse& domain,
                             const WaveOptions& opt, WaveDiagnostics* diag) {
  medium.validate();
  const double c0 = medium.c0();
  const double dx = opt.grid_spacing;
  if (!(dx > 0.0) || dx >= std::min(domain.ax, domain.ay))
    throw ParameterError("simulate_wave: grid spacing must lie in (0, min(semi-axes))");
  if (!(opt.cfl > 0.0) || opt.cfl > 0.5) throw ParameterError("simulate_wave: CFL number must lie in (0, 0.5]");
  const double dt_max = opt.cfl * dx / c0;
  const double dt = opt.dt > 0.0 ? opt.dt : dt_max;
  if (dt > dt_max * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "simulate_wave: dt = " << dt << " violates the stability bound " << dt_max;
    throw ParameterError(msg.str());
  }
  if (opt.record_stride < 1) throw ParameterError("simulate_wave: record stride must be >= 1");
  if (opt.sensors < 8) throw ParameterError("simulate_wave: need at least 8 sensors");
  const double t_final = opt.t_final > 0.0 ? opt.t_final : 2.5 * domain.diameter() / c0;
  const auto n_steps = static_cast<std::size_t>(std::ceil(t_final / dt / opt.record_stride)) * opt.record_stride;

  const Grid grid(domain, dx, opt.min_arm);
  const TriangleLocator locator(source.mesh);
  std::vector<double> v0(grid.size(), 0.0), lap(grid.size(), 0.0);
  grid.for_each_interior([&](int k) {
    const int i = k % grid.nx(), j = k / grid.nx();
    v0[k] = medium.lambda0 * locator.interpolate(source.values, grid.pos(i, j));
  });
  grid.laplacian(v0, lap);
  const double c2 = c0 * c0, r2 = c2 * dt * dt;
  std::vector<double> pm(grid.size(), 0.0), p(grid.size(), 0.0), pn(grid.size(), 0.0);
  // p(0) = 0, p_t(0) = v0: Taylor start to third order.
  grid.for_each_interior([&](int k) { p[k] = dt * v0[k] + dt * dt * dt / 6.0 * c2 * lap[k]; });

  BoundaryRecord rec;
  rec.sensors = ellipse_sensors(domain, opt.sensors);
  rec.medium = medium;
  rec.dt = dt * opt.record_stride;
  rec.steps = n_steps / opt.record_stride + 1;
  rec.samples.assign(rec.sensors.size() * rec.steps, 0.0);
  const double s = 2.0 * dx;
  std::vector<Stencil> near(rec.sensors.size()), far(rec.sensors.size());
  for (std::size_t k = 0; k < rec.sensors.size(); ++k) {
    near[k] = grid.bilinear(rec.sensors[k].position - s * rec.sensors[k].normal);
    far[k] = grid.bilinear(rec.sensors[k].position - 2.0 * s * rec.sensors[k].normal);
  }
  auto record = [&](std::size_t slot, const std::vector<double>& field) {
    for (std::size_t k = 0; k < rec.sensors.size(); ++k)
      rec.at(k, slot) = (-4.0 * eval(near[k], field) + eval(far[k], field)) / (2.0 * s);
  };
  if (diag) {
    diag->energy.clear();
    diag->dt = dt;
    diag->grid_nx = grid.nx();
    diag->grid_ny = grid.ny();
    diag->interior_points = static_cast<int>(grid.interior());
  }
  // Staggered energy 1/2 |(p^{n+1}-p^n)/dt|^2 + c0^2/2 <p^{n+1}, -L p^n>.
  auto energy = [&](const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& lb) {
    double e = 0.0;
    grid.for_each_interior([&](int k) {
      const double v = (b[k] - a[k]) / dt;
      e += 0.5 * v * v - 0.5 * c2 * b[k] * lb[k];
    });
    return e * dx * dx;
  };
  if (diag) {
    grid.laplacian(pm, lap);
    diag->energy.push_back(energy(pm, p, lap));
  }
  if (opt.record_stride == 1) record(1, p);
  for (std::size_t n = 1; n < n_steps; ++n) {
    grid.laplacian(p, lap);
    grid.for_each_interior([&](int k) { pn[k] = 2.0 * p[k] - pm[k] + r2 * lap[k]; });
    if (diag) diag->energy.push_back(energy(p, pn, lap));
    std::swap(pm, p);
    std::swap(p, pn);
    if ((n + 1) % opt.record_stride == 0) record((n + 1) / opt.record_stride, p);
  }
  return rec;
}

void write_record(std::ostream& os, const BoundaryRecord& r) {
  os << "matmi-record v1\n" << std::setprecision(17);
  os << "medium " << r.medium.rho0 << ' ' << r.medium.lambda0 << '\n';
  os << r.sensors.size() << '\n';
  for (const auto& s : r.sensors)
    os << s.position.x << ' ' << s.position.y << ' ' << s.normal.x << ' ' << s.normal.y << ' '
       << s.curvature << ' ' << s.weight << '\n';
  os << r.dt << ' ' << r.steps << '\n';
  for (std::size_t k = 0; k < r.sensors.size(); ++k) {
    for (std::size_t n = 0; n < r.steps; ++n) os << (n ? " " : "") << r.at(k, n);
    os << '\n';
  }
}

BoundaryRecord read_record(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("matmi-record v1", 0) != 0)
    throw DataError("record: missing 'matmi-record v1' header");
  BoundaryRecord r;
  std::getline(is, line);
  std::size_t count = 0;
  if (line.rfind("medium", 0) == 0) {
    std::istringstream ls(line.substr(6));
    ls >> r.medium.rho0 >> r.medium.lambda0;
    if (!ls) throw DataError("record: malformed medium line");
    is >> count;
    std::getline(is, line);
  } else {
    count = std::stoul(line);
  }
  std::vector<Vec2> positions;
  std::vector<Sensor> full;
  for (std::size_t k = 0; k < count; ++k) {
    if (!std::getline(is, line)) throw DataError("record: truncated sensor list");
    std::istringstream ls(line);
    Sensor s;
    ls >> s.position.x >> s.position.y;
    if (!ls) throw DataError("record: malformed sensor line");
    if (ls >> s.normal.x >> s.normal.y >> s.curvature >> s.weight) full.push_back(s);
    positions.push_back(s.position);
  }
  r.sensors = full.size() == count ? full : polygon_sensors(positions);
  is >> r.dt >> r.steps;
  if (!is) throw DataError("record: malformed time line");
  r.samples.resize(count * r.steps);
  for (double& v : r.samples)
    if (!(is >> v)) throw DataError("record: truncated samples");
  r.validate();
  return r;
}

void write_record(const std::string& path, const BoundaryRecord& r) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open '" + path + "' for writing");
  write_record(os, r);
}

BoundaryRecord read_record(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open '" + path + "'");
  return read_record(is);
}

}  // namespace matmi
