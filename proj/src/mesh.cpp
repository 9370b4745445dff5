#include "matmi/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "matmi/errors.hpp"

namespace matmi {

double norm(const Vec2& a) { return std::hypot(a.x, a.y); }

bool Ellipse::contains(const Vec2& p) const { return level(p) < 1.0; }

double Ellipse::level(const Vec2& p) const {
  const double u = p.x / ax, v = p.y / ay;
  return u * u + v * v;
}

Vec2 Ellipse::point(double t) const { return {ax * std::cos(t), ay * std::sin(t)}; }

Vec2 Ellipse::outward_normal(double t) const {
  Vec2 n{ay * std::cos(t), ax * std::sin(t)};
  return (1.0 / norm(n)) * n;
}

double Ellipse::curvature(double t) const {
  const double s = std::sin(t), c = std::cos(t);
  const double d = ax * ax * s * s + ay * ay * c * c;
  return ax * ay / (d * std::sqrt(d));
}

double Ellipse::area() const { return std::numbers::pi * ax * ay; }

namespace {

// Cumulative arc length on a uniform t grid, composite Simpson per cell.
struct ArcTable {
  std::vector<double> t, s;
};

ArcTable arc_table(const Ellipse& e, int cells) {
  auto speed = [&](double t) {
    return std::hypot(e.ax * std::sin(t), e.ay * std::cos(t));
  };
  ArcTable tab;
  tab.t.resize(cells + 1);
  tab.s.resize(cells + 1);
  const double dt = 2.0 * std::numbers::pi / cells;
  tab.s[0] = 0.0;
  for (int i = 0; i <= cells; ++i) tab.t[i] = i * dt;
  for (int i = 0; i < cells; ++i) {
    const double a = tab.t[i], b = tab.t[i + 1];
    tab.s[i + 1] = tab.s[i] + dt / 6.0 * (speed(a) + 4.0 * speed(0.5 * (a + b)) + speed(b));
  }
  return tab;
}

}  // namespace

double Ellipse::perimeter() const {
  return arc_table(*this, 4096).s.back();
}

std::vector<double> Ellipse::equal_arc_parameters(int n) const {
  if (n < 3) throw ParameterError("equal_arc_parameters: need at least 3 points");
  const int cells = std::max(4096, 16 * n);
  const ArcTable tab = arc_table(*this, cells);
  auto speed = [&](double t) { return std::hypot(ax * std::sin(t), ay * std::cos(t)); };
  const double total = tab.s.back();
  std::vector<double> out(n);
  std::size_t cell = 0;
  for (int j = 0; j < n; ++j) {
    const double target = total * j / n;
    while (cell + 1 < tab.s.size() - 1 && tab.s[cell + 1] < target) ++cell;
    // Newton on s(t) = target starting from the linear guess inside the cell.
    const double s0 = tab.s[cell], s1 = tab.s[cell + 1];
    double t = tab.t[cell] + (tab.t[cell + 1] - tab.t[cell]) * (target - s0) / (s1 - s0);
    for (int it = 0; it < 4; ++it) {
      // Arc length from tab.t[cell] to t by 4-point Gauss-Legendre.
      const double a = tab.t[cell], half = 0.5 * (t - a), mid = 0.5 * (t + a);
      static constexpr double gx[4] = {-0.8611363115940526, -0.3399810435848563,
                                       0.3399810435848563, 0.8611363115940526};
      static constexpr double gw[4] = {0.3478548451374538, 0.6521451548625461,
                                       0.6521451548625461, 0.3478548451374538};
      double s = s0;
      for (int q = 0; q < 4; ++q) s += half * gw[q] * speed(mid + half * gx[q]);
      t -= (s - target) / speed(t);
    }
    out[j] = t;
  }
  return out;
}

double Ellipse::distance_to_boundary(const Vec2& p) const {
  constexpr int samples = 2048;
  double best = 1e300, best_t = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double t = 2.0 * std::numbers::pi * i / samples;
    const double d = norm(point(t) - p);
    if (d < best) { best = d; best_t = t; }
  }
  // Golden-section refinement around the best sample.
  const double step = 2.0 * std::numbers::pi / samples;
  double lo = best_t - step, hi = best_t + step;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 60; ++it) {
    const double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
    if (norm(point(m1) - p) < norm(point(m2) - p)) hi = m2; else lo = m1;
  }
  return std::min(best, norm(point(0.5 * (lo + hi)) - p));
}

Mesh::Mesh(std::vector<Vec2> nodes, std::vector<std::array<int, 3>> triangles,
           std::vector<BoundaryEdge> boundary_edges)
    : nodes_(std::move(nodes)), triangles_(std::move(triangles)),
      boundary_(std::move(boundary_edges)) {
  const std::size_t nt = triangles_.size(), nn = nodes_.size();
  if (nn < 3 || nt < 1) throw ParameterError("mesh: empty");
  areas_.resize(nt);
  grads_.resize(3 * nt);
  lumped_.assign(nn, 0.0);
  std::map<std::pair<int, int>, std::pair<int, int>> edges;  // edge -> (tri, local)
  tri_nbr_.assign(nt, {-1, -1, -1});
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& tri = triangles_[t];
    for (int k = 0; k < 3; ++k)
      if (tri[k] < 0 || static_cast<std::size_t>(tri[k]) >= nn)
        throw ParameterError("mesh: triangle references missing node");
    const Vec2 &a = nodes_[tri[0]], &b = nodes_[tri[1]], &c = nodes_[tri[2]];
    const double det = cross(b - a, c - a);
    if (!(det > 0.0)) {
      std::ostringstream msg;
      msg << "mesh: triangle " << t << " has nonpositive signed area";
      throw ParameterError(msg.str());
    }
    areas_[t] = 0.5 * det;
    total_area_ += areas_[t];
    for (int k = 0; k < 3; ++k) {
      // grad phi_k = rot90(opposite edge) / (2 area)
      const Vec2& p = nodes_[tri[(k + 1) % 3]];
      const Vec2& q = nodes_[tri[(k + 2) % 3]];
      grads_[3 * t + k] = {(p.y - q.y) / det, (q.x - p.x) / det};
      lumped_[tri[k]] += areas_[t] / 3.0;
      const int i = tri[(k + 1) % 3], j = tri[(k + 2) % 3];
      h_ = std::max(h_, norm(nodes_[i] - nodes_[j]));
      auto key = std::minmax(i, j);
      auto it = edges.find(key);
      if (it == edges.end()) {
        edges.emplace(key, std::make_pair(static_cast<int>(t), k));
      } else {
        tri_nbr_[t][k] = it->second.first;
        tri_nbr_[it->second.first][it->second.second] = static_cast<int>(t);
      }
    }
  }
  edge_count_ = edges.size();
  boundary_node_.assign(nn, 0);
  for (const auto& e : boundary_) {
    boundary_node_[e.nodes[0]] = 1;
    boundary_node_[e.nodes[1]] = 1;
  }
  n2t_off_.assign(nn + 1, 0);
  for (const auto& tri : triangles_)
    for (int v : tri) ++n2t_off_[v + 1];
  for (std::size_t i = 0; i < nn; ++i) n2t_off_[i + 1] += n2t_off_[i];
  n2t_.resize(n2t_off_[nn]);
  std::vector<int> fill(n2t_off_.begin(), n2t_off_.end() - 1);
  for (std::size_t t = 0; t < nt; ++t)
    for (int v : triangles_[t]) n2t_[fill[v]++] = static_cast<int>(t);
  validate();
}

void Mesh::validate() const {
  if (boundary_.empty()) throw ParameterError("mesh: no boundary edges");
  // Single closed loop: every boundary node has one outgoing edge, and
  // following them visits all edges once.
  std::map<int, int> next;
  for (std::size_t e = 0; e < boundary_.size(); ++e) {
    if (!next.emplace(boundary_[e].nodes[0], static_cast<int>(e)).second)
      throw ParameterError("mesh: boundary node with two outgoing edges");
    if (std::abs(norm(boundary_[e].normal) - 1.0) > 1e-12)
      throw ParameterError("mesh: boundary normal not unit length");
  }
  int start = boundary_[0].nodes[0], cur = start;
  std::size_t steps = 0;
  do {
    auto it = next.find(cur);
    if (it == next.end()) throw ParameterError("mesh: boundary loop is open");
    cur = boundary_[it->second].nodes[1];
    ++steps;
  } while (cur != start && steps <= boundary_.size());
  if (cur != start || steps != boundary_.size())
    throw ParameterError("mesh: boundary edges do not form a single closed loop");
  Vec2 c{};
  for (std::size_t t = 0; t < triangles_.size(); ++t) c += areas_[t] * centroid(t);
  c *= 1.0 / total_area_;
  for (const auto& e : boundary_) {
    const Vec2 mid = 0.5 * (nodes_[e.nodes[0]] + nodes_[e.nodes[1]]);
    if (dot(e.normal, mid - c) <= 0.0) throw ParameterError("mesh: inward boundary normal");
  }
  // Every mesh edge seen once must be a boundary edge.
  const std::size_t interior = 3 * triangles_.size() - edge_count_;
  if (edge_count_ - interior != boundary_.size())
    throw ParameterError("mesh: boundary edges do not match the triangulation");
}

Vec2 Mesh::centroid(std::size_t t) const {
  const auto& tri = triangles_[t];
  return (1.0 / 3.0) * (nodes_[tri[0]] + nodes_[tri[1]] + nodes_[tri[2]]);
}

double Mesh::boundary_length(std::size_t e) const {
  return norm(nodes_[boundary_[e].nodes[1]] - nodes_[boundary_[e].nodes[0]]);
}

namespace {

double angle_at(const Vec2& apex, const Vec2& p, const Vec2& q) {
  const Vec2 u = p - apex, v = q - apex;
  return std::atan2(std::abs(cross(u, v)), dot(u, v));
}

void push_ccw(std::vector<std::array<int, 3>>& tris, const std::vector<Vec2>& x,
              int a, int b, int c) {
  if (cross(x[b] - x[a], x[c] - x[a]) < 0.0) std::swap(b, c);
  tris.push_back({a, b, c});
}

}  // namespace

MeshPtr build_ellipse_mesh(double ax, double ay, double target_h) {
  if (!(ax > 0.0) || !(ay > 0.0) || !std::isfinite(ax) || !std::isfinite(ay))
    throw ParameterError("build_ellipse_mesh: semi-axes must be positive");
  if (!(target_h > 0.0) || target_h >= std::min(ax, ay))
    throw ParameterError("build_ellipse_mesh: target_h must lie in (0, min(semi-axes))");
  const Ellipse ell{ax, ay};
  // Nominal spacing chosen so the node density matches an equilateral mesh
  // with edge target_h while keeping the longest diagonal below 1.5 h.
  const double delta = 0.658 * target_h;
  const double radial = std::max(std::sqrt(ax * ay), std::max(ax, ay) / 1.4);
  const int rings = std::max(1, static_cast<int>(std::ceil(radial / delta)));
  const double perimeter = ell.perimeter();

  std::vector<int> count(rings + 1, 1);
  int m = 6;
  for (int k = 1; k <= rings; ++k) {
    const double target = perimeter * k / rings / delta;
    while (target > m * std::numbers::sqrt2) m *= 2;
    count[k] = m;
  }
  std::map<int, std::vector<double>> params;
  for (int k = 1; k <= rings; ++k)
    if (!params.count(count[k])) params[count[k]] = ell.equal_arc_parameters(count[k]);

  std::vector<Vec2> x{{0.0, 0.0}};
  std::vector<int> first(rings + 1, 0);
  for (int k = 1; k <= rings; ++k) {
    first[k] = static_cast<int>(x.size());
    const double s = static_cast<double>(k) / rings;
    for (double t : params[count[k]]) {
      const Vec2 p = ell.point(t);
      x.push_back(k == rings ? p : s * p);
    }
  }
  std::vector<std::array<int, 3>> tris;
  auto node = [&](int k, int j) { return first[k] + ((j % count[k]) + count[k]) % count[k]; };
  for (int j = 0; j < count[1]; ++j) push_ccw(tris, x, 0, node(1, j), node(1, j + 1));
  for (int k = 1; k < rings; ++k) {
    const int mi = count[k], mo = count[k + 1];
    if (mo == mi) {
      for (int j = 0; j < mi; ++j) {
        const int a = node(k, j), b = node(k, j + 1), c = node(k + 1, j + 1), d = node(k + 1, j);
        // Alternating diagonals; take the other one only when the default
        // pair is strictly non-Delaunay (opposite angles sum above pi).
        bool diag_ac = (j % 2 == 0);
        const double sum_ac = angle_at(x[b], x[a], x[c]) + angle_at(x[d], x[a], x[c]);
        const double sum_bd = angle_at(x[a], x[b], x[d]) + angle_at(x[c], x[b], x[d]);
        constexpr double tol = 1e-9;
        if (diag_ac && sum_ac > std::numbers::pi + tol) diag_ac = false;
        else if (!diag_ac && sum_bd > std::numbers::pi + tol) diag_ac = true;
        if (diag_ac) {
          push_ccw(tris, x, a, b, c);
          push_ccw(tris, x, a, c, d);
        } else {
          push_ccw(tris, x, a, b, d);
          push_ccw(tris, x, b, c, d);
        }
      }
    } else {
      if (mo != 2 * mi) throw ParameterError("build_ellipse_mesh: ring counts must double");
      for (int j = 0; j < mi; ++j) {
        const int a = node(k, j), b = node(k, j + 1);
        const int o0 = node(k + 1, 2 * j), o1 = node(k + 1, 2 * j + 1), o2 = node(k + 1, 2 * j + 2);
        push_ccw(tris, x, a, o0, o1);
        push_ccw(tris, x, a, o1, b);
        push_ccw(tris, x, b, o1, o2);
      }
    }
  }
  std::vector<BoundaryEdge> boundary;
  for (int j = 0; j < count[rings]; ++j) {
    const int i0 = node(rings, j), i1 = node(rings, j + 1);
    const Vec2 d = x[i1] - x[i0];
    boundary.push_back({{i0, i1}, (1.0 / norm(d)) * Vec2{d.y, -d.x}});
  }
  return std::make_shared<const Mesh>(std::move(x), std::move(tris), std::move(boundary));
}

TriangleLocator::TriangleLocator(MeshPtr mesh) : mesh_(std::move(mesh)) {
  const auto& x = mesh_->nodes();
  double x1 = -1e300, y1 = -1e300;
  x0_ = y0_ = 1e300;
  for (const auto& p : x) {
    x0_ = std::min(x0_, p.x); y0_ = std::min(y0_, p.y);
    x1 = std::max(x1, p.x); y1 = std::max(y1, p.y);
  }
  cell_ = std::max(mesh_->h(), 1e-12);
  nx_ = static_cast<int>((x1 - x0_) / cell_) + 1;
  ny_ = static_cast<int>((y1 - y0_) / cell_) + 1;
  std::vector<std::vector<int>> buckets(static_cast<std::size_t>(nx_) * ny_);
  for (std::size_t t = 0; t < mesh_->triangle_count(); ++t) {
    double bx0 = 1e300, by0 = 1e300, bx1 = -1e300, by1 = -1e300;
    for (int v : mesh_->triangles()[t]) {
      bx0 = std::min(bx0, x[v].x); by0 = std::min(by0, x[v].y);
      bx1 = std::max(bx1, x[v].x); by1 = std::max(by1, x[v].y);
    }
    const int i0 = std::clamp(static_cast<int>((bx0 - x0_) / cell_), 0, nx_ - 1);
    const int i1 = std::clamp(static_cast<int>((bx1 - x0_) / cell_), 0, nx_ - 1);
    const int j0 = std::clamp(static_cast<int>((by0 - y0_) / cell_), 0, ny_ - 1);
    const int j1 = std::clamp(static_cast<int>((by1 - y0_) / cell_), 0, ny_ - 1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) buckets[j * nx_ + i].push_back(static_cast<int>(t));
  }
  offsets_.assign(buckets.size() + 1, 0);
  for (std::size_t b = 0; b < buckets.size(); ++b)
    offsets_[b + 1] = offsets_[b] + static_cast<int>(buckets[b].size());
  items_.reserve(offsets_.back());
  for (const auto& b : buckets) items_.insert(items_.end(), b.begin(), b.end());
}

std::array<double, 3> TriangleLocator::barycentric(int t, const Vec2& p) const {
  const auto& tri = mesh_->triangles()[t];
  const auto& x = mesh_->nodes();
  const double inv = 1.0 / (2.0 * mesh_->area(t));
  const double l1 = cross(x[tri[2]] - x[tri[1]], p - x[tri[1]]) * inv;
  const double l2 = cross(x[tri[0]] - x[tri[2]], p - x[tri[2]]) * inv;
  return {l1, l2, 1.0 - l1 - l2};
}

template <class F>
void TriangleLocator::for_each_candidate(const Vec2& p, int ring, F&& f) const {
  const int ci = static_cast<int>(std::floor((p.x - x0_) / cell_));
  const int cj = static_cast<int>(std::floor((p.y - y0_) / cell_));
  for (int j = cj - ring; j <= cj + ring; ++j) {
    if (j < 0 || j >= ny_) continue;
    for (int i = ci - ring; i <= ci + ring; ++i) {
      if (i < 0 || i >= nx_) continue;
      if (std::max(std::abs(i - ci), std::abs(j - cj)) != ring) continue;
      const int b = j * nx_ + i;
      for (int k = offsets_[b]; k < offsets_[b + 1]; ++k) f(items_[k]);
    }
  }
}

std::optional<TriangleLocator::Hit> TriangleLocator::locate(const Vec2& p) const {
  std::optional<Hit> hit;
  constexpr double eps = -1e-12;
  for_each_candidate(p, 0, [&](int t) {
    if (hit) return;
    const auto l = barycentric(t, p);
    if (l[0] >= eps && l[1] >= eps && l[2] >= eps) hit = Hit{t, l};
  });
  return hit;
}

TriangleLocator::Hit TriangleLocator::locate_or_nearest(const Vec2& p) const {
  if (auto hit = locate(p)) return *hit;
  Hit best;
  double best_violation = 1e300;
  const int max_ring = std::max(nx_, ny_);
  for (int ring = 0; ring <= max_ring; ++ring) {
    for_each_candidate(p, ring, [&](int t) {
      const auto l = barycentric(t, p);
      const double v = -std::min({l[0], l[1], l[2], 0.0});
      if (v < best_violation) { best_violation = v; best = Hit{t, l}; }
    });
    if (best.triangle >= 0 && ring >= 1) break;
  }
  if (best.triangle < 0) throw UsageError("TriangleLocator: no triangle near point");
  auto& l = best.barycentric;
  for (double& v : l) v = std::max(v, 0.0);
  const double s = l[0] + l[1] + l[2];
  for (double& v : l) v /= s;
  return best;
}

double TriangleLocator::interpolate(const std::vector<double>& nodal, const Vec2& p) const {
  const Hit hit = locate_or_nearest(p);
  const auto& tri = mesh_->triangles()[hit.triangle];
  return hit.barycentric[0] * nodal[tri[0]] + hit.barycentric[1] * nodal[tri[1]] +
         hit.barycentric[2] * nodal[tri[2]];
}

}  // namespace matmi
