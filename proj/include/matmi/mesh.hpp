#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

namespace matmi {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
  Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
};

inline Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
inline Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
inline Vec2 operator*(double s, Vec2 a) { return a *= s; }
inline Vec2 operator*(Vec2 a, double s) { return a *= s; }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
double norm(const Vec2& a);

// Axis-aligned ellipse (x/ax)^2 + (y/ay)^2 < 1 centered at the origin.
struct Ellipse {
  double ax = 1.0;
  double ay = 1.0;

  bool contains(const Vec2& p) const;
  double level(const Vec2& p) const;  // (x/ax)^2 + (y/ay)^2
  Vec2 point(double t) const;         // boundary parametrization
  Vec2 outward_normal(double t) const;
  double curvature(double t) const;
  double perimeter() const;
  double diameter() const { return 2.0 * (ax > ay ? ax : ay); }
  double area() const;
  double distance_to_boundary(const Vec2& p) const;
  // Parameters t_j splitting the boundary into n arcs of equal length.
  std::vector<double> equal_arc_parameters(int n) const;
};

struct BoundaryEdge {
  std::array<int, 2> nodes{};
  Vec2 normal;
};

// Conforming P1 triangulation. Immutable after construction; per-triangle
// geometry (areas, hat-function gradients) is precomputed.
class Mesh {
 public:
  Mesh(std::vector<Vec2> nodes, std::vector<std::array<int, 3>> triangles,
       std::vector<BoundaryEdge> boundary_edges);

  const std::vector<Vec2>& nodes() const { return nodes_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t triangle_count() const { return triangles_.size(); }
  double h() const { return h_; }

  double area(std::size_t t) const { return areas_[t]; }
  const std::vector<double>& areas() const { return areas_; }
  Vec2 centroid(std::size_t t) const;
  // Gradient of the hat function of local vertex k on triangle t.
  const Vec2& hat_gradient(std::size_t t, int k) const { return grads_[3 * t + k]; }
  double total_area() const { return total_area_; }
  bool is_boundary_node(std::size_t i) const { return boundary_node_[i] != 0; }
  // Diagonal of the lumped mass matrix.
  const std::vector<double>& lumped_mass() const { return lumped_; }
  double boundary_length(std::size_t e) const;
  // Node -> incident triangles (CSR layout).
  const std::vector<int>& node_triangle_offsets() const { return n2t_off_; }
  const std::vector<int>& node_triangle_list() const { return n2t_; }
  // Triangle -> edge-adjacent triangles, -1 on the boundary.
  const std::vector<std::array<int, 3>>& triangle_neighbors() const { return tri_nbr_; }
  std::size_t edge_count() const { return edge_count_; }

 private:
  void validate() const;

  std::vector<Vec2> nodes_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<BoundaryEdge> boundary_;
  std::vector<double> areas_;
  std::vector<Vec2> grads_;
  std::vector<char> boundary_node_;
  std::vector<double> lumped_;
  std::vector<int> n2t_off_, n2t_;
  std::vector<std::array<int, 3>> tri_nbr_;
  std::size_t edge_count_ = 0;
  double h_ = 0.0;
  double total_area_ = 0.0;
};

using MeshPtr = std::shared_ptr<const Mesh>;

MeshPtr build_ellipse_mesh(double semi_axis_x, double semi_axis_y, double target_h);

// Bucket-grid point location on a mesh.
class TriangleLocator {
 public:
  explicit TriangleLocator(MeshPtr mesh);

  struct Hit {
    int triangle = -1;
    std::array<double, 3> barycentric{};
  };
  std::optional<Hit> locate(const Vec2& p) const;
  // Like locate, but falls back to the closest triangle (barycentrics
  // clamped) for points slightly outside the polygonal boundary.
  Hit locate_or_nearest(const Vec2& p) const;
  // Linear interpolation of a nodal array.
  double interpolate(const std::vector<double>& nodal, const Vec2& p) const;

 private:
  std::array<double, 3> barycentric(int t, const Vec2& p) const;
  template <class F>
  void for_each_candidate(const Vec2& p, int ring, F&& f) const;

  MeshPtr mesh_;
  double x0_ = 0, y0_ = 0, cell_ = 1;
  int nx_ = 1, ny_ = 1;
  std::vector<int> offsets_, items_;
};

}  // namespace matmi
