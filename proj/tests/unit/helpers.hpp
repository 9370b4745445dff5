#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "matmi/experiments.hpp"

namespace matmi::test {

inline MeshPtr disk(double h) { return build_ellipse_mesh(1.0, 1.0, h); }
inline MeshPtr standard_ellipse(double h) { return build_ellipse_mesh(2.0, 1.0, h); }
inline Ellipse standard_domain() { return {2.0, 1.0}; }

inline ScalarField nodal(const MeshPtr& m, const std::function<double(const Vec2&)>& f,
                         ScalarRole role = ScalarRole::Generic) {
  std::vector<double> v(m->node_count());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(m->nodes()[i]);
  return {m, role, std::move(v)};
}

inline VectorField cellwise(const MeshPtr& m, const std::function<Vec2(const Vec2&)>& f,
                            VectorRole role = VectorRole::Generic) {
  std::vector<Vec2> v(m->triangle_count());
  for (std::size_t t = 0; t < v.size(); ++t) v[t] = f(m->centroid(t));
  return {m, role, std::move(v)};
}

// sqrt(sum_T area_T |v_T - f(centroid_T)|^2)
inline double centroid_error(const VectorField& v, const std::function<Vec2(const Vec2&)>& f) {
  double s = 0.0;
  for (std::size_t t = 0; t < v.size(); ++t) {
    const Vec2 d = v[t] - f(v.mesh->centroid(t));
    s += v.mesh->area(t) * dot(d, d);
  }
  return std::sqrt(s);
}

// L2 error of a nodal field against an analytic function (P1 mass matrix).
inline double nodal_error(const ScalarField& u, const std::function<double(const Vec2&)>& f) {
  ScalarField d = u;
  for (std::size_t i = 0; i < d.size(); ++i) d[i] -= f(u.mesh->nodes()[i]);
  return l2_norm(d);
}

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Smooth random perturbation: sum of a few random Gaussians.
inline ScalarField smooth_random(const MeshPtr& m, std::uint32_t seed, double width = 0.4) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> ux(-1.5, 1.5), uy(-0.7, 0.7), ua(-1.0, 1.0);
  struct G { Vec2 c; double a; };
  std::vector<G> gs;
  for (int k = 0; k < 4; ++k) gs.push_back({{ux(gen), uy(gen)}, ua(gen)});
  return nodal(m, [&](const Vec2& p) {
    double s = 0.0;
    for (const auto& g : gs) {
      const Vec2 d = p - g.c;
      s += g.a * std::exp(-dot(d, d) / (width * width));
    }
    return s;
  });
}

inline double observed_order(double coarse_error, double fine_error) { return std::log2(coarse_error / fine_error); }

}  // namespace matmi::test
