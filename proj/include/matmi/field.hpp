#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "matmi/mesh.hpp"

namespace matmi {

enum class ScalarRole { Conductivity, Potential, Stream, Source, ViscosityPotential, Generic };
enum class VectorRole { Current, VectorPotential, OrthogonalField, Generic };

std::string_view to_string(ScalarRole r);
std::string_view to_string(VectorRole r);
ScalarRole scalar_role_from_string(std::string_view s);
VectorRole vector_role_from_string(std::string_view s);

// P1 nodal scalar.
struct ScalarField {
  MeshPtr mesh;
  ScalarRole role = ScalarRole::Generic;
  std::vector<double> values;

  ScalarField() = default;
  ScalarField(MeshPtr m, ScalarRole r, std::vector<double> v);
  ScalarField(MeshPtr m, ScalarRole r, double constant);
  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  // Value at the centroid of triangle t (mean of its three nodes).
  double at_centroid(std::size_t t) const;
};

// P0 per-triangle 2D vector.
struct VectorField {
  MeshPtr mesh;
  VectorRole role = VectorRole::Generic;
  std::vector<Vec2> values;

  VectorField() = default;
  VectorField(MeshPtr m, VectorRole r, std::vector<Vec2> v);
  std::size_t size() const { return values.size(); }
  const Vec2& operator[](std::size_t t) const { return values[t]; }
  Vec2& operator[](std::size_t t) { return values[t]; }
};

void require_same_mesh(const MeshPtr& a, const MeshPtr& b, const char* where);

// Integral of a P1 field, and L2 norms with the consistent mass matrix.
double integrate(const ScalarField& f);
double l2_norm(const ScalarField& f);
double l2_norm(const VectorField& f);
double l2_inner(const ScalarField& a, const ScalarField& b);

}  // namespace matmi
