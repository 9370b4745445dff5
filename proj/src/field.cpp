#include "matmi/field.hpp"

#include <cmath>

#include "matmi/errors.hpp"

namespace matmi {

namespace {
constexpr std::string_view kScalarNames[] = {"conductivity", "potential", "stream",
                                             "source", "viscosity-potential", "generic"};
constexpr std::string_view kVectorNames[] = {"current", "vector-potential", "orthogonal-field",
                                             "generic"};
}  // namespace

std::string_view to_string(ScalarRole r) { return kScalarNames[static_cast<int>(r)]; }
std::string_view to_string(VectorRole r) { return kVectorNames[static_cast<int>(r)]; }

ScalarRole scalar_role_from_string(std::string_view s) {
  for (int i = 0; i < 6; ++i)
    if (kScalarNames[i] == s) return static_cast<ScalarRole>(i);
  throw ParameterError("unknown scalar role '" + std::string(s) + "'");
}

VectorRole vector_role_from_string(std::string_view s) {
  for (int i = 0; i < 4; ++i)
    if (kVectorNames[i] == s) return static_cast<VectorRole>(i);
  throw ParameterError("unknown vector role '" + std::string(s) + "'");
}

ScalarField::ScalarField(MeshPtr m, ScalarRole r, std::vector<double> v)
    : mesh(std::move(m)), role(r), values(std::move(v)) {
  if (!mesh) throw UsageError("ScalarField: null mesh");
  if (values.size() != mesh->node_count())
    throw UsageError("ScalarField: value count differs from node count");
}

ScalarField::ScalarField(MeshPtr m, ScalarRole r, double constant)
    : ScalarField(m, r, std::vector<double>(m ? m->node_count() : 0, constant)) {}

double ScalarField::at_centroid(std::size_t t) const {
  const auto& tri = mesh->triangles()[t];
  return (values[tri[0]] + values[tri[1]] + values[tri[2]]) / 3.0;
}

VectorField::VectorField(MeshPtr m, VectorRole r, std::vector<Vec2> v)
    : mesh(std::move(m)), role(r), values(std::move(v)) {
  if (!mesh) throw UsageError("VectorField: null mesh");
  if (values.size() != mesh->triangle_count())
    throw UsageError("VectorField: vector count differs from triangle count");
}

void require_same_mesh(const MeshPtr& a, const MeshPtr& b, const char* where) {
  if (a.get() != b.get()) throw UsageError(std::string(where) + ": fields live on different meshes");
}

double integrate(const ScalarField& f) {
  double s = 0.0;
  for (std::size_t t = 0; t < f.mesh->triangle_count(); ++t) s += f.mesh->area(t) * f.at_centroid(t);
  return s;
}

double l2_inner(const ScalarField& a, const ScalarField& b) {
  require_same_mesh(a.mesh, b.mesh, "l2_inner");
  // Exact P1 mass matrix: (A/12) * (sum a_i b_i + sum_i a_i * sum_j b_j).
  double s = 0.0;
  const auto& m = *a.mesh;
  for (std::size_t t = 0; t < m.triangle_count(); ++t) {
    const auto& tri = m.triangles()[t];
    double sa = 0, sb = 0, sab = 0;
    for (int k = 0; k < 3; ++k) {
      sa += a.values[tri[k]];
      sb += b.values[tri[k]];
      sab += a.values[tri[k]] * b.values[tri[k]];
    }
    s += m.area(t) / 12.0 * (sab + sa * sb);
  }
  return s;
}

double l2_norm(const ScalarField& f) { return std::sqrt(std::max(0.0, l2_inner(f, f))); }

double l2_norm(const VectorField& f) {
  double s = 0.0;
  for (std::size_t t = 0; t < f.size(); ++t) s += f.mesh->area(t) * dot(f.values[t], f.values[t]);
  return std::sqrt(s);
}

}  // namespace matmi
