#include "matmi/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "matmi/errors.hpp"

namespace matmi {

namespace {

void expect_header(std::istream& is, const std::string& header) {
  std::string line;
  if (!std::getline(is, line) || line.rfind(header, 0) != 0)
    throw DataError("expected '" + header + "' header");
}

template <class T>
T read_value(std::istream& is, const char* what) {
  T v{};
  if (!(is >> v)) throw DataError(std::string("malformed or truncated ") + what);
  return v;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open '" + path + "' for writing");
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open '" + path + "'");
  return is;
}

}  // namespace

void write_mesh(std::ostream& os, const Mesh& m) {
  os << "matmi-mesh v1\n" << std::setprecision(17);
  os << m.node_count() << '\n';
  for (const auto& p : m.nodes()) os << p.x << ' ' << p.y << '\n';
  os << m.triangle_count() << '\n';
  for (const auto& t : m.triangles()) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  os << m.boundary_edges().size() << '\n';
  for (const auto& e : m.boundary_edges())
    os << e.nodes[0] << ' ' << e.nodes[1] << ' ' << e.normal.x << ' ' << e.normal.y << '\n';
}

MeshPtr read_mesh(std::istream& is) {
  expect_header(is, "matmi-mesh v1");
  const auto nn = read_value<std::size_t>(is, "node count");
  std::vector<Vec2> x(nn);
  for (auto& p : x) {
    p.x = read_value<double>(is, "node");
    p.y = read_value<double>(is, "node");
  }
  const auto nt = read_value<std::size_t>(is, "triangle count");
  std::vector<std::array<int, 3>> tris(nt);
  for (auto& t : tris)
    for (int& v : t) v = read_value<int>(is, "triangle");
  const auto nb = read_value<std::size_t>(is, "boundary edge count");
  std::vector<BoundaryEdge> edges(nb);
  for (auto& e : edges) {
    e.nodes[0] = read_value<int>(is, "boundary edge");
    e.nodes[1] = read_value<int>(is, "boundary edge");
    e.normal.x = read_value<double>(is, "boundary normal");
    e.normal.y = read_value<double>(is, "boundary normal");
  }
  return std::make_shared<const Mesh>(std::move(x), std::move(tris), std::move(edges));
}

void write_mesh(const std::string& path, const Mesh& m) {
  auto os = open_out(path);
  write_mesh(os, m);
}

MeshPtr read_mesh(const std::string& path) {
  auto is = open_in(path);
  return read_mesh(is);
}

void write_field(std::ostream& os, const ScalarField& f) {
  os << "matmi-field v1\n" << to_string(f.role) << '\n' << f.size() << '\n' << std::setprecision(17);
  for (double v : f.values) os << v << '\n';
}

void write_field(std::ostream& os, const VectorField& f) {
  os << "matmi-field v1\n" << to_string(f.role) << '\n' << f.size() << '\n' << std::setprecision(17);
  for (const auto& v : f.values) os << v.x << ' ' << v.y << '\n';
}

void write_field(const std::string& path, const ScalarField& f) {
  auto os = open_out(path);
  write_field(os, f);
}

void write_field(const std::string& path, const VectorField& f) {
  auto os = open_out(path);
  write_field(os, f);
}

ScalarField read_scalar_field(std::istream& is, const MeshPtr& mesh) {
  expect_header(is, "matmi-field v1");
  const auto role = scalar_role_from_string(read_value<std::string>(is, "role tag"));
  const auto n = read_value<std::size_t>(is, "value count");
  if (n != mesh->node_count()) throw DataError("field: value count differs from mesh node count");
  std::vector<double> v(n);
  for (double& x : v) x = read_value<double>(is, "field value");
  return {mesh, role, std::move(v)};
}

VectorField read_vector_field(std::istream& is, const MeshPtr& mesh) {
  expect_header(is, "matmi-field v1");
  const auto role = vector_role_from_string(read_value<std::string>(is, "role tag"));
  const auto n = read_value<std::size_t>(is, "vector count");
  if (n != mesh->triangle_count()) throw DataError("field: vector count differs from mesh triangle count");
  std::vector<Vec2> v(n);
  for (auto& x : v) {
    x.x = read_value<double>(is, "field vector");
    x.y = read_value<double>(is, "field vector");
  }
  return {mesh, role, std::move(v)};
}

ScalarField read_scalar_field(const std::string& path, const MeshPtr& mesh) {
  auto is = open_in(path);
  return read_scalar_field(is, mesh);
}

VectorField read_vector_field(const std::string& path, const MeshPtr& mesh) {
  auto is = open_in(path);
  return read_vector_field(is, mesh);
}

}  // namespace matmi
