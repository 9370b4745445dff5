#pragma once

#include <iosfwd>
#include <string>

#include "matmi/field.hpp"

namespace matmi {

void write_mesh(std::ostream& os, const Mesh& mesh);
MeshPtr read_mesh(std::istream& is);
void write_mesh(const std::string& path, const Mesh& mesh);
MeshPtr read_mesh(const std::string& path);

void write_field(std::ostream& os, const ScalarField& field);
void write_field(std::ostream& os, const VectorField& field);
void write_field(const std::string& path, const ScalarField& field);
void write_field(const std::string& path, const VectorField& field);

ScalarField read_scalar_field(std::istream& is, const MeshPtr& mesh);
VectorField read_vector_field(std::istream& is, const MeshPtr& mesh);
ScalarField read_scalar_field(const std::string& path, const MeshPtr& mesh);
VectorField read_vector_field(const std::string& path, const MeshPtr& mesh);

}  // namespace matmi
