#pragma once

#include <Eigen/Sparse>
#include <vector>

#include "matmi/field.hpp"

namespace matmi {

enum class Constraint { DirichletZero, ZeroMean, None };

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct SparseSystem {
  MeshPtr mesh;
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
  Constraint constraint = Constraint::None;
  // Sum of absolute element contributions to rhs; the reference magnitude
  // for the compatibility check (0: use the l1 norm of rhs).
  double rhs_scale = 0.0;
};

// Symmetric 2x2 coefficient tensor.
struct SymTensor {
  double xx = 0, xy = 0, yy = 0;
  Vec2 apply(const Vec2& v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }
};

// P1 weak form of  div(coeff grad u) = -div(coeff * rhs_flux), i.e.
//   sum_T coeff_T grad u . grad phi = - sum_T coeff_T rhs_flux_T . grad phi.
// Nodal coefficients are averaged to triangle centroids.
SparseSystem assemble_elliptic(const ScalarField& coeff, const VectorField& rhs_flux, Constraint bc);

// General form: per-triangle tensor K_T and flux q_T, weak form
//   sum_T K_T grad u . grad phi = - sum_T q_T . grad phi.
SparseSystem assemble_diffusion(const MeshPtr& mesh, const std::vector<SymTensor>& coeff,
                                const std::vector<Vec2>& flux, Constraint bc);

// Adds the load  int source * phi_i  (consistent mass) to the right-hand side.
void add_source_load(SparseSystem& system, const ScalarField& source);

// Mass matrix (consistent), used for L2 projections.
SparseMatrix mass_matrix(const Mesh& mesh);

enum class SolverMethod { ConjugateGradient, Direct };

struct SolverOptions {
  double tol = 1e-10;
  int max_iterations = 50000;
  SolverMethod method = SolverMethod::ConjugateGradient;
};

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

// Checks the symmetry and (for zero-mean systems) the compatibility invariant.
void validate_system(const SparseSystem& system);

ScalarField solve_spd(const SparseSystem& system, const SolverOptions& options = {},
                      ScalarRole role = ScalarRole::Generic, SolveStats* stats = nullptr);

VectorField gradient(const ScalarField& field);
// curl w = (-d2 w, d1 w)
VectorField curl_scalar(const ScalarField& field);
// Weak curl of a P0 vector field projected on P1:
//   int (curl f) phi = -int f . curl phi + boundary int (f . tau) phi,
// tau the counterclockwise tangent; solved with the consistent mass matrix.
ScalarField curl_vector(const VectorField& field);
// b_i = int f . grad phi_i for every node.
Eigen::VectorXd weak_divergence(const VectorField& field);

}  // namespace matmi
