#include "matmi/fem.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <sstream>

#include "matmi/errors.hpp"

namespace matmi {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void apply_dirichlet(SparseSystem& sys) {
  const Mesh& m = *sys.mesh;
  for (int r = 0; r < sys.matrix.outerSize(); ++r) {
    const bool rb = m.is_boundary_node(r);
    for (SparseMatrix::InnerIterator it(sys.matrix, r); it; ++it) {
      const bool cb = m.is_boundary_node(it.col());
      if (rb || cb) it.valueRef() = (it.col() == r) ? 1.0 : 0.0;
    }
    if (rb) sys.rhs[r] = 0.0;
  }
}

}  // namespace

SparseSystem assemble_diffusion(const MeshPtr& mesh, const std::vector<SymTensor>& coeff,
                                const std::vector<Vec2>& flux, Constraint bc) {
  const Mesh& m = *mesh;
  const std::size_t nt = m.triangle_count(), nn = m.node_count();
  if (coeff.size() != nt || flux.size() != nt)
    throw UsageError("assemble_diffusion: per-triangle data size mismatch");
  Triplets trip;
  trip.reserve(9 * nt);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nn));
  double scale = 0.0;
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& K = coeff[t];
    if (!(K.xx > 0.0) || !(K.xx * K.yy - K.xy * K.xy > 0.0))
      throw ModelError("assemble: coefficient not positive definite on a triangle");
    const auto& tri = m.triangles()[t];
    const double a = m.area(t);
    for (int i = 0; i < 3; ++i) {
      const Vec2& gi = m.hat_gradient(t, i);
      const Vec2 kgi = K.apply(gi);
      const double c = a * dot(flux[t], gi);
      rhs[tri[i]] -= c;
      scale += std::abs(c);
      for (int j = 0; j < 3; ++j) trip.emplace_back(tri[i], tri[j], a * dot(kgi, m.hat_gradient(t, j)));
    }
  }
  SparseSystem sys;
  sys.mesh = mesh;
  sys.matrix.resize(static_cast<Eigen::Index>(nn), static_cast<Eigen::Index>(nn));
  sys.matrix.setFromTriplets(trip.begin(), trip.end());
  sys.matrix.makeCompressed();
  sys.rhs = std::move(rhs);
  sys.constraint = bc;
  sys.rhs_scale = scale;
  if (bc == Constraint::DirichletZero) apply_dirichlet(sys);
  return sys;
}

SparseSystem assemble_elliptic(const ScalarField& coeff, const VectorField& rhs_flux, Constraint bc) {
  require_same_mesh(coeff.mesh, rhs_flux.mesh, "assemble_elliptic");
  const std::size_t nt = coeff.mesh->triangle_count();
  for (double v : coeff.values)
    if (!(v > 0.0)) throw ModelError("assemble_elliptic: coefficient must be strictly positive");
  std::vector<SymTensor> K(nt);
  std::vector<Vec2> q(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    const double c = coeff.at_centroid(t);
    K[t] = {c, 0.0, c};
    q[t] = c * rhs_flux[t];
  }
  return assemble_diffusion(coeff.mesh, K, q, bc);
}

void add_source_load(SparseSystem& sys, const ScalarField& source) {
  require_same_mesh(sys.mesh, source.mesh, "add_source_load");
  const Mesh& m = *sys.mesh;
  for (std::size_t t = 0; t < m.triangle_count(); ++t) {
    const auto& tri = m.triangles()[t];
    const double s = source[tri[0]] + source[tri[1]] + source[tri[2]];
    for (int k = 0; k < 3; ++k) {
      const double c = m.area(t) / 12.0 * (source[tri[k]] + s);
      sys.rhs[tri[k]] += c;
      sys.rhs_scale += std::abs(c);
    }
  }
  if (sys.constraint == Constraint::DirichletZero)
    for (std::size_t i = 0; i < m.node_count(); ++i)
      if (m.is_boundary_node(i)) sys.rhs[static_cast<Eigen::Index>(i)] = 0.0;
}

SparseMatrix mass_matrix(const Mesh& m) {
  Triplets trip;
  trip.reserve(9 * m.triangle_count());
  for (std::size_t t = 0; t < m.triangle_count(); ++t) {
    const auto& tri = m.triangles()[t];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trip.emplace_back(tri[i], tri[j], m.area(t) / (i == j ? 6.0 : 12.0));
  }
  const auto n = static_cast<Eigen::Index>(m.node_count());
  SparseMatrix M(n, n);
  M.setFromTriplets(trip.begin(), trip.end());
  M.makeCompressed();
  return M;
}

void validate_system(const SparseSystem& sys) {
  const SparseMatrix& A = sys.matrix;
  if (A.rows() != A.cols() || A.rows() != sys.rhs.size())
    throw UsageError("solve_spd: dimension mismatch");
  auto max_abs = [](const SparseMatrix& m) {
    double v = 0.0;
    for (int r = 0; r < m.outerSize(); ++r)
      for (SparseMatrix::InnerIterator it(m, r); it; ++it) v = std::max(v, std::abs(it.value()));
    return v;
  };
  const SparseMatrix asym = SparseMatrix(A.transpose()) - A;
  if (max_abs(asym) > 1e-12 * max_abs(A))
    throw UsageError("solve_spd: matrix is not symmetric");
  if (sys.constraint == Constraint::ZeroMean) {
    const double s = sys.rhs.sum(), a = std::max(sys.rhs_scale, sys.rhs.cwiseAbs().sum());
    if (std::abs(s) > 1e-10 * a)
      throw DataError("solve_spd: right-hand side violates the zero-mean compatibility condition");
  }
}

namespace {

void project_out_constants(Eigen::VectorXd& v) { v.array() -= v.mean(); }

Eigen::VectorXd pcg(const SparseSystem& sys, const SolverOptions& opt, SolveStats& stats) {
  const SparseMatrix& A = sys.matrix;
  const bool project = sys.constraint == Constraint::ZeroMean;
  const Eigen::Index n = A.rows();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r = sys.rhs;
  if (project) project_out_constants(r);
  const double bnorm = r.norm();
  if (bnorm == 0.0) return x;
  Eigen::VectorXd dinv = A.diagonal().cwiseInverse();
  Eigen::VectorXd z = dinv.cwiseProduct(r);
  if (project) project_out_constants(z);
  Eigen::VectorXd p = z, Ap(n);
  double rz = r.dot(z);
  int it = 0;
  double res = 1.0;
  for (; it < opt.max_iterations; ++it) {
    Ap.noalias() = A * p;
    const double alpha = rz / p.dot(Ap);
    x.noalias() += alpha * p;
    r.noalias() -= alpha * Ap;
    if (project) project_out_constants(r);
    res = r.norm() / bnorm;
    if (res <= opt.tol) { ++it; break; }
    z = dinv.cwiseProduct(r);
    if (project) project_out_constants(z);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  stats.iterations = it;
  // Report the true residual, not the recursively updated one.
  Eigen::VectorXd rt = sys.rhs - A * x;
  if (project) project_out_constants(rt);
  stats.relative_residual = rt.norm() / bnorm;
  if (!(res <= opt.tol)) {
    std::ostringstream msg;
    msg << "conjugate gradient did not converge: relative residual " << stats.relative_residual
        << " after " << it << " iterations";
    throw SolverError(msg.str(), stats.relative_residual, it);
  }
  return x;
}

Eigen::VectorXd direct(const SparseSystem& sys, SolveStats& stats) {
  Eigen::SparseMatrix<double> A = sys.matrix;
  Eigen::VectorXd b = sys.rhs;
  if (sys.constraint == Constraint::ZeroMean) {
    // Pin node 0; the compatible right-hand side makes the shift harmless.
    b.array() -= b.mean();
    for (Eigen::Index c = 0; c < A.outerSize(); ++c)
      for (Eigen::SparseMatrix<double>::InnerIterator it(A, c); it; ++it)
        if (it.row() == 0 || it.col() == 0) it.valueRef() = (it.row() == it.col()) ? 1.0 : 0.0;
    b[0] = 0.0;
  }
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
  if (ldlt.info() != Eigen::Success) throw SolverError("direct factorization failed", 1.0, 0);
  Eigen::VectorXd x = ldlt.solve(b);
  Eigen::VectorXd r = sys.rhs - sys.matrix * x;
  if (sys.constraint == Constraint::ZeroMean) project_out_constants(r);
  const double bn = sys.rhs.norm();
  stats.iterations = 1;
  stats.relative_residual = bn > 0 ? r.norm() / bn : 0.0;
  return x;
}

}  // namespace

ScalarField solve_spd(const SparseSystem& sys, const SolverOptions& opt, ScalarRole role, SolveStats* stats_out) {
  validate_system(sys);
  SolveStats stats;
  Eigen::VectorXd x = opt.method == SolverMethod::Direct ? direct(sys, stats) : pcg(sys, opt, stats);
  if (opt.method == SolverMethod::Direct && !(stats.relative_residual <= std::max(opt.tol, 1e-8)))
    throw SolverError("direct solve residual above tolerance", stats.relative_residual, 1);
  ScalarField out(sys.mesh, role, std::vector<double>(x.data(), x.data() + x.size()));
  if (sys.constraint == Constraint::ZeroMean) {
    const double shift = integrate(out) / sys.mesh->total_area();
    for (double& v : out.values) v -= shift;
  }
  if (stats_out) *stats_out = stats;
  return out;
}

VectorField gradient(const ScalarField& f) {
  const Mesh& m = *f.mesh;
  std::vector<Vec2> g(m.triangle_count());
  for (std::size_t t = 0; t < m.triangle_count(); ++t) {
    const auto& tri = m.triangles()[t];
    Vec2 s{};
    for (int k = 0; k < 3; ++k) s += f[tri[k]] * m.hat_gradient(t, k);
    g[t] = s;
  }
  return {f.mesh, VectorRole::Generic, std::move(g)};
}

VectorField curl_scalar(const ScalarField& f) {
  VectorField g = gradient(f);
  for (auto& v : g.values) v = {-v.y, v.x};
  return g;
}

ScalarField curl_vector(const VectorField& f) {
  const Mesh& m = *f.mesh;
  SparseSystem sys;
  sys.mesh = f.mesh;
  sys.matrix = mass_matrix(m);
  sys.rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.node_count()));
  sys.constraint = Constraint::None;
  for (std::size_t t = 0; t < m.triangle_count(); ++t) {
    const auto& tri = m.triangles()[t];
    for (int k = 0; k < 3; ++k) {
      const Vec2& g = m.hat_gradient(t, k);
      sys.rhs[tri[k]] -= m.area(t) * dot(f[t], Vec2{-g.y, g.x});
    }
  }
  const auto& nbr = m.triangle_neighbors();
  for (std::size_t t = 0; t < m.triangle_count(); ++t) {
    const auto& tri = m.triangles()[t];
    for (int k = 0; k < 3; ++k) {
      if (nbr[t][k] >= 0) continue;
      // Edge opposite local vertex k, traversed counterclockwise.
      const int i = tri[(k + 1) % 3], j = tri[(k + 2) % 3];
      const Vec2 tau = m.nodes()[j] - m.nodes()[i];  // length-weighted tangent
      const double flux = dot(f[t], tau);
      sys.rhs[i] += 0.5 * flux;
      sys.rhs[j] += 0.5 * flux;
    }
  }
  return solve_spd(sys, SolverOptions{1e-13, 50000, SolverMethod::ConjugateGradient}, ScalarRole::Generic);
}

Eigen::VectorXd weak_divergence(const VectorField& f) {
  const Mesh& m = *f.mesh;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.node_count()));
  for (std::size_t t = 0; t < m.triangle_count(); ++t) {
    const auto& tri = m.triangles()[t];
    for (int k = 0; k < 3; ++k) b[tri[k]] += m.area(t) * dot(f[t], m.hat_gradient(t, k));
  }
  return b;
}

}  // namespace matmi
