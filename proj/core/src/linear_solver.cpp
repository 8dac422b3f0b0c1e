#include "ddsim/linear_solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "ddsim/error.hpp"

namespace ddsim {

namespace {

/// b - A x accumulated in extended precision.
Vector extended_residual(const SparseMatrix& A, const Vector& x, const Vector& b) {
  std::vector<long double> acc(b.data(), b.data() + b.size());
  for (int j = 0; j < A.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(A, j); it; ++it) {
      acc[it.row()] -= static_cast<long double>(it.value()) * x[j];
    }
  }
  Vector r(b.size());
  for (int i = 0; i < b.size(); ++i) r[i] = static_cast<double>(acc[i]);
  return r;
}

}  // namespace

struct LinearSolver::Impl {
  SparseMatrix matrix;
  MatrixStructure structure;
  double rtol;
  double norm_inf = 0.0;
  std::optional<Eigen::SimplicialLDLT<SparseMatrix>> ldlt;
  std::optional<Eigen::SparseLU<SparseMatrix>> lu;
  std::optional<Eigen::BiCGSTAB<SparseMatrix, Eigen::IncompleteLUT<double>>> iterative;
};

LinearSolver::LinearSolver(const SparseMatrix& matrix, MatrixStructure structure, double rtol)
    : impl_(std::make_unique<Impl>()) {
  if (matrix.rows() != matrix.cols()) throw SolverError("linear solve: matrix is not square", 0.0);
  impl_->matrix = matrix;
  impl_->matrix.makeCompressed();
  impl_->structure = structure;
  impl_->rtol = rtol;
  Vector row_sums = Vector::Zero(matrix.rows());
  for (int j = 0; j < impl_->matrix.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(impl_->matrix, j); it; ++it)
      row_sums[it.row()] += std::abs(it.value());
  impl_->norm_inf = row_sums.size() ? row_sums.maxCoeff() : 0.0;
  if (structure == MatrixStructure::SymmetricPositiveDefinite) {
    impl_->ldlt.emplace(impl_->matrix);
    if (impl_->ldlt->info() == Eigen::Success) return;
    impl_->ldlt.reset();
  }
  impl_->lu.emplace();
  impl_->lu->analyzePattern(impl_->matrix);
  impl_->lu->factorize(impl_->matrix);
  if (impl_->lu->info() == Eigen::Success) return;
  impl_->lu.reset();
  impl_->iterative.emplace();
  impl_->iterative->setTolerance(rtol * 1e-2);
  impl_->iterative->setMaxIterations(std::max<Eigen::Index>(1000, 10 * matrix.rows()));
  impl_->iterative->compute(impl_->matrix);
  if (impl_->iterative->info() != Eigen::Success) {
    throw SolverError("linear solve: factorization and preconditioner setup failed", 0.0);
  }
}

LinearSolver::~LinearSolver() = default;
LinearSolver::LinearSolver(LinearSolver&&) noexcept = default;
LinearSolver& LinearSolver::operator=(LinearSolver&&) noexcept = default;

int LinearSolver::size() const { return static_cast<int>(impl_->matrix.rows()); }

Vector LinearSolver::solve(const Vector& b) const {
  if (b.size() != impl_->matrix.rows()) {
    throw SolverError("linear solve: right-hand side has the wrong dimension", 0.0);
  }
  const double bnorm = b.norm();
  if (bnorm == 0.0) return Vector::Zero(b.size());
  Vector x;
  if (impl_->ldlt) {
    x = impl_->ldlt->solve(b);
  } else if (impl_->lu) {
    x = impl_->lu->solve(b);
  } else {
    x = impl_->iterative->solve(b);
  }
  // Iterative refinement while it keeps paying off; conservation checks
  // downstream sum the residual over all rows.
  Vector r = extended_residual(impl_->matrix, x, b);
  double residual = r.norm();
  for (int pass = 0; pass < 3 && residual > 1e-15 * bnorm; ++pass) {
    Vector dx;
    if (impl_->ldlt) {
      dx = impl_->ldlt->solve(r);
    } else if (impl_->lu) {
      dx = impl_->lu->solve(r);
    } else {
      dx = impl_->iterative->solve(r);
    }
    const Vector trial = x + dx;
    const Vector rt = extended_residual(impl_->matrix, trial, b);
    const double refined = rt.norm();
    if (!(refined < 0.5 * residual)) break;
    x = trial;
    r = rt;
    residual = refined;
  }
  // Normwise backward error; the stored x alone limits ||r|| to about
  // eps ||A|| ||x||, which can dwarf ||b||.
  const double backward = r.lpNorm<Eigen::Infinity>() /
                          (impl_->norm_inf * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>());
  if (!(backward <= impl_->rtol)) {
    throw SolverError("linear solve: backward error " + sci(backward) + " exceeds tolerance " +
                          sci(impl_->rtol),
                      backward);
  }
  return x;
}

Vector solve_linear(const SparseMatrix& matrix, const Vector& b, MatrixStructure structure,
                    double rtol) {
  return LinearSolver(matrix, structure, rtol).solve(b);
}

}  // namespace ddsim
