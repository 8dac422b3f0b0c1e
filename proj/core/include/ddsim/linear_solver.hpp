#pragma once

#include <Eigen/Sparse>
#include <memory>

namespace ddsim {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

enum class MatrixStructure { SymmetricPositiveDefinite, General };

/// Factorization of one sparse matrix, reusable across right-hand sides.
/// SPD systems use a sparse LDL^T; general systems a sparse LU, with a
/// BiCGSTAB + ILUT fallback if the LU breaks down.
class LinearSolver {
 public:
  LinearSolver(const SparseMatrix& matrix, MatrixStructure structure, double rtol = 1e-12);
  ~LinearSolver();
  LinearSolver(LinearSolver&&) noexcept;
  LinearSolver& operator=(LinearSolver&&) noexcept;

  /// Throws SolverError if ||A x - b|| > rtol (||A|| ||x|| + ||b||) in the max norm.
  Vector solve(const Vector& b) const;

  int size() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One-shot solve; see LinearSolver.
Vector solve_linear(const SparseMatrix& matrix, const Vector& b, MatrixStructure structure,
                    double rtol = 1e-12);

}  // namespace ddsim
