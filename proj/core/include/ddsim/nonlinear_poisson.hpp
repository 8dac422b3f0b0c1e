#pragma once

#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "ddsim/device.hpp"
#include "ddsim/linear_solver.hpp"
#include "ddsim/mesh.hpp"
#include "ddsim/operators.hpp"
#include "ddsim/statistics.hpp"

namespace ddsim {

/// The Robin-Poisson operator of a meshed device together with its
/// factorization. Immutable once built; shared between problems.
struct PoissonOperator {
  SparseOperator P;
  std::shared_ptr<const LinearSolver> solver;
  Vector volumes;
  /// Smallest eigenvalue of P (inverse-iteration estimate).
  double lambda_min = 0.0;

  static std::shared_ptr<const PoissonOperator> build(const DeviceSpec& spec, const Mesh& mesh);
  /// For hand-assembled operators (tests, oracles).
  static std::shared_ptr<const PoissonOperator> from_matrix(SparseOperator P, Vector volumes);

  /// sqrt(r^T P^{-1} r).
  double dual_norm(const Vector& r) const;
  /// sqrt(x^T P x).
  double energy_norm(const Vector& x) const;
};

/// P phi = V (F1(omega1 - phi) - F2(omega2 + phi)) + load.
///
/// In the split formulation load is zero and omega carries the data part of
/// the potential; a nonzero load (manufactured problems) disables the cut-off.
struct NonlinearPoissonProblem {
  std::shared_ptr<const PoissonOperator> op;
  StatisticsModel f1;
  StatisticsModel f2;
  Vector omega1;
  Vector omega2;
  Vector load;  ///< empty means zero
  /// Cut-off level; apriori_bound(...) when unset.
  std::optional<double> cutoff_bound;

  int size() const { return op->P.size(); }
  bool has_load() const { return load.size() > 0 && load.lpNorm<Eigen::Infinity>() > 0.0; }
};

enum class SolveMethod { Contraction, Newton };

std::string_view to_string(SolveMethod method);

struct SolveReport {
  int iterations = 0;
  double residual = 0.0;  ///< dual-norm residual at the returned iterate
  SolveMethod method = SolveMethod::Newton;
  double cutoff_bound = 0.0;
  std::vector<double> residual_history;
};

struct SolveOptions {
  double tol = 1e-12;
  int max_iter = 100;
  /// Contraction only: fixed relaxation. Unset selects 2 / (1 + L_n) from the
  /// local Lipschitz estimate with backtracking.
  std::optional<double> relaxation;
};

struct PoissonSolution {
  Vector phi;
  SolveReport report;
};

/// K = M + K0 with M = max |omega|, K0 = |F2^{-1}(F1(0))| (0 when F1 = F2).
double apriori_bound(const Vector& omega1, const Vector& omega2, const StatisticsModel& f1,
                     const StatisticsModel& f2);

double cutoff(double s, double K);

/// Residual P phi - V (F1(omega1 - c(phi)) - F2(omega2 + c(phi))) - load with
/// c the cut-off at level K (K = inf: no cut-off).
Vector poisson_residual(const NonlinearPoissonProblem& problem, const Vector& phi, double K);

/// Zarantonello iteration with the P-solve as Riesz map; stops when the
/// energy norm of the update drops below `options.tol` (default 1e-10).
PoissonSolution contraction_iterate(const NonlinearPoissonProblem& problem,
                                    SolveOptions options = {1e-10, 20000, std::nullopt},
                                    const Vector* initial = nullptr);

/// Damped Newton with halving line search on the dual-norm residual.
PoissonSolution newton_solve(const NonlinearPoissonProblem& problem, SolveOptions options = {},
                             const Vector* initial = nullptr);

/// Newton, with the contraction iteration as fallback.
PoissonSolution solve_operator_S(const NonlinearPoissonProblem& problem,
                                 const Vector* initial = nullptr);

struct EquilibriumState {
  Vector phi;
  Vector phi_data;
  Vector u1;
  Vector u2;
  SolveReport report;
};

/// Thermal equilibrium (zero quasi-Fermi levels) at time t.
EquilibriumState equilibrium_state(const DeviceSpec& spec, const Mesh& mesh,
                                   const StatisticsModel& f1, const StatisticsModel& f2,
                                   double t = 0.0);

}  // namespace ddsim
