#include "ddsim/nonlinear_poisson.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ddsim/error.hpp"

namespace ddsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inverse_iteration_lambda_min(const SparseMatrix& P, const LinearSolver& solver) {
  const int n = static_cast<int>(P.rows());
  Vector x(n);
  for (int i = 0; i < n; ++i) x[i] = 1.0 + 0.1 * std::sin(1.0 + i);
  x.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 200; ++it) {
    Vector y = solver.solve(x);
    const double next = 1.0 / x.dot(y);
    x = y.normalized();
    if (it > 2 && std::abs(next - lambda) <= 1e-8 * next) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  // Rayleigh quotient of the converged vector.
  return x.dot(P * x);
}

void check_problem(const NonlinearPoissonProblem& p) {
  if (!p.op) throw DomainError("nonlinear poisson: problem has no operator");
  const int n = p.size();
  if (p.omega1.size() != n || p.omega2.size() != n) {
    throw DomainError("nonlinear poisson: omega has the wrong size");
  }
  if (p.load.size() != 0 && p.load.size() != n) {
    throw DomainError("nonlinear poisson: load has the wrong size");
  }
  if (!p.omega1.allFinite() || !p.omega2.allFinite()) {
    throw DomainError("nonlinear poisson: omega must be bounded");
  }
}

double resolved_cutoff(const NonlinearPoissonProblem& p) {
  if (p.cutoff_bound) return *p.cutoff_bound;
  if (p.has_load()) return kInf;
  return apriori_bound(p.omega1, p.omega2, p.f1, p.f2);
}

/// max_i V_i (F1'(omega1 - c(phi)) + F2'(omega2 + c(phi))).
Vector carrier_derivative(const NonlinearPoissonProblem& p, const Vector& phi, double K) {
  Vector d(p.size());
  for (int i = 0; i < p.size(); ++i) {
    const double c = cutoff(phi[i], K);
    d[i] = p.op->volumes[i] *
           (p.f1.eval_derivative(p.omega1[i] - c) + p.f2.eval_derivative(p.omega2[i] + c));
  }
  return d;
}

/// Residual that maps evaluation failures (overflowing trial points) to +inf.
double safe_dual_residual(const NonlinearPoissonProblem& p, const Vector& phi, double K,
                          Vector& r) {
  try {
    r = poisson_residual(p, phi, K);
  } catch (const DomainError&) {
    return kInf;
  }
  if (!r.allFinite()) return kInf;
  return p.op->dual_norm(r);
}

}  // namespace

std::shared_ptr<const PoissonOperator> PoissonOperator::build(const DeviceSpec& spec,
                                                              const Mesh& mesh) {
  Vector volumes(mesh.cell_count());
  for (int i = 0; i < mesh.cell_count(); ++i) volumes[i] = mesh.cells[i].volume;
  return from_matrix(assemble_poisson(spec, mesh), std::move(volumes));
}

std::shared_ptr<const PoissonOperator> PoissonOperator::from_matrix(SparseOperator P,
                                                                    Vector volumes) {
  if (volumes.size() != P.size()) {
    throw DomainError("poisson operator: one volume per row required");
  }
  auto op = std::make_shared<PoissonOperator>();
  op->P = std::move(P);
  op->volumes = std::move(volumes);
  op->solver =
      std::make_shared<const LinearSolver>(op->P.matrix, MatrixStructure::SymmetricPositiveDefinite);
  op->lambda_min = inverse_iteration_lambda_min(op->P.matrix, *op->solver);
  return op;
}

double PoissonOperator::dual_norm(const Vector& r) const {
  return std::sqrt(std::max(0.0, r.dot(solver->solve(r))));
}

double PoissonOperator::energy_norm(const Vector& x) const {
  return std::sqrt(std::max(0.0, x.dot(P.matrix * x)));
}

std::string_view to_string(SolveMethod method) {
  return method == SolveMethod::Newton ? "newton" : "contraction";
}

double apriori_bound(const Vector& omega1, const Vector& omega2, const StatisticsModel& f1,
                     const StatisticsModel& f2) {
  double M = 0.0;
  if (omega1.size() > 0) M = std::max(M, omega1.lpNorm<Eigen::Infinity>());
  if (omega2.size() > 0) M = std::max(M, omega2.lpNorm<Eigen::Infinity>());
  const double k2 = f1 == f2 ? 0.0 : f2.invert(f1.eval(0.0));
  return M + std::abs(k2);
}

double cutoff(double s, double K) { return std::clamp(s, -K, K); }

Vector poisson_residual(const NonlinearPoissonProblem& p, const Vector& phi, double K) {
  Vector r = p.op->P.apply(phi);
  for (int i = 0; i < p.size(); ++i) {
    const double c = cutoff(phi[i], K);
    r[i] -= p.op->volumes[i] * (p.f1.eval(p.omega1[i] - c) - p.f2.eval(p.omega2[i] + c));
  }
  if (p.load.size() > 0) r -= p.load;
  return r;
}

PoissonSolution contraction_iterate(const NonlinearPoissonProblem& problem, SolveOptions options,
                                    const Vector* initial) {
  check_problem(problem);
  if (!(options.tol > 0.0)) throw DomainError("contraction: tolerance must be positive");
  if (options.relaxation && !(*options.relaxation > 0.0 && *options.relaxation < 2.0)) {
    throw DomainError("contraction: relaxation must lie in (0, 2)");
  }
  const auto& op = *problem.op;
  const double K = resolved_cutoff(problem);
  PoissonSolution out;
  out.report.method = SolveMethod::Contraction;
  out.report.cutoff_bound = K;
  out.phi = initial ? *initial : Vector::Zero(problem.size());

  Vector r = poisson_residual(problem, out.phi, K);
  Vector z = op.solver->solve(r);
  double res = std::sqrt(std::max(0.0, r.dot(z)));
  out.report.residual_history.push_back(res);
  double contraction_rate = 0.0;
  for (int it = 1; it <= options.max_iter; ++it) {
    double lambda;
    if (options.relaxation) {
      lambda = *options.relaxation;
    } else {
      const double L =
          1.0 + carrier_derivative(problem, out.phi, K).maxCoeff() / op.lambda_min;
      lambda = 2.0 / (1.0 + L);
    }
    Vector trial, rt, zt;
    double rest = kInf;
    for (int halving = 0; halving < 60; ++halving) {
      trial = out.phi - lambda * z;
      rt = poisson_residual(problem, trial, K);
      zt = op.solver->solve(rt);
      rest = std::sqrt(std::max(0.0, rt.dot(zt)));
      if (options.relaxation || rest <= res || lambda * res <= options.tol) break;
      lambda *= 0.5;
    }
    const double update = lambda * res;
    if (res > 0.0) contraction_rate = rest / res;
    out.phi = std::move(trial);
    z = std::move(zt);
    res = rest;
    out.report.residual_history.push_back(res);
    out.report.iterations = it;
    out.report.residual = res;
    if (update <= options.tol) return out;
  }
  throw SolverError("contraction: no convergence after " + std::to_string(options.max_iter) +
                        " iterations (observed rate " + sci(contraction_rate) + ")",
                    res);
}

PoissonSolution newton_solve(const NonlinearPoissonProblem& problem, SolveOptions options,
                             const Vector* initial) {
  check_problem(problem);
  if (!(options.tol > 0.0)) throw DomainError("newton: tolerance must be positive");
  const auto& op = *problem.op;
  PoissonSolution out;
  out.report.method = SolveMethod::Newton;
  out.report.cutoff_bound = kInf;
  out.phi = initial ? *initial : Vector::Zero(problem.size());

  Vector r;
  double res = safe_dual_residual(problem, out.phi, kInf, r);
  if (!std::isfinite(res)) {
    out.phi.setZero();
    res = safe_dual_residual(problem, out.phi, kInf, r);
  }
  out.report.residual_history.push_back(res);
  for (int it = 0; it <= options.max_iter; ++it) {
    out.report.iterations = it;
    out.report.residual = res;
    if (res <= options.tol) return out;
    if (it == options.max_iter) break;

    const Vector d = carrier_derivative(problem, out.phi, kInf);
    SparseMatrix J = op.P.matrix;
    for (int i = 0; i < problem.size(); ++i) J.coeffRef(i, i) += d[i];
    const Vector delta = solve_linear(J, -r, MatrixStructure::SymmetricPositiveDefinite);

    double step = 1.0;
    Vector trial, rt;
    double rest = kInf;
    bool accepted = false;
    for (int halving = 0; halving < 50; ++halving) {
      trial = out.phi + step * delta;
      rest = safe_dual_residual(problem, trial, kInf, rt);
      if (rest < res) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // Rounding floor: the full step is already below resolution.
      const double scale = 1.0 + out.phi.lpNorm<Eigen::Infinity>();
      if (delta.lpNorm<Eigen::Infinity>() <= 64 * std::numeric_limits<double>::epsilon() * scale) {
        return out;
      }
      throw SolverError("newton: line search stalled", res);
    }
    out.phi = std::move(trial);
    r = std::move(rt);
    res = rest;
    out.report.residual_history.push_back(res);
  }
  throw SolverError("newton: no convergence after " + std::to_string(options.max_iter) +
                        " iterations",
                    res);
}

PoissonSolution solve_operator_S(const NonlinearPoissonProblem& problem, const Vector* initial) {
  try {
    return newton_solve(problem, {}, initial);
  } catch (const SolverError& newton_error) {
    try {
      return contraction_iterate(problem, {1e-12, 20000, std::nullopt}, initial);
    } catch (const SolverError& contraction_error) {
      throw SolverError(std::string("nonlinear poisson: both methods failed (") +
                            newton_error.what() + "; " + contraction_error.what() + ")",
                        contraction_error.residual());
    }
  }
}

EquilibriumState equilibrium_state(const DeviceSpec& spec, const Mesh& mesh,
                                   const StatisticsModel& f1, const StatisticsModel& f2,
                                   double t) {
  const auto op = PoissonOperator::build(spec, mesh);
  EquilibriumState eq;
  eq.phi_data = op->solver->solve(poisson_data_load(spec, mesh, t));

  NonlinearPoissonProblem problem{op, f1, f2, -eq.phi_data, eq.phi_data, {}, std::nullopt};
  const auto doping = cell_doping(spec, mesh);
  Vector guess(mesh.cell_count());
  for (int i = 0; i < mesh.cell_count(); ++i) {
    guess[i] = neutral_potential(doping[i], f1, f2) - eq.phi_data[i];
  }
  auto solution = solve_operator_S(problem, &guess);
  eq.phi = eq.phi_data + solution.phi;
  eq.report = std::move(solution.report);
  eq.u1.resize(mesh.cell_count());
  eq.u2.resize(mesh.cell_count());
  for (int i = 0; i < mesh.cell_count(); ++i) {
    eq.u1[i] = f1.eval(-eq.phi[i]);
    eq.u2[i] = f2.eval(eq.phi[i]);
  }
  return eq;
}

}  // namespace ddsim
