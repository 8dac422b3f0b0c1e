#pragma once

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace ddsim::verify {

/// F_{1/2}(s) by composite Simpson on (4/sqrt(pi)) int x^2 / (1 + e^{x^2 - s}) dx
/// with `intervals` subintervals (t = x^2 removes the square-root cusp).
double fermi_dirac_half_oracle(double s, int intervals = 1000000);

/// Derivative by central difference of the oracle, step h.
double fermi_dirac_half_derivative_oracle(double s, double h = 1e-5, int intervals = 1000000);

/// Uniform 1D device for the monolithic implicit-Euler oracle (Boltzmann,
/// SRH, Dirichlet data at both ends, constant coefficients).
struct Monolithic1D {
  double length = 1.0;
  int cells = 2;
  double eps = 1.0;
  double mu1 = 1.0;
  double mu2 = 1.0;
  std::vector<double> doping;
  /// Boundary values at the new time: index 0 left end, 1 right end.
  std::array<double, 2> phi_D{};
  std::array<double, 2> Phi1_D{};
  std::array<double, 2> Phi2_D{};
  /// SRH parameters.
  double n_i = 1.0, n1 = 1.0, n2 = 1.0, tau1 = 1.0, tau2 = 1.0;
};

struct MonolithicSolution {
  Eigen::VectorXd phi, Phi1, Phi2;
  double residual = 0.0;
  int iterations = 0;
};

/// One backward-Euler step of the full system in (phi, Phi1, Phi2), solved by
/// Newton with a finite-difference Jacobian. Face fluxes come from the exact
/// constant-flux solution between two nodes with linear potential.
MonolithicSolution monolithic_step(const Monolithic1D& device, const Eigen::VectorXd& u1_old,
                                   const Eigen::VectorXd& u2_old, double dt,
                                   const Eigen::VectorXd& phi0, const Eigen::VectorXd& Phi1_0,
                                   const Eigen::VectorXd& Phi2_0);

/// u' = rate (g - u^2), u(0) = u0: the uniform-state mass-action dynamics.
double mass_action_exact(double u0, double rate, double g, double t);

}  // namespace ddsim::verify
