#include "ddsim/verify/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ddsim::verify {

namespace {

double occupancy(double y) {
  if (y > 0.0) {
    const double e = std::exp(-y);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(y));
}

}  // namespace

double fermi_dirac_half_oracle(double s, int intervals) {
  if (intervals < 2 || intervals % 2 != 0) throw std::invalid_argument("intervals must be even");
  // Tail beyond x^2 = s + 60 is below e^-60 relative.
  const double upper = std::sqrt(std::max(s, 0.0) + 60.0);
  const double h = upper / intervals;
  auto f = [s](double x) { return x * x * occupancy(x * x - s); };
  double odd = 0.0, even = 0.0;
  for (int i = 1; i < intervals; ++i) {
    const double v = f(i * h);
    (i % 2 ? odd : even) += v;
  }
  const double simpson = h / 3.0 * (f(0.0) + 4.0 * odd + 2.0 * even + f(upper));
  return 4.0 / std::sqrt(std::numbers::pi) * simpson;
}

double fermi_dirac_half_derivative_oracle(double s, double h, int intervals) {
  return (fermi_dirac_half_oracle(s + h, intervals) - fermi_dirac_half_oracle(s - h, intervals)) /
         (2.0 * h);
}

double mass_action_exact(double u0, double rate, double g, double t) {
  const double r = std::sqrt(g);
  const double th = std::tanh(r * rate * t);
  return r * (u0 + r * th) / (r + u0 * th);
}

namespace {

// Flux from node a to node b (positive when carriers flow a -> b in the sense
// of j = mu u grad Phi), potential psi linear in between, distance d.
double constant_flux(double mu, double d, double ua, double ub, double psia, double psib) {
  const double dpsi = psib - psia;
  if (std::abs(dpsi) < 1e-9) {
    // Second-order expansion around the midpoint.
    const double m = 0.5 * (psia + psib);
    return mu / d * (ub * std::exp(psib - m) - ua * std::exp(psia - m)) * (1.0 - dpsi * dpsi / 24.0);
  }
  const double m = std::max(psia, psib);
  const double ea = std::exp(psia - m), eb = std::exp(psib - m);
  return mu * dpsi * (ub * eb - ua * ea) / (d * (eb - ea));
}

struct Layout {
  const Monolithic1D& dev;
  int n;
  double h;
};

Eigen::VectorXd residual(const Layout& L, const Eigen::VectorXd& z, const Eigen::VectorXd& u1_old,
                         const Eigen::VectorXd& u2_old, double dt) {
  const auto& d = L.dev;
  const int n = L.n;
  const double h = L.h;
  Eigen::VectorXd F(3 * n);
  auto phi = [&](int i) { return z(i); };
  auto P1 = [&](int i) { return z(n + i); };
  auto P2 = [&](int i) { return z(2 * n + i); };
  auto u1 = [&](int i) { return std::exp(P1(i) - phi(i)); };
  auto u2 = [&](int i) { return std::exp(P2(i) + phi(i)); };

  for (int i = 0; i < n; ++i) {
    // Neighbours: (value accessors, distance).
    double poisson = 0.0, div1 = 0.0, div2 = 0.0;
    auto add = [&](double phin, double P1n, double P2n, double dist) {
      const double u1n = std::exp(P1n - phin), u2n = std::exp(P2n + phin);
      poisson += d.eps / dist * (phi(i) - phin);
      // Electrons: (u1 e^{phi})' = (j/mu) e^{phi}; holes with -phi.
      div1 += constant_flux(d.mu1, dist, u1(i), u1n, phi(i), phin);
      div2 += constant_flux(d.mu2, dist, u2(i), u2n, -phi(i), -phin);
    };
    if (i > 0)
      add(phi(i - 1), P1(i - 1), P2(i - 1), h);
    else
      add(d.phi_D[0], d.Phi1_D[0], d.Phi2_D[0], 0.5 * h);
    if (i < n - 1)
      add(phi(i + 1), P1(i + 1), P2(i + 1), h);
    else
      add(d.phi_D[1], d.Phi1_D[1], d.Phi2_D[1], 0.5 * h);

    const double a = u1(i), b = u2(i);
    const double srh = -(a * b - d.n_i * d.n_i) / (d.tau2 * (a + d.n1) + d.tau1 * (b + d.n2));
    F(i) = poisson - h * (d.doping[i] + a - b);
    F(n + i) = h * (a - u1_old(i)) / dt - div1 - h * srh;
    F(2 * n + i) = h * (b - u2_old(i)) / dt - div2 - h * srh;
  }
  return F;
}

}  // namespace

MonolithicSolution monolithic_step(const Monolithic1D& device, const Eigen::VectorXd& u1_old,
                                   const Eigen::VectorXd& u2_old, double dt,
                                   const Eigen::VectorXd& phi0, const Eigen::VectorXd& Phi1_0,
                                   const Eigen::VectorXd& Phi2_0) {
  const int n = device.cells;
  if (static_cast<int>(device.doping.size()) != n) throw std::invalid_argument("doping size");
  Layout L{device, n, device.length / n};
  Eigen::VectorXd z(3 * n);
  z << phi0, Phi1_0, Phi2_0;

  MonolithicSolution out;
  Eigen::VectorXd F = residual(L, z, u1_old, u2_old, dt);
  for (int it = 0; it < 100; ++it) {
    out.iterations = it;
    if (F.lpNorm<Eigen::Infinity>() < 1e-14) break;
    Eigen::MatrixXd J(3 * n, 3 * n);
    for (int k = 0; k < 3 * n; ++k) {
      const double step = 1e-6 * std::max(1.0, std::abs(z(k)));
      Eigen::VectorXd zp = z, zm = z;
      zp(k) += step;
      zm(k) -= step;
      J.col(k) = (residual(L, zp, u1_old, u2_old, dt) - residual(L, zm, u1_old, u2_old, dt)) /
                 (2.0 * step);
    }
    const Eigen::VectorXd dz = J.fullPivLu().solve(-F);
    double t = 1.0;
    Eigen::VectorXd Fn;
    for (int ls = 0; ls < 30; ++ls) {
      Fn = residual(L, z + t * dz, u1_old, u2_old, dt);
      if (Fn.norm() < F.norm() || ls == 29) break;
      t *= 0.5;
    }
    z += t * dz;
    F = Fn;
  }
  out.phi = z.segment(0, n);
  out.Phi1 = z.segment(n, n);
  out.Phi2 = z.segment(2 * n, n);
  out.residual = F.lpNorm<Eigen::Infinity>();
  return out;
}

}  // namespace ddsim::verify
