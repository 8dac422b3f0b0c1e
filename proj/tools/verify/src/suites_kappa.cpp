#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "ddsim/recombination.hpp"
#include "ddsim/statistics.hpp"
#include "ddsim/verify/oracles.hpp"
#include "suites.hpp"

namespace ddsim::verify::detail {

namespace {

using V3 = std::array<double, 3>;

double norm(const V3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

V3 minus(const V3& a, const V3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

V3 in_ball(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> u(-radius, radius);
  for (;;) {
    V3 v{u(rng), u(rng), u(rng)};
    if (norm(v) <= radius) return v;
  }
}

double kap(const V3& e, const V3& j, double a) { return kappa(e, j, a); }

// max_t (a/t^2) e^{-a/t} by golden-section search on a log grid bracket.
double lipschitz_oracle(double a) {
  auto g = [a](double t) { return a / (t * t) * std::exp(-a / t); };
  double best_t = 0.0, best = -1.0;
  for (int i = 0; i <= 4000; ++i) {
    const double t = a * std::pow(10.0, -3.0 + 6.0 * i / 4000.0);
    if (g(t) > best) best = g(t), best_t = t;
  }
  double lo = best_t / 1.01, hi = best_t * 1.01;
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int i = 0; i < 200; ++i) {
    const double m1 = hi - r * (hi - lo), m2 = lo + r * (hi - lo);
    (g(m1) < g(m2) ? lo : hi) = (g(m1) < g(m2) ? m1 : m2);
  }
  return g(0.5 * (lo + hi));
}

}  // namespace

std::vector<Check> kappa_lipschitz(std::uint64_t seed) {
  const std::string suite = "kappa-lipschitz";
  std::vector<Check> out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (double a : {0.5, 1.0, 2.0}) {
    const std::string tag = "a=" + std::to_string(a).substr(0, 3);
    const double L = kappa_lipschitz_constant(a);
    out.push_back(at_most(suite, tag + " constant vs oracle (rel)",
                          std::abs(L - lipschitz_oracle(a)) / L, 1e-12));
    int violations = 0;
    double worst = 0.0;
    for (int n = 0; n < 100000; ++n) {
      const V3 e1 = in_ball(rng, 10.0), j1 = in_ball(rng, 10.0);
      V3 e2, j2;
      if (n % 2 == 0) {
        e2 = in_ball(rng, 10.0);
        j2 = in_ball(rng, 10.0);
      } else {
        // Nearby pairs probe the local constant.
        const double r = std::pow(10.0, -6.0 * unit(rng));
        const V3 de = in_ball(rng, r), dj = in_ball(rng, r);
        e2 = {e1[0] + de[0], e1[1] + de[1], e1[2] + de[2]};
        j2 = {j1[0] + dj[0], j1[1] + dj[1], j1[2] + dj[2]};
      }
      const double diff = std::abs(kap(e1, j1, a) - kap(e2, j2, a));
      const double bound = kappa_lipschitz_bound(a, norm(e1), norm(j2), norm(minus(j1, j2)),
                                                 norm(minus(e1, e2)));
      // Rounding allowance: a few ulps of the kernel values.
      if (diff > bound + 1e-14) ++violations;
      if (bound > 0.0) worst = std::max(worst, diff / bound);
    }
    out.push_back(at_most(suite, tag + " violations in 1e5 pairs", violations, 0));
    out.push_back(at_most(suite, tag + " max |dkappa| / bound", worst, 1.0 + 1e-9));

    // Positive homogeneity in j.
    double homog = 0.0;
    for (int n = 0; n < 1000; ++n) {
      const V3 e = in_ball(rng, 10.0), j = in_ball(rng, 10.0);
      const double c = 0.1 + 10.0 * unit(rng);
      const V3 cj{c * j[0], c * j[1], c * j[2]};
      const double k = kap(e, j, a);
      // exp(-a/t), t = |e.j|/|j|, amplifies the relative error of t by a/t;
      // cancellation in e.j makes that error |e|/t ulps.
      const double t = std::abs(e[0] * j[0] + e[1] * j[1] + e[2] * j[2]) / norm(j);
      if (k > 0.0)
        homog = std::max(homog, std::abs(kap(e, cj, a) - c * k) / (c * k) /
                                    (1.0 + a * norm(e) / (t * t)));
    }
    out.push_back(at_most(suite, tag + " kappa(e, c j) = c kappa(e, j) (rel / condition)", homog, 1e-14));
  }
  return out;
}

std::vector<Check> kappa_branches(std::uint64_t seed) {
  const std::string suite = "kappa-branches";
  std::vector<Check> out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::uniform_real_distribution<double> expo(-300.0, 300.0);

  int nonzero_orthogonal = 0;
  for (int n = 0; n < 20000; ++n) {
    const double p = u(rng), q = u(rng), z = u(rng);
    // e.j = p q - q p = 0 exactly.
    const V3 e{p, q, 0.0}, j{q, -p, 0.0};
    const V3 e3{0.0, 0.0, z}, j3{p, q, 0.0};
    for (double a : {0.5, 1.0, 2.0}) {
      if (kap(e, j, a) != 0.0) ++nonzero_orthogonal;
      if (kap(e3, j3, a) != 0.0) ++nonzero_orthogonal;
      if (kap(V3{}, j3, a) != 0.0) ++nonzero_orthogonal;
      if (kap(e, V3{}, a) != 0.0) ++nonzero_orthogonal;
    }
  }
  out.push_back(at_most(suite, "nonzero kappa with e.j = 0", nonzero_orthogonal, 0));

  int out_of_range = 0;
  int non_finite = 0;
  double worst = 0.0;
  for (int n = 0; n < 100000; ++n) {
    V3 e, j;
    const double se = std::pow(10.0, n % 3 == 0 ? expo(rng) / 10.0 : 0.0);
    const double sj = std::pow(10.0, n % 5 == 0 ? expo(rng) / 10.0 : 0.0);
    for (int i = 0; i < 3; ++i) e[i] = se * u(rng), j[i] = sj * u(rng);
    const double a = std::pow(10.0, u(rng) / 5.0);
    const double k = kap(e, j, a);
    if (!std::isfinite(k)) ++non_finite;
    const double nj = norm(j);
    if (k < 0.0 || k > nj) ++out_of_range;
    if (nj > 0.0) worst = std::max(worst, k / nj);
  }
  out.push_back(at_most(suite, "non-finite kappa", non_finite, 0));
  out.push_back(at_most(suite, "kappa outside [0, |j|]", out_of_range, 0));
  out.push_back(at_most(suite, "max kappa / |j|", worst, 1.0));

  // Aligned field: kappa = |j| exp(-a/|e|).
  double aligned = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const double s = std::abs(u(rng)) + 0.1, m = std::abs(u(rng)) + 0.1;
    const V3 e{s, 0.0, 0.0}, j{m, 0.0, 0.0};
    aligned = std::max(aligned, std::abs(kap(e, j, 1.0) - m * std::exp(-1.0 / s)) / m);
  }
  out.push_back(at_most(suite, "aligned field |j| exp(-a/|e|) (rel)", aligned, 1e-15));
  return out;
}

std::vector<Check> fermi_dirac(std::uint64_t seed) {
  const std::string suite = "fermi-dirac";
  std::vector<Check> out;
  const auto fd = StatisticsModel::fermi_dirac_half();

  const double f0 = fd.eval(0.0);
  out.push_back(within(suite, "F(0)", f0, 0.76515 - 1e-5, 0.76515 + 1e-5));
  out.push_back(at_most(suite, "|F(0) - oracle|", std::abs(f0 - fermi_dirac_half_oracle(0.0)), 1e-5));
  const double d0 = fd.eval_derivative(0.0);
  out.push_back(within(suite, "F'(0)", d0, 0.60490 - 1e-5, 0.60490 + 1e-5));
  out.push_back(at_most(suite, "|F'(0) - oracle|",
                        std::abs(d0 - fermi_dirac_half_derivative_oracle(0.0)), 1e-6));
  out.push_back(within(suite, "eta(0)", fd.eval_eta(0.0), 1.26491 - 1e-5, 1.26491 + 1e-5));

  double rel = 0.0;
  for (double s : {-20.0, -8.0, -3.0, -1.0, 1.0, 3.0, 8.0, 20.0, 35.0}) {
    const double o = fermi_dirac_half_oracle(s);
    rel = std::max(rel, std::abs(fd.eval(s) - o) / o);
  }
  out.push_back(at_most(suite, "max rel |F - oracle| on s in [-20, 35]", rel, 1e-9));

  double tail = 0.0;
  for (double s = -12.0; s >= -700.0; s -= 0.5)
    tail = std::max(tail, std::abs(fd.eval(s) / std::exp(s) - 1.0));
  out.push_back(at_most(suite, "max |F(s) e^-s - 1| for s <= -12", tail, 1e-4));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> s_dist(-40.0, 40.0);
  double round_trip = 0.0;
  for (int n = 0; n < 400; ++n) {
    const double u = fd.eval(s_dist(rng));
    round_trip = std::max(round_trip, std::abs(fd.eval(fd.invert(u)) - u) / u);
  }
  out.push_back(at_most(suite, "max rel |F(invert(u)) - u|", round_trip, 1e-12));

  int not_increasing = 0, eta_below_one = 0;
  double prev = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    const double s = -50.0 + 0.05 * i;
    const double f = fd.eval(s);
    if (i > 0 && !(f > prev)) ++not_increasing;
    if (fd.eval_eta(s) < 1.0) ++eta_below_one;
    prev = f;
  }
  out.push_back(at_most(suite, "monotonicity violations on [-50, 50]", not_increasing, 0));
  out.push_back(at_most(suite, "eta < 1 on [-50, 50]", eta_below_one, 0));
  return out;
}

}  // namespace ddsim::verify::detail
