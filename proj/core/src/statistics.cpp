#include "ddsim/statistics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "ddsim/error.hpp"

namespace ddsim {

std::string_view to_string(StatisticsKind kind) {
  switch (kind) {
    case StatisticsKind::Boltzmann: return "boltzmann";
    case StatisticsKind::FermiDiracHalf: return "fermi-dirac";
  }
  return "unknown";
}

namespace {

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1] (QUADPACK qk15).
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a;
  double b;
  double value;
  double error;
  int depth;
  bool operator<(const Panel& other) const { return error < other.error; }
};

template <class F>
Panel gauss_kronrod(const F& f, double a, double b, int depth) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kXgk[i];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kWgk[i] * pair;
    if (i % 2 == 1) gauss += kWg[i / 2] * pair;
  }
  kronrod *= half;
  gauss *= half;
  return Panel{a, b, kronrod, std::abs(kronrod - gauss), depth};
}

// Globally adaptive bisection: always split the panel with the largest error
// estimate until the summed estimate meets the relative tolerance.
template <class F>
double integrate_adaptive(const F& f, const std::vector<double>& breaks,
                          const QuadratureOptions& quad, const char* what) {
  std::priority_queue<Panel> heap;
  double total = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    Panel p = gauss_kronrod(f, breaks[i], breaks[i + 1], 0);
    total += p.value;
    error += p.error;
    heap.push(p);
  }
  constexpr int kMaxPanels = 4000;
  while (error > quad.rel_tol * std::abs(total) && error > 1e-300) {
    Panel worst = heap.top();
    if (worst.depth >= quad.max_depth || static_cast<int>(heap.size()) >= kMaxPanels) {
      const double achieved = total != 0.0 ? error / std::abs(total) : error;
      throw QuadratureError(std::string(what) + ": adaptive quadrature did not converge (achieved " +
                                std::to_string(achieved) + ", requested " +
                                std::to_string(quad.rel_tol) + ")",
                            achieved);
    }
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Panel left = gauss_kronrod(f, worst.a, mid, worst.depth + 1);
    Panel right = gauss_kronrod(f, mid, worst.b, worst.depth + 1);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to drop the cancellation noise of the running updates.
  double sum = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    heap.pop();
  }
  return sum;
}

// 1 / (1 + e^y) without overflow.
inline double fermi_factor(double y) {
  if (y >= 0.0) {
    const double e = std::exp(-y);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(y));
}

// With t = x^2 the integrands are smooth on [0, X]. The Fermi edge sits at
// x = sqrt(s); panel breaks bracket it, and X puts the tail below e^-50.
std::vector<double> breakpoints(double s) {
  const double upper = std::sqrt(std::max(s, 0.0) + 50.0);
  std::vector<double> breaks{0.0};
  if (s > -6.0) {
    const double lo = std::sqrt(std::max(s - 6.0, 0.0));
    const double hi = std::sqrt(s + 6.0);
    if (lo > 0.0) breaks.push_back(lo);
    if (hi < upper) breaks.push_back(hi);
  }
  breaks.push_back(upper);
  return breaks;
}

void require_finite(double s) {
  if (!std::isfinite(s)) throw DomainError("statistics: chemical potential must be finite");
}

constexpr std::array<double, 12> kZetaEven = {
    1.6449340668482264, 1.0823232337111382, 1.0173430619844491, 1.0040773561979443,
    1.0009945751278181, 1.0002460865533080, 1.0000612481350587, 1.0000152822594087,
    1.0000038172932650, 1.0000009539620339, 1.0000002384505027, 1.0000000596081891};

// Sommerfeld expansion of the normalized integral of order j:
// s^(j+1)/Gamma(j+2) * (1 + sum_n 2 (1 - 2^(1-2n)) zeta(2n) (j+1)_(2n) s^(-2n)),
// (j+1)_(2n) the falling factorial. Truncated at the smallest term.
double sommerfeld(double s, double j, double gamma_j_plus_2) {
  double sum = 1.0;
  double falling = 1.0;
  double previous = std::numeric_limits<double>::infinity();
  const double inv_s2 = 1.0 / (s * s);
  double power = 1.0;
  for (int n = 1; n <= static_cast<int>(kZetaEven.size()); ++n) {
    falling *= (j + 1.0 - (2 * n - 2)) * (j + 1.0 - (2 * n - 1));
    power *= inv_s2;
    const double term =
        2.0 * (1.0 - std::pow(2.0, 1 - 2 * n)) * kZetaEven[n - 1] * falling * power;
    if (std::abs(term) >= previous) break;
    sum += term;
    previous = std::abs(term);
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return std::pow(s, j + 1.0) / gamma_j_plus_2 * sum;
}

}  // namespace

namespace fermi_dirac {

double half_by_quadrature(double s, const QuadratureOptions& quad) {
  const auto integrand = [s](double x) { return x * x * fermi_factor(x * x - s); };
  return 4.0 / std::sqrt(std::numbers::pi) *
         integrate_adaptive(integrand, breakpoints(s), quad, "fermi-dirac F_1/2");
}

double minus_half_by_quadrature(double s, const QuadratureOptions& quad) {
  const auto integrand = [s](double x) { return fermi_factor(x * x - s); };
  return 2.0 / std::sqrt(std::numbers::pi) *
         integrate_adaptive(integrand, breakpoints(s), quad, "fermi-dirac F_-1/2");
}

double half_nondegenerate_series(double s) {
  double sum = 0.0;
  for (int k = 6; k >= 1; --k) {
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    sum += sign * std::exp(k * s) / std::pow(k, 1.5);
  }
  return sum;
}

double minus_half_nondegenerate_series(double s) {
  double sum = 0.0;
  for (int k = 6; k >= 1; --k) {
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    sum += sign * std::exp(k * s) / std::sqrt(static_cast<double>(k));
  }
  return sum;
}

double half_degenerate_series(double s) {
  return sommerfeld(s, 0.5, 0.75 * std::sqrt(std::numbers::pi));
}

double minus_half_degenerate_series(double s) {
  return sommerfeld(s, -0.5, 0.5 * std::sqrt(std::numbers::pi));
}

}  // namespace fermi_dirac

StatisticsModel::StatisticsModel(StatisticsKind kind, QuadratureOptions quad, double invert_rtol)
    : kind_(kind), quad_(quad), invert_rtol_(invert_rtol) {
  if (!(quad_.rel_tol > 0.0) || quad_.max_depth < 1 || !(invert_rtol_ > 0.0)) {
    throw DomainError("statistics: tolerances must be positive");
  }
}

double StatisticsModel::eval(double s) const {
  require_finite(s);
  if (kind_ == StatisticsKind::Boltzmann) return std::exp(s);
  if (s <= kNondegenerateCrossover) return fermi_dirac::half_nondegenerate_series(s);
  if (s >= kDegenerateCrossover) return fermi_dirac::half_degenerate_series(s);
  return fermi_dirac::half_by_quadrature(s, quad_);
}

double StatisticsModel::eval_derivative(double s) const {
  require_finite(s);
  if (kind_ == StatisticsKind::Boltzmann) return std::exp(s);
  if (s <= kNondegenerateCrossover) return fermi_dirac::minus_half_nondegenerate_series(s);
  if (s >= kDegenerateCrossover) return fermi_dirac::minus_half_degenerate_series(s);
  return fermi_dirac::minus_half_by_quadrature(s, quad_);
}

double StatisticsModel::eval_eta(double s) const {
  if (kind_ == StatisticsKind::Boltzmann) {
    require_finite(s);
    return 1.0;
  }
  return eval(s) / eval_derivative(s);
}

double StatisticsModel::invert(double u) const {
  if (!(u > 0.0) || !std::isfinite(u)) {
    throw DomainError("statistics: invert requires a finite density u > 0");
  }
  if (kind_ == StatisticsKind::Boltzmann) return std::log(u);

  // F(s) <= e^s, so ln(u) is a lower bracket. Grow the upper one geometrically.
  double lo = std::log(u);
  double f_lo = eval(lo) - u;
  if (std::abs(f_lo) <= invert_rtol_ * u) return lo;
  double step = 1.0;
  double hi = lo + step;
  double f_hi = eval(hi) - u;
  while (f_hi < 0.0) {
    lo = hi;
    f_lo = f_hi;
    step *= 2.0;
    hi = lo + step;
    f_hi = eval(hi) - u;
  }

  // Safeguarded Newton inside [lo, hi].
  double s = (std::abs(f_lo) < std::abs(f_hi)) ? lo : hi;
  double f = (s == lo) ? f_lo : f_hi;
  for (int it = 0; it < 200; ++it) {
    if (std::abs(f) <= invert_rtol_ * u) return s;
    double next = s - f / eval_derivative(s);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == s || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(s)) {
      return s;
    }
    s = next;
    f = eval(s) - u;
    if (f < 0.0) {
      lo = s;
    } else {
      hi = s;
    }
  }
  throw SolverError("statistics: invert did not converge", std::abs(f) / u);
}

}  // namespace ddsim
