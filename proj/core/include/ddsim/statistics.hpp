#pragma once

#include <string_view>

namespace ddsim {

enum class StatisticsKind { Boltzmann, FermiDiracHalf };

std::string_view to_string(StatisticsKind kind);

struct QuadratureOptions {
  double rel_tol = 1e-13;
  int max_depth = 30;
};

/// Carrier distribution function F mapping a scaled chemical potential to a
/// scaled density.
///
/// Boltzmann: F(s) = exp(s).
/// FermiDiracHalf: F(s) = 2/sqrt(pi) * int_0^inf sqrt(t) / (1 + exp(t - s)) dt,
/// the order-1/2 Fermi-Dirac integral normalized so that F(s) ~ exp(s) as
/// s -> -inf. Evaluated by adaptive Gauss-Kronrod quadrature, with the
/// convergent nondegenerate series below `kNondegenerateCrossover` and the
/// Sommerfeld expansion above `kDegenerateCrossover`.
///
/// Immutable; safe to share between threads.
class StatisticsModel {
 public:
  static constexpr double kNondegenerateCrossover = -15.0;
  static constexpr double kDegenerateCrossover = 30.0;

  StatisticsModel() = default;
  explicit StatisticsModel(StatisticsKind kind, QuadratureOptions quad = {},
                           double invert_rtol = 1e-12);

  static StatisticsModel boltzmann() { return StatisticsModel{StatisticsKind::Boltzmann}; }
  static StatisticsModel fermi_dirac_half(QuadratureOptions quad = {}) {
    return StatisticsModel{StatisticsKind::FermiDiracHalf, quad};
  }

  StatisticsKind kind() const noexcept { return kind_; }
  const QuadratureOptions& quadrature() const noexcept { return quad_; }
  double invert_rtol() const noexcept { return invert_rtol_; }
  bool is_boltzmann() const noexcept { return kind_ == StatisticsKind::Boltzmann; }

  /// F(s). Throws DomainError for non-finite s, QuadratureError if the
  /// adaptive rule fails to reach the configured tolerance.
  double eval(double s) const;

  /// F'(s) > 0. For Fermi-Dirac this is the order -1/2 integral.
  double eval_derivative(double s) const;

  /// eta = F/F'. Exactly 1 for Boltzmann.
  double eval_eta(double s) const;

  /// s with F(s) = u, |F(s) - u| <= invert_rtol * u.
  double invert(double u) const;

  friend bool operator==(const StatisticsModel& a, const StatisticsModel& b) {
    return a.kind_ == b.kind_ && a.quad_.rel_tol == b.quad_.rel_tol &&
           a.quad_.max_depth == b.quad_.max_depth && a.invert_rtol_ == b.invert_rtol_;
  }

 private:
  StatisticsKind kind_ = StatisticsKind::Boltzmann;
  QuadratureOptions quad_{};
  double invert_rtol_ = 1e-12;
};

/// Raw Fermi-Dirac integrals by adaptive quadrature over the whole real line,
/// without the tail substitutions. Exposed for cross-checks at the crossovers.
namespace fermi_dirac {
double half_by_quadrature(double s, const QuadratureOptions& quad);
double minus_half_by_quadrature(double s, const QuadratureOptions& quad);
double half_nondegenerate_series(double s);
double minus_half_nondegenerate_series(double s);
double half_degenerate_series(double s);
double minus_half_degenerate_series(double s);
}  // namespace fermi_dirac

}  // namespace ddsim
