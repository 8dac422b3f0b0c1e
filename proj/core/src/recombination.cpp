#include "ddsim/recombination.hpp"

#include <cmath>
#include <numbers>

#include "ddsim/error.hpp"

namespace ddsim {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}


void require_nonnegative(double u1, double u2, const char* where) {
  if (!(u1 >= 0.0) || !(u2 >= 0.0)) {
    throw DomainError(std::string(where) + ": densities must be nonnegative");
  }
}

}  // namespace

std::string_view model_name(const BulkRecombination& model) {
  return std::visit(overloaded{[](const MassAction&) { return std::string_view("mass-action"); },
                               [](const Srh&) { return std::string_view("srh"); },
                               [](const Auger&) { return std::string_view("auger"); },
                               [](const Avalanche&) { return std::string_view("avalanche"); }},
                    model);
}

std::string_view model_name(const SurfaceRecombination& model) {
  return std::visit(overloaded{[](const ZeroSurface&) { return std::string_view("zero"); },
                               [](const SurfaceSrh&) { return std::string_view("surface-srh"); }},
                    model);
}

std::vector<std::string> validate_model(const BulkRecombination& model) {
  std::vector<std::string> out;
  const auto positive = [&out](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) out.push_back(std::string(name) + " must be positive");
  };
  std::visit(overloaded{[&](const MassAction& m) {
                          positive(m.rate, "mass-action.rate");
                          if (!(m.g >= 0.0)) out.emplace_back("mass-action.g must be nonnegative");
                        },
                        [&](const Srh& m) {
                          positive(m.n_i, "srh.n_i");
                          positive(m.n1, "srh.n1");
                          positive(m.n2, "srh.n2");
                          positive(m.tau1, "srh.tau1");
                          positive(m.tau2, "srh.tau2");
                        },
                        [&](const Auger& m) {
                          positive(m.n_i, "auger.n_i");
                          positive(m.c1, "auger.c1");
                          positive(m.c2, "auger.c2");
                        },
                        [&](const Avalanche& m) {
                          positive(m.a_n, "avalanche.a_n");
                          positive(m.a_p, "avalanche.a_p");
                          positive(m.c_n, "avalanche.c_n");
                          positive(m.c_p, "avalanche.c_p");
                        }},
             model);
  return out;
}

std::vector<std::string> validate_model(const SurfaceRecombination& model) {
  std::vector<std::string> out;
  if (const auto* m = std::get_if<SurfaceSrh>(&model)) {
    for (auto [v, name] : {std::pair{m->n_i, "surface-srh.n_i"}, std::pair{m->n1, "surface-srh.n1"},
                           std::pair{m->n2, "surface-srh.n2"}, std::pair{m->v1, "surface-srh.v1"},
                           std::pair{m->v2, "surface-srh.v2"}}) {
      if (!(v > 0.0) || !std::isfinite(v)) out.push_back(std::string(name) + " must be positive");
    }
  }
  return out;
}

double kappa(std::span<const double> e, std::span<const double> j, double a) {
  const double jnorm = norm(j);
  double dot = 0.0;
  for (std::size_t i = 0; i < std::min(e.size(), j.size()); ++i) dot += e[i] * j[i];
  if (jnorm == 0.0 || dot == 0.0) return 0.0;
  // exp(-a/t) underflows to exactly 0 long before a/t overflows.
  return jnorm * std::exp(-a / std::abs(dot / jnorm));
}

double kappa_lipschitz_constant(double a) {
  return 4.0 / (std::numbers::e * std::numbers::e * a);
}

double kappa_lipschitz_bound(double a, double norm_e1, double norm_j2, double norm_dj,
                             double norm_de) {
  const double la = kappa_lipschitz_constant(a);
  return (2.0 * la * norm_e1 + 1.0) * norm_dj + la * norm_j2 * norm_de;
}

double eval_bulk(const BulkRecombination& model, const BulkInputs& in) {
  require_nonnegative(in.u1, in.u2, "eval_bulk");
  return std::visit(
      overloaded{
          [&](const MassAction& m) { return m.rate * (m.g - std::exp(in.Phi1 + in.Phi2)); },
          [&](const Srh& m) {
            return (in.u1 * in.u2 - m.n_i * m.n_i) /
                   (m.tau2 * (in.u1 + m.n1) + m.tau1 * (in.u2 + m.n2));
          },
          [&](const Auger& m) {
            return (in.u1 * in.u2 - m.n_i * m.n_i) * (m.c1 * in.u1 + m.c2 * in.u2);
          },
          [&](const Avalanche& m) {
            return m.c_n * kappa(in.grad_phi, in.j1, m.a_n) +
                   m.c_p * kappa(in.grad_phi, in.j2, m.a_p);
          }},
      model);
}

double eval_surface(const SurfaceRecombination& model, double u1, double u2) {
  require_nonnegative(u1, u2, "eval_surface");
  return std::visit(overloaded{[](const ZeroSurface&) { return 0.0; },
                               [&](const SurfaceSrh& m) {
                                 return (u1 * u2 - m.n_i * m.n_i) /
                                        (m.v2 * (u1 + m.n1) + m.v1 * (u2 + m.n2));
                               }},
                    model);
}

double bulk_production(const BulkRecombination& model, const BulkInputs& in) {
  const double printed = eval_bulk(model, in);
  const bool is_net_recombination =
      std::holds_alternative<Srh>(model) || std::holds_alternative<Auger>(model);
  return is_net_recombination ? -printed : printed;
}

double surface_production(const SurfaceRecombination& model, double u1, double u2) {
  return -eval_surface(model, u1, u2);
}

LinearizedRate linearize_bulk(const BulkRecombination& model, int carrier, const BulkInputs& in) {
  require_nonnegative(in.u1, in.u2, "linearize_bulk");
  const double other = carrier == 1 ? in.u2 : in.u1;
  return std::visit(
      overloaded{
          [&](const MassAction& m) {
            // exp(Phi1 + Phi2) = u_k * (exp(Phi1 + Phi2) / u_k), second factor frozen.
            const double self = carrier == 1 ? in.u1 : in.u2;
            const double e = std::exp(in.Phi1 + in.Phi2);
            return LinearizedRate{m.rate * m.g, self > 0.0 ? m.rate * e / self : 0.0};
          },
          [&](const Srh& m) {
            const double den = m.tau2 * (in.u1 + m.n1) + m.tau1 * (in.u2 + m.n2);
            return LinearizedRate{m.n_i * m.n_i / den, other / den};
          },
          [&](const Auger& m) {
            const double f = m.c1 * in.u1 + m.c2 * in.u2;
            return LinearizedRate{m.n_i * m.n_i * f, other * f};
          },
          [&](const Avalanche&) { return LinearizedRate{eval_bulk(model, in), 0.0}; }},
      model);
}

LinearizedRate linearize_surface(const SurfaceRecombination& model, int carrier, double u1,
                                 double u2) {
  require_nonnegative(u1, u2, "linearize_surface");
  if (const auto* m = std::get_if<SurfaceSrh>(&model)) {
    const double den = m->v2 * (u1 + m->n1) + m->v1 * (u2 + m->n2);
    const double other = carrier == 1 ? u2 : u1;
    return LinearizedRate{m->n_i * m->n_i / den, other / den};
  }
  return {};
}

}  // namespace ddsim
