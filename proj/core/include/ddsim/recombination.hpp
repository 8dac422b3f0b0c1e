#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ddsim {

using Vec3 = std::array<double, 3>;

/// r = rate * (g - exp(Phi1 + Phi2)); production form, valid for any statistics.
struct MassAction {
  double rate = 1.0;
  double g = 1.0;
  friend bool operator==(const MassAction&, const MassAction&) = default;
};

/// Shockley-Read-Hall: (u1 u2 - ni^2) / (tau2 (u1 + n1) + tau1 (u2 + n2)).
struct Srh {
  double n_i = 1.0;
  double n1 = 1.0;
  double n2 = 1.0;
  double tau1 = 1.0;
  double tau2 = 1.0;
  friend bool operator==(const Srh&, const Srh&) = default;
};

/// Auger: (u1 u2 - ni^2) (c1 u1 + c2 u2).
struct Auger {
  double n_i = 1.0;
  double c1 = 1.0;
  double c2 = 1.0;
  friend bool operator==(const Auger&, const Auger&) = default;
};

/// Impact ionization: c_n kappa(E, j1; a_n) + c_p kappa(E, j2; a_p).
struct Avalanche {
  double a_n = 1.0;
  double a_p = 1.0;
  double c_n = 1.0;
  double c_p = 1.0;
  friend bool operator==(const Avalanche&, const Avalanche&) = default;
};

using BulkRecombination = std::variant<MassAction, Srh, Auger, Avalanche>;

struct ZeroSurface {
  friend bool operator==(const ZeroSurface&, const ZeroSurface&) = default;
};

/// Surface analogue of SRH: (u1 u2 - ni^2) / (v2 (u1 + n1) + v1 (u2 + n2)).
struct SurfaceSrh {
  double n_i = 1.0;
  double n1 = 1.0;
  double n2 = 1.0;
  double v1 = 1.0;
  double v2 = 1.0;
  friend bool operator==(const SurfaceSrh&, const SurfaceSrh&) = default;
};

using SurfaceRecombination = std::variant<ZeroSurface, SurfaceSrh>;

std::string_view model_name(const BulkRecombination& model);
std::string_view model_name(const SurfaceRecombination& model);

/// Parameter positivity checks; returns a list of violations (empty if ok).
std::vector<std::string> validate_model(const BulkRecombination& model);
std::vector<std::string> validate_model(const SurfaceRecombination& model);

/// Avalanche kernel: 0 if e.j == 0, else |j| exp(-a / |e . j/|j||).
/// Total on finite input, always in [0, |j|].
double kappa(std::span<const double> e, std::span<const double> j, double a);

/// L_a = 4 / (e^2 a), the Lipschitz constant of t -> exp(-a/t) on [0, inf).
double kappa_lipschitz_constant(double a);

/// Pointwise Lipschitz certificate
///   |kappa(e1, j1) - kappa(e2, j2)| <= (2 L_a |e1| + 1) |j1 - j2| + L_a |j2| |e1 - e2|.
double kappa_lipschitz_bound(double a, double norm_e1, double norm_j2, double norm_dj,
                             double norm_de);

/// Pointwise inputs of a bulk rate at one collocation point.
struct BulkInputs {
  double u1 = 1.0;
  double u2 = 1.0;
  double Phi1 = 0.0;
  double Phi2 = 0.0;
  Vec3 grad_phi{};
  Vec3 j1{};
  Vec3 j2{};
};

/// The printed expression of the model. SRH and Auger are net recombination
/// (positive destroys carriers); MassAction and Avalanche are production.
/// Throws DomainError on negative densities.
double eval_bulk(const BulkRecombination& model, const BulkInputs& in);

/// Printed surface expression (net recombination per unit area).
double eval_surface(const SurfaceRecombination& model, double u1, double u2);

/// Contribution of the model to r^Omega, the production term on the
/// right-hand side of the continuity equations.
double bulk_production(const BulkRecombination& model, const BulkInputs& in);
double surface_production(const SurfaceRecombination& model, double u1, double u2);

/// Production for carrier k split as `generation - loss * u_k`, with every
/// factor other than u_k frozen at the given state. At that state the split
/// reproduces bulk_production exactly (up to rounding). loss >= 0.
struct LinearizedRate {
  double generation = 0.0;
  double loss = 0.0;
};

/// `carrier` is 1 (electrons) or 2 (holes).
LinearizedRate linearize_bulk(const BulkRecombination& model, int carrier, const BulkInputs& in);
LinearizedRate linearize_surface(const SurfaceRecombination& model, int carrier, double u1,
                                 double u2);

}  // namespace ddsim
