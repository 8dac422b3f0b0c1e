#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ddsim/device.hpp"
#include "ddsim/linear_solver.hpp"
#include "ddsim/mesh.hpp"
#include "ddsim/statistics.hpp"

namespace ddsim {

/// Which boundary rows were closed and how.
struct BoundaryClosure {
  std::vector<int> dirichlet_faces;  ///< ghost value at the face, half-cell distance
  std::vector<int> robin_faces;      ///< capacity * area added to the diagonal
};

/// Assembled finite-volume operator. Rows are cells.
struct SparseOperator {
  SparseMatrix matrix;
  BoundaryClosure closure;

  int size() const { return static_cast<int>(matrix.rows()); }
  Vector apply(const Vector& x) const { return matrix * x; }
};

enum class Coefficient { Permittivity, Mobility1, Mobility2 };

/// Two-point transmissibility of every face for coefficient `weight * tensor`:
/// interior faces harmonic-average the two half-cells, A / (d-/rho- + d+/rho+);
/// Dirichlet faces use the single half-cell A rho / d; other boundary faces 0.
std::vector<double> face_transmissibilities(const DeviceSpec& spec, const Mesh& mesh,
                                            Coefficient coefficient,
                                            std::span<const double> cell_weight = {});

/// Robin-Poisson operator P: -div(eps grad .) with homogeneous Dirichlet
/// closure on contacts and capacity masses on Robin faces. SPD.
/// Throws SolverError if P is singular (no contact and no capacity).
SparseOperator assemble_poisson(const DeviceSpec& spec, const Mesh& mesh);

/// Right-hand side of the linear Poisson problem at time t: cell-integrated
/// bulk doping, sheet doping, Robin loads and the Dirichlet lift.
/// P^{-1} of it is the data part phi_d of the potential.
Vector poisson_data_load(const DeviceSpec& spec, const Mesh& mesh, double t);

/// Elliptic operator A_rho = -div(weight * tensor grad .) with homogeneous
/// Dirichlet on the contacts and no Robin masses. Throws DomainError on a
/// nonpositive weight.
SparseOperator assemble_elliptic(const DeviceSpec& spec, const Mesh& mesh,
                                 std::span<const double> cell_weight, Coefficient coefficient);

/// B(x) = x / (e^x - 1), B(0) = 1.
double bernoulli(double x);

struct FluxScheme {
  enum class Kind { CentralDiffusion, ScharfetterGummel, ScharfetterGummelEnhanced };
  Kind kind = Kind::ScharfetterGummel;
  /// Statistics providing the degeneracy factor; required for the enhanced variant.
  std::optional<StatisticsModel> statistics;

  static FluxScheme central() { return {Kind::CentralDiffusion, std::nullopt}; }
  static FluxScheme scharfetter_gummel() { return {Kind::ScharfetterGummel, std::nullopt}; }
  static FluxScheme enhanced(const StatisticsModel& s) {
    return {Kind::ScharfetterGummelEnhanced, s};
  }
};

/// Linear two-point flux N = a * u_left - b * u_right (left -> right).
struct FluxCoefficients {
  double a = 0.0;
  double b = 0.0;
};

/// Face-averaged degeneracy factor: the difference quotient
/// (s_R - s_L) / (ln u_R - ln u_L), so that equal quasi-Fermi levels give
/// exactly zero flux. Exactly 1 for Boltzmann.
double face_eta(const StatisticsModel& stats, double u_left, double u_right, double s_left,
                double s_right);

/// `drop` is the carrier drift potential psi_L - psi_R (psi = phi for
/// electrons, -phi for holes); `transmissibility` is mobility * area / distance.
FluxCoefficients sg_coefficients(const FluxScheme& scheme, double u_left, double u_right,
                                 double s_left, double s_right, double drop,
                                 double transmissibility);

/// Particle flux from left to right. Throws DomainError for nonpositive densities.
double sg_flux(const FluxScheme& scheme, double u_left, double u_right, double s_left,
               double s_right, double drop, double transmissibility);

/// Frozen coefficients of a continuity assembly.
struct ContinuityInputs {
  std::span<const double> phi;  ///< cell potential
  std::span<const double> u;    ///< density iterate of this carrier (for eta)
  std::span<const double> s;    ///< chemical-potential iterate of this carrier
  std::vector<double> contact_phi;      ///< per contact, at the new time
  std::vector<double> contact_density;  ///< per contact, F_k(chi^D)
  std::vector<double> contact_chi;      ///< per contact
};

/// Discrete -div j_k: (op * u)_i is the net particle outflow of cell i, and
/// op * u - load adds the Dirichlet inflow. `faces[f]` reproduces face fluxes:
/// interior faces minus -> plus, Dirichlet faces outward.
struct ContinuitySystem {
  SparseOperator op;
  Vector load;
  std::vector<FluxCoefficients> faces;
  std::vector<double> boundary_density;  ///< per face; contact density on Dirichlet faces
};

ContinuitySystem assemble_continuity(const DeviceSpec& spec, const Mesh& mesh,
                                     const ContinuityInputs& inputs, const FluxScheme& scheme,
                                     int carrier);

/// Face fluxes of a continuity system at density u (orientation as above; 0 on
/// Robin/Neumann faces).
std::vector<double> face_fluxes(const ContinuitySystem& system, const Mesh& mesh,
                                std::span<const double> u);

/// Distributes per-face rates (per unit area) to cells: a boundary face
/// deposits rate * area into its cell, an interior face half into each side.
/// Throws GeometryError on an out-of-range face index.
Vector apply_surface_load(const Mesh& mesh, std::span<const int> faces,
                          std::span<const double> rate_per_face);

}  // namespace ddsim
