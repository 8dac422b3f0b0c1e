#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ddsim/device.hpp"
#include "ddsim/error.hpp"
#include "ddsim/mesh.hpp"
#include "ddsim/nonlinear_poisson.hpp"
#include "ddsim/operators.hpp"
#include "ddsim/recombination.hpp"
#include "ddsim/statistics.hpp"

namespace ddsim {

struct PhysicsModels {
  StatisticsModel f1 = StatisticsModel::boltzmann();
  StatisticsModel f2 = StatisticsModel::boltzmann();
  /// Bulk models; their productions add up.
  std::vector<BulkRecombination> bulk;
  /// Flux discretization; the enhanced variant picks up F_k per carrier.
  FluxScheme::Kind scheme = FluxScheme::Kind::ScharfetterGummel;
  friend bool operator==(const PhysicsModels&, const PhysicsModels&) = default;
};

struct TimeStepperConfig {
  double t_end = 1.0;
  double dt = 1e-2;
  double dt_min = 1e-10;
  double dt_max = 1.0;
  double gummel_tol = 1e-10;
  int gummel_max_iter = 200;
  /// Anderson mixing depth for the Gummel fixed point; 0 gives plain sweeps.
  int anderson_depth = 20;
  /// Blow-up proxy level above which a growing history is reported.
  double blowup_threshold = 1e3;
  int max_steps = 1000000;

  /// Throws DomainError naming the first violated bound.
  void validate() const;
  friend bool operator==(const TimeStepperConfig&, const TimeStepperConfig&) = default;
};

/// Cellwise state. u_k = F_k(chi_k), chi_1 = Phi_1 - phi, chi_2 = Phi_2 + phi.
struct CarrierState {
  double t = 0.0;
  Vector phi;
  Vector Phi1;
  Vector Phi2;
  Vector chi1;
  Vector chi2;
  Vector u1;
  Vector u2;

  const Vector& u(int carrier) const { return carrier == 1 ? u1 : u2; }
  const Vector& Phi(int carrier) const { return carrier == 1 ? Phi1 : Phi2; }
  const Vector& chi(int carrier) const { return carrier == 1 ? chi1 : chi2; }
};

/// Contact values at one time, one entry per contact.
struct ContactData {
  std::vector<double> phi;
  std::array<std::vector<double>, 2> Phi;
  std::array<std::vector<double>, 2> chi;
  std::array<std::vector<double>, 2> u;
};

/// Meshed device with models and the factorized Poisson operator.
class Simulation {
 public:
  /// Resolves ohmic contacts and validates the device; throws DomainError
  /// with the validation summary on failure.
  Simulation(DeviceSpec spec, Resolution resolution, PhysicsModels models);

  const DeviceSpec& spec() const { return spec_; }
  const Mesh& mesh() const { return mesh_; }
  const PhysicsModels& models() const { return models_; }
  const StatisticsModel& stats(int carrier) const { return carrier == 1 ? models_.f1 : models_.f2; }
  std::shared_ptr<const PoissonOperator> poisson() const { return poisson_; }
  FluxScheme scheme(int carrier) const;
  ContactData contact_data(double t) const;

  /// Faces carrying boundary or interfacial recombination, with their model.
  const std::vector<int>& surface_faces() const { return surface_faces_; }
  const SurfaceRecombination& surface_model(int k) const { return *surface_models_[k]; }
  /// True if the k-th surface face is an interior interface face.
  bool surface_is_interface(int k) const { return surface_interface_[k]; }

 private:
  DeviceSpec spec_;
  Mesh mesh_;
  PhysicsModels models_;
  std::shared_ptr<const PoissonOperator> poisson_;
  std::vector<int> surface_faces_;
  std::vector<const SurfaceRecombination*> surface_models_;
  std::vector<bool> surface_interface_;
};

/// Builds a consistent state from potential and quasi-Fermi levels.
CarrierState make_state(const Simulation& sim, double t, Vector phi, Vector Phi1, Vector Phi2);

/// Solves the nonlinear Poisson problem for the given quasi-Fermi levels at t.
CarrierState state_from_quasi_fermi(const Simulation& sim, double t, const Vector& Phi1,
                                    const Vector& Phi2);

/// Thermal equilibrium at t = 0.
CarrierState equilibrium_initial_state(const Simulation& sim);

struct DataSplit {
  Vector phi_d;
  Vector Phi1_d;
  Vector Phi2_d;
};

/// phi_d = P^{-1}(data load); Phi_k^d is the discrete A_{mu_k}-harmonic lift of
/// the contact quasi-Fermi levels (zero without contacts).
DataSplit split_data(const Simulation& sim, double t);

/// Face fluxes of both carriers and cell reconstructions.
struct CurrentField {
  /// Particle flux per face: interior faces minus -> plus, Dirichlet faces
  /// outward, 0 elsewhere.
  std::array<std::vector<double>, 2> flux;
  /// Cell-centered particle flux densities and potential gradient.
  std::array<std::vector<Vec3>, 2> cell_flux;
  std::vector<Vec3> grad_phi;
};

CurrentField compute_currents(const Simulation& sim, const CarrierState& state);

/// Electric current into the device through a contact: sum over its faces of
/// (electron outflow - hole outflow).
double terminal_current(const Simulation& sim, const std::array<std::vector<double>, 2>& flux,
                        int contact);

/// Rates and fluxes actually used by the continuity solves of a step.
struct StepRecord {
  double dt = 0.0;
  int gummel_iterations = 0;
  double gummel_update = 0.0;
  std::array<std::vector<double>, 2> face_flux;
  /// Production per unit volume, per cell.
  std::array<Vector, 2> bulk_rate;
  /// Production per unit area on Simulation::surface_faces().
  std::array<std::vector<double>, 2> surface_rate;
};

/// Thrown by gummel_step when a step must be retried with a smaller dt.
class StepRejected : public Error {
 public:
  using Error::Error;
};

struct StepResult {
  CarrierState state;
  StepRecord record;
};

/// One implicit-Euler step, Gummel-decoupled, ending with a corrector sweep.
StepResult gummel_step(const Simulation& sim, const CarrierState& state, double dt,
                       const TimeStepperConfig& config);

struct BalanceResidual {
  std::array<double, 2> residual{};
  std::array<double, 2> scale{};
  /// Interfacial part of the surface term, per carrier.
  std::array<double, 2> interface_load{};
  double relative() const;
};

/// |sum V (u' - u)/dt - boundary inflow - surface production - bulk production|
/// per carrier; scale is max(1, total absolute throughput + mass content / dt).
BalanceResidual balance_report(const Simulation& sim, const CarrierState& prev,
                               const CarrierState& next, const StepRecord& record);

/// max over cells and carriers of |grad Phi_k| plus max |Phi_k|.
double blowup_proxy(const Simulation& sim, const CarrierState& state);

struct BlowUpReport {
  bool detected = false;
  double t_star = 0.0;
  std::string reason;
  std::vector<double> times;
  std::vector<double> norms;
};

/// Flags the last sample if it exceeds the threshold and the last three
/// samples increase strictly; `dt_collapsed` flags a step-size collapse.
BlowUpReport detect_blowup(const std::vector<double>& times, const std::vector<double>& norms,
                           const TimeStepperConfig& config, bool dt_collapsed = false);

enum class RunStatus { Completed, BlowUp };

struct StepEvent {
  const CarrierState& state;
  const StepRecord* record;      ///< null for the initial state
  const BalanceResidual* balance;  ///< null for the initial state
  double proxy;
};

struct RunResult {
  RunStatus status = RunStatus::Completed;
  std::vector<CarrierState> states;
  std::vector<StepRecord> records;
  std::vector<BalanceResidual> balances;
  BlowUpReport blowup;
  int accepted = 0;
  int rejected = 0;
  int gummel_iterations = 0;
};

/// Marches from `initial` to config.t_end or a detected blow-up. States are
/// kept only if `keep_states`; the observer sees every accepted state.
RunResult run(const Simulation& sim, const CarrierState& initial, const TimeStepperConfig& config,
              const std::function<void(const StepEvent&)>& observer = {},
              bool keep_states = true);

}  // namespace ddsim
