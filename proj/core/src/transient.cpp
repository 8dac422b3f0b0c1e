#include "ddsim/transient.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <deque>
#include <string>

#include <Eigen/QR>

namespace ddsim {

namespace {

using Triplet = Eigen::Triplet<double>;

double norm3(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

/// Two-point cell gradient of a cell field; Dirichlet faces use the contact
/// value, other boundary faces are skipped.
std::vector<Vec3> cell_gradient(const Mesh& mesh, const Vector& field,
                                const std::vector<double>& contact_values) {
  std::vector<Vec3> grad(mesh.cells.size(), Vec3{});
  for (int c = 0; c < mesh.cell_count(); ++c) {
    std::array<double, 2> sum{};
    std::array<int, 2> count{};
    for (int fi : mesh.cell_faces[c]) {
      const Face& f = mesh.faces[fi];
      if (!f.is_boundary()) {
        sum[f.axis] += (field[f.plus] - field[f.minus]) / (f.dist_minus + f.dist_plus);
        ++count[f.axis];
      } else if (f.kind == FaceKind::Dirichlet) {
        sum[f.axis] +=
            f.outward_sign() * (contact_values[f.tag] - field[c]) / f.boundary_distance();
        ++count[f.axis];
      }
    }
    for (int a = 0; a < 2; ++a) {
      if (count[a] > 0) grad[c][a] = sum[a] / count[a];
    }
  }
  return grad;
}

/// Cell average of the face flux densities along each axis (no-flux faces count as 0).
std::vector<Vec3> cell_flux_density(const Mesh& mesh, const std::vector<double>& flux) {
  std::vector<Vec3> out(mesh.cells.size(), Vec3{});
  for (int c = 0; c < mesh.cell_count(); ++c) {
    std::array<double, 2> sum{};
    std::array<int, 2> count{};
    for (int fi : mesh.cell_faces[c]) {
      const Face& f = mesh.faces[fi];
      const double along_axis = f.is_boundary() ? f.outward_sign() * flux[fi] : flux[fi];
      sum[f.axis] += along_axis / f.area;
      ++count[f.axis];
    }
    for (int a = 0; a < 2; ++a) {
      if (count[a] > 0) out[c][a] = sum[a] / count[a];
    }
  }
  return out;
}

CurrentField reconstruct(const Simulation& sim, std::array<std::vector<double>, 2> flux,
                         const Vector& phi, const ContactData& contact) {
  CurrentField cf;
  cf.cell_flux[0] = cell_flux_density(sim.mesh(), flux[0]);
  cf.cell_flux[1] = cell_flux_density(sim.mesh(), flux[1]);
  cf.grad_phi = cell_gradient(sim.mesh(), phi, contact.phi);
  cf.flux = std::move(flux);
  return cf;
}

ContinuitySystem assemble_for(const Simulation& sim, int k, const Vector& phi,
                              const CarrierState& iterate, const ContactData& contact) {
  ContinuityInputs in{std::span<const double>(phi.data(), phi.size()),
                      std::span<const double>(iterate.u(k).data(), iterate.u(k).size()),
                      std::span<const double>(iterate.chi(k).data(), iterate.chi(k).size()),
                      contact.phi,
                      contact.u[k - 1],
                      contact.chi[k - 1]};
  return assemble_continuity(sim.spec(), sim.mesh(), in, sim.scheme(k), k);
}

struct CarrierSolve {
  Vector u;
  std::vector<double> face_flux;
  Vector bulk_rate;
  std::vector<double> surface_rate;
};

/// Backward-Euler continuity solve for carrier k with recombination split as
/// generation - loss * u_k, factors frozen at `iterate` and `lag`.
CarrierSolve solve_carrier(const Simulation& sim, int k, double dt, const Vector& phi,
                           const CarrierState& old, const CarrierState& iterate,
                           const CurrentField& lag, const ContactData& contact) {
  const Mesh& mesh = sim.mesh();
  const int n = mesh.cell_count();
  const auto sys = assemble_for(sim, k, phi, iterate, contact);

  Vector gen = Vector::Zero(n);
  Vector loss = Vector::Zero(n);
  for (const auto& model : sim.models().bulk) {
    for (int i = 0; i < n; ++i) {
      const BulkInputs in{iterate.u1[i], iterate.u2[i], iterate.Phi1[i], iterate.Phi2[i],
                          lag.grad_phi[i],   lag.cell_flux[0][i], lag.cell_flux[1][i]};
      const auto lin = linearize_bulk(model, k, in);
      gen[i] += lin.generation;
      loss[i] += lin.loss;
    }
  }

  std::vector<Triplet> triplets;
  Vector rhs = sys.load;
  for (int i = 0; i < n; ++i) {
    const double V = mesh.cells[i].volume;
    triplets.emplace_back(i, i, V / dt + V * loss[i]);
    rhs[i] += V * old.u(k)[i] / dt + V * gen[i];
  }
  const auto& sfaces = sim.surface_faces();
  std::vector<LinearizedRate> slin(sfaces.size());
  for (std::size_t s = 0; s < sfaces.size(); ++s) {
    const Face& f = mesh.faces[sfaces[s]];
    if (f.is_boundary()) {
      const int c = f.boundary_cell();
      slin[s] = linearize_surface(sim.surface_model(s), k, iterate.u1[c], iterate.u2[c]);
      triplets.emplace_back(c, c, f.area * slin[s].loss);
      rhs[c] += f.area * slin[s].generation;
    } else {
      const int m = f.minus;
      const int p = f.plus;
      slin[s] = linearize_surface(sim.surface_model(s), k, 0.5 * (iterate.u1[m] + iterate.u1[p]),
                                  0.5 * (iterate.u2[m] + iterate.u2[p]));
      const double w = 0.25 * f.area * slin[s].loss;
      for (int row : {m, p}) {
        triplets.emplace_back(row, m, w);
        triplets.emplace_back(row, p, w);
        rhs[row] += 0.5 * f.area * slin[s].generation;
      }
    }
  }
  SparseMatrix extra(n, n);
  extra.setFromTriplets(triplets.begin(), triplets.end());
  const SparseMatrix M = sys.op.matrix + extra;

  CarrierSolve out;
  try {
    out.u = solve_linear(M, rhs, MatrixStructure::General);
  } catch (const SolverError& e) {
    throw StepRejected(std::string("continuity solve failed: ") + e.what());
  }
  for (int i = 0; i < n; ++i) {
    if (!(out.u[i] > 0.0) || !std::isfinite(out.u[i])) {
      throw StepRejected("nonpositive density of carrier " + std::to_string(k) + " in cell " +
                         std::to_string(i));
    }
  }
  out.face_flux = face_fluxes(sys, mesh, std::span<const double>(out.u.data(), out.u.size()));
  out.bulk_rate = gen - loss.cwiseProduct(out.u);
  out.surface_rate.resize(sfaces.size());
  for (std::size_t s = 0; s < sfaces.size(); ++s) {
    const Face& f = mesh.faces[sfaces[s]];
    const double us =
        f.is_boundary() ? out.u[f.boundary_cell()] : 0.5 * (out.u[f.minus] + out.u[f.plus]);
    out.surface_rate[s] = slin[s].generation - slin[s].loss * us;
  }
  return out;
}

/// Anderson mixing for the fixed-point map x -> g(x) of the Gummel sweep.
class AndersonMixer {
 public:
  explicit AndersonMixer(int depth) : depth_(depth) {}

  Vector next(const Vector& x, const Vector& g) {
    const Vector f = g - x;
    if (depth_ <= 0) return g;
    if (last_f_.size() > 0) {
      df_.push_back(f - last_f_);
      dg_.push_back(g - last_g_);
      if (static_cast<int>(df_.size()) > depth_) {
        df_.pop_front();
        dg_.pop_front();
      }
    }
    last_f_ = f;
    last_g_ = g;
    if (df_.empty()) return g;
    const int m = static_cast<int>(df_.size());
    Eigen::MatrixXd F(f.size(), m);
    Eigen::MatrixXd G(f.size(), m);
    for (int j = 0; j < m; ++j) {
      F.col(j) = df_[j];
      G.col(j) = dg_[j];
    }
    const Vector gamma = F.colPivHouseholderQr().solve(f);
    if (!gamma.allFinite()) {
      reset();
      return g;
    }
    return g - G * gamma;
  }

  void reset() {
    df_.clear();
    dg_.clear();
    last_f_.resize(0);
    last_g_.resize(0);
  }

 private:
  int depth_;
  std::deque<Vector> df_;
  std::deque<Vector> dg_;
  Vector last_f_;
  Vector last_g_;
};

}  // namespace

void TimeStepperConfig::validate() const {
  if (!(t_end > 0.0)) throw DomainError("stepper: t_end must be positive");
  if (!(dt_min > 0.0)) throw DomainError("stepper: dt_min must be positive");
  if (!(dt_min <= dt && dt <= dt_max)) {
    throw DomainError("stepper: need dt_min <= dt <= dt_max");
  }
  if (!(gummel_tol > 0.0)) throw DomainError("stepper: gummel_tol must be positive");
  if (gummel_max_iter < 1) throw DomainError("stepper: gummel_max_iter must be at least 1");
  if (!(blowup_threshold > 0.0)) throw DomainError("stepper: blowup_threshold must be positive");
  if (max_steps < 1) throw DomainError("stepper: max_steps must be at least 1");
  if (anderson_depth < 0) throw DomainError("stepper: anderson_depth must be nonnegative");
}

Simulation::Simulation(DeviceSpec spec, Resolution resolution, PhysicsModels models)
    : spec_(std::move(spec)), models_(std::move(models)) {
  for (const auto& m : models_.bulk) {
    const auto v = validate_model(m);
    if (!v.empty()) throw DomainError(v.front());
  }
  resolve_ohmic_contacts(spec_, models_.f1, models_.f2);
  const auto report = validate_device(spec_);
  if (!report.ok()) throw DomainError(report.summary());
  mesh_ = build_mesh(spec_, resolution);
  poisson_ = PoissonOperator::build(spec_, mesh_);

  auto add = [&](const std::vector<int>& faces, const SurfaceRecombination& model,
                 bool interface) {
    if (std::holds_alternative<ZeroSurface>(model)) return;
    for (int f : faces) {
      surface_faces_.push_back(f);
      surface_models_.push_back(&model);
      surface_interface_.push_back(interface);
    }
  };
  for (std::size_t k = 0; k < spec_.boundary.robin.size(); ++k) {
    add(mesh_.robin_faces[k], spec_.boundary.robin[k].recombination, false);
  }
  add(mesh_.neumann_faces, spec_.boundary.neumann_recombination, false);
  for (std::size_t k = 0; k < spec_.interfaces.size(); ++k) {
    add(mesh_.interface_faces[k], spec_.interfaces[k].recombination, true);
  }
}

FluxScheme Simulation::scheme(int carrier) const {
  switch (models_.scheme) {
    case FluxScheme::Kind::CentralDiffusion: return FluxScheme::central();
    case FluxScheme::Kind::ScharfetterGummel: return FluxScheme::scharfetter_gummel();
    case FluxScheme::Kind::ScharfetterGummelEnhanced: return FluxScheme::enhanced(stats(carrier));
  }
  return FluxScheme::scharfetter_gummel();
}

ContactData Simulation::contact_data(double t) const {
  ContactData d;
  for (const auto& c : spec_.boundary.contacts) {
    const double phi = c.phi_at(t);
    const double chi1 = c.Phi1_at(t) - phi;
    const double chi2 = c.Phi2_at(t) + phi;
    d.phi.push_back(phi);
    d.Phi[0].push_back(c.Phi1_at(t));
    d.Phi[1].push_back(c.Phi2_at(t));
    d.chi[0].push_back(chi1);
    d.chi[1].push_back(chi2);
    d.u[0].push_back(models_.f1.eval(chi1));
    d.u[1].push_back(models_.f2.eval(chi2));
  }
  return d;
}

CarrierState make_state(const Simulation& sim, double t, Vector phi, Vector Phi1, Vector Phi2) {
  CarrierState s;
  s.t = t;
  s.chi1 = Phi1 - phi;
  s.chi2 = Phi2 + phi;
  s.u1.resize(phi.size());
  s.u2.resize(phi.size());
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    s.u1[i] = sim.stats(1).eval(s.chi1[i]);
    s.u2[i] = sim.stats(2).eval(s.chi2[i]);
  }
  s.phi = std::move(phi);
  s.Phi1 = std::move(Phi1);
  s.Phi2 = std::move(Phi2);
  return s;
}

CarrierState state_from_quasi_fermi(const Simulation& sim, double t, const Vector& Phi1,
                                    const Vector& Phi2) {
  const Vector phi_d = sim.poisson()->solver->solve(poisson_data_load(sim.spec(), sim.mesh(), t));
  NonlinearPoissonProblem problem{sim.poisson(), sim.stats(1), sim.stats(2),
                                  Phi1 - phi_d,  Phi2 + phi_d, {},           std::nullopt};
  const auto sol = solve_operator_S(problem);
  return make_state(sim, t, phi_d + sol.phi, Phi1, Phi2);
}

CarrierState equilibrium_initial_state(const Simulation& sim) {
  const auto eq = equilibrium_state(sim.spec(), sim.mesh(), sim.stats(1), sim.stats(2), 0.0);
  const int n = sim.mesh().cell_count();
  return make_state(sim, 0.0, eq.phi, Vector::Zero(n), Vector::Zero(n));
}

DataSplit split_data(const Simulation& sim, double t) {
  const Mesh& mesh = sim.mesh();
  const int n = mesh.cell_count();
  DataSplit out;
  out.phi_d = sim.poisson()->solver->solve(poisson_data_load(sim.spec(), mesh, t));
  const auto contact = sim.contact_data(t);
  const std::vector<double> ones(n, 1.0);
  for (int k = 1; k <= 2; ++k) {
    Vector& lift = k == 1 ? out.Phi1_d : out.Phi2_d;
    lift = Vector::Zero(n);
    bool any_contact = false;
    for (const auto& faces : mesh.contact_faces) any_contact = any_contact || !faces.empty();
    if (!any_contact) continue;
    const auto coefficient = k == 1 ? Coefficient::Mobility1 : Coefficient::Mobility2;
    const auto A = assemble_elliptic(sim.spec(), mesh, ones, coefficient);
    const auto trans = face_transmissibilities(sim.spec(), mesh, coefficient);
    Vector load = Vector::Zero(n);
    for (int fi : A.closure.dirichlet_faces) {
      const Face& f = mesh.faces[fi];
      load[f.boundary_cell()] += trans[fi] * contact.Phi[k - 1][f.tag];
    }
    lift = solve_linear(A.matrix, load, MatrixStructure::SymmetricPositiveDefinite);
  }
  return out;
}

CurrentField compute_currents(const Simulation& sim, const CarrierState& state) {
  const auto contact = sim.contact_data(state.t);
  std::array<std::vector<double>, 2> flux;
  for (int k = 1; k <= 2; ++k) {
    const auto sys = assemble_for(sim, k, state.phi, state, contact);
    flux[k - 1] = face_fluxes(sys, sim.mesh(),
                              std::span<const double>(state.u(k).data(), state.u(k).size()));
  }
  return reconstruct(sim, std::move(flux), state.phi, contact);
}

double terminal_current(const Simulation& sim, const std::array<std::vector<double>, 2>& flux,
                        int contact) {
  double current = 0.0;
  for (int fi : sim.mesh().contact_faces.at(contact)) current += flux[0][fi] - flux[1][fi];
  return current;
}

StepResult gummel_step(const Simulation& sim, const CarrierState& state, double dt,
                       const TimeStepperConfig& config) {
  if (!(dt > 0.0)) throw DomainError("gummel_step: dt must be positive");
  const double t1 = state.t + dt;
  const int n = sim.mesh().cell_count();
  const auto contact = sim.contact_data(t1);
  const Vector phi_d =
      sim.poisson()->solver->solve(poisson_data_load(sim.spec(), sim.mesh(), t1));

  CarrierState iterate = state;
  const bool needs_currents =
      std::any_of(sim.models().bulk.begin(), sim.models().bulk.end(),
                  [](const BulkRecombination& m) { return std::holds_alternative<Avalanche>(m); });
  CurrentField lag;
  if (!needs_currents) {
    lag.grad_phi.assign(n, Vec3{});
    lag.cell_flux[0].assign(n, Vec3{});
    lag.cell_flux[1].assign(n, Vec3{});
  }
  Vector guess = state.phi - phi_d;
  // Quasi-Fermi levels fed to the Poisson solve, both carriers stacked.
  Vector x(2 * n);
  x << state.Phi1, state.Phi2;
  AndersonMixer mixer(config.anderson_depth);
  double best = std::numeric_limits<double>::infinity();
  StepResult out;
  out.record.dt = dt;
  bool converged = false;
  for (int sweep = 1; sweep <= config.gummel_max_iter + 1; ++sweep) {
    NonlinearPoissonProblem problem{sim.poisson(), sim.stats(1),          sim.stats(2),
                                    x.head(n) - phi_d, x.tail(n) + phi_d, {},
                                    std::nullopt};
    PoissonSolution poisson;
    try {
      poisson = solve_operator_S(problem, &guess);
    } catch (const SolverError& e) {
      throw StepRejected(std::string("poisson solve failed: ") + e.what());
    }
    guess = poisson.phi;
    const Vector phi = phi_d + poisson.phi;

    // Density-dependent factors are frozen at the densities implied by x.
    iterate = make_state(sim, t1, phi, x.head(n), x.tail(n));
    // Field and current factors are lagged: taken from the same iterate, so
    // the sweep stays a function of x alone and the mixing sees all of it.
    if (needs_currents) lag = compute_currents(sim, iterate);
    const auto c1 = solve_carrier(sim, 1, dt, phi, state, iterate, lag, contact);
    const auto c2 = solve_carrier(sim, 2, dt, phi, state, iterate, lag, contact);

    Vector chi1(n), chi2(n);
    for (int i = 0; i < n; ++i) {
      chi1[i] = sim.stats(1).invert(c1.u[i]);
      chi2[i] = sim.stats(2).invert(c2.u[i]);
    }
    CarrierState next;
    next.t = t1;
    next.phi = phi;
    next.Phi1 = chi1 + phi;
    next.Phi2 = chi2 - phi;
    next.chi1 = std::move(chi1);
    next.chi2 = std::move(chi2);
    next.u1 = c1.u;
    next.u2 = c2.u;
    Vector g(2 * n);
    g << next.Phi1, next.Phi2;
    const double update = (g - x).lpNorm<Eigen::Infinity>();

    out.record.face_flux = {c1.face_flux, c2.face_flux};
    out.record.bulk_rate = {c1.bulk_rate, c2.bulk_rate};
    out.record.surface_rate = {c1.surface_rate, c2.surface_rate};
    out.record.gummel_iterations = sweep;
    if (!converged) out.record.gummel_update = update;
    iterate = std::move(next);
    if (converged) break;  // corrector sweep done
    if (!std::isfinite(update)) throw StepRejected("gummel: non-finite update");
    if (update <= config.gummel_tol) {
      converged = true;
      x = g;
      continue;
    }
    if (sweep == config.gummel_max_iter) {
      throw StepRejected("gummel: no convergence in " + std::to_string(config.gummel_max_iter) +
                         " sweeps (last update " + sci(update) + ")");
    }
    // Restart the mixing history when it stops helping.
    if (update > 10.0 * best) mixer.reset();
    best = std::min(best, update);
    x = mixer.next(x, g);
  }
  out.state = std::move(iterate);
  return out;
}

double BalanceResidual::relative() const {
  return std::max(residual[0] / scale[0], residual[1] / scale[1]);
}

BalanceResidual balance_report(const Simulation& sim, const CarrierState& prev,
                               const CarrierState& next, const StepRecord& record) {
  const Mesh& mesh = sim.mesh();
  BalanceResidual out;
  for (int k = 1; k <= 2; ++k) {
    double storage = 0.0, inflow = 0.0, bulk = 0.0, surface = 0.0, interface = 0.0;
    double throughput = 0.0;
    for (int i = 0; i < mesh.cell_count(); ++i) {
      const double V = mesh.cells[i].volume;
      const double s = V * (next.u(k)[i] - prev.u(k)[i]) / record.dt;
      const double r = V * record.bulk_rate[k - 1][i];
      storage += s;
      bulk += r;
      // Mass content turned over per unit time bounds the rounding floor of s.
      throughput += std::abs(s) + std::abs(r) +
                    V * std::max(std::abs(next.u(k)[i]), std::abs(prev.u(k)[i])) / record.dt;
    }
    for (const auto& faces : mesh.contact_faces) {
      for (int fi : faces) {
        inflow -= record.face_flux[k - 1][fi];
        throughput += std::abs(record.face_flux[k - 1][fi]);
      }
    }
    const auto& sfaces = sim.surface_faces();
    for (std::size_t s = 0; s < sfaces.size(); ++s) {
      const double mass = mesh.faces[sfaces[s]].area * record.surface_rate[k - 1][s];
      surface += mass;
      if (sim.surface_is_interface(s)) interface += mass;
      throughput += std::abs(mass);
    }
    out.residual[k - 1] = std::abs(storage - inflow - bulk - surface);
    out.scale[k - 1] = std::max(1.0, throughput);
    out.interface_load[k - 1] = interface;
  }
  return out;
}

double blowup_proxy(const Simulation& sim, const CarrierState& state) {
  const auto contact = sim.contact_data(state.t);
  double grad = 0.0;
  double level = 0.0;
  for (int k = 1; k <= 2; ++k) {
    for (const auto& g : cell_gradient(sim.mesh(), state.Phi(k), contact.Phi[k - 1])) {
      grad = std::max(grad, norm3(g));
    }
    level = std::max(level, state.Phi(k).lpNorm<Eigen::Infinity>());
  }
  return grad + level;
}

BlowUpReport detect_blowup(const std::vector<double>& times, const std::vector<double>& norms,
                           const TimeStepperConfig& config, bool dt_collapsed) {
  BlowUpReport report;
  report.times = times;
  report.norms = norms;
  if (dt_collapsed) {
    report.detected = true;
    report.reason = "step-size collapse";
    report.t_star = times.empty() ? 0.0 : times.back();
    return report;
  }
  const std::size_t n = norms.size();
  if (n < 3) return report;
  const bool increasing = norms[n - 3] < norms[n - 2] && norms[n - 2] < norms[n - 1];
  if (increasing && norms[n - 1] > config.blowup_threshold) {
    report.detected = true;
    report.reason = "norm growth";
    report.t_star = times.back();
  }
  return report;
}

RunResult run(const Simulation& sim, const CarrierState& initial, const TimeStepperConfig& config,
              const std::function<void(const StepEvent&)>& observer, bool keep_states) {
  config.validate();
  RunResult result;
  std::vector<double> times{initial.t};
  std::vector<double> norms{blowup_proxy(sim, initial)};
  if (observer) observer(StepEvent{initial, nullptr, nullptr, norms.back()});
  if (keep_states) result.states.push_back(initial);

  CarrierState current = initial;
  double dt = config.dt;
  const double t_eps = 1e-12 * std::max(1.0, config.t_end);
  while (current.t < config.t_end - t_eps && result.accepted < config.max_steps) {
    const double h = std::min(dt, config.t_end - current.t);
    StepResult step;
    try {
      step = gummel_step(sim, current, h, config);
    } catch (const StepRejected&) {
      ++result.rejected;
      dt *= 0.5;
      if (dt < config.dt_min) {
        result.blowup = detect_blowup(times, norms, config, true);
        result.status = RunStatus::BlowUp;
        return result;
      }
      continue;
    }
    if (config.t_end - step.state.t <= t_eps) step.state.t = config.t_end;
    const auto balance = balance_report(sim, current, step.state, step.record);
    ++result.accepted;
    result.gummel_iterations += step.record.gummel_iterations;
    times.push_back(step.state.t);
    norms.push_back(blowup_proxy(sim, step.state));
    if (observer) observer(StepEvent{step.state, &step.record, &balance, norms.back()});
    if (keep_states) {
      result.states.push_back(step.state);
      result.records.push_back(step.record);
    }
    result.balances.push_back(balance);
    current = std::move(step.state);
    dt = std::min(dt * 1.2, config.dt_max);

    auto report = detect_blowup(times, norms, config);
    if (report.detected) {
      result.blowup = std::move(report);
      result.status = RunStatus::BlowUp;
      return result;
    }
  }
  result.blowup = detect_blowup(times, norms, config);
  return result;
}

}  // namespace ddsim
