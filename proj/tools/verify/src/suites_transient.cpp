#include <algorithm>
#include <cmath>
#include <limits>
#include <variant>

#include "ddsim/config.hpp"
#include "ddsim/operators.hpp"
#include "ddsim/output.hpp"
#include "ddsim/transient.hpp"
#include "ddsim/verify/oracles.hpp"
#include "suites.hpp"

namespace ddsim::verify::detail {

namespace {

struct Watch {
  int steps = 0;
  double balance = 0.0;
  double min_density = std::numeric_limits<double>::infinity();
};

RunResult run_deck(const SimulationConfig& config, const Simulation& sim,
                   const std::function<void(const StepEvent&)>& extra, Watch& watch) {
  return run(
      sim, initial_state(sim, config), config.stepper,
      [&](const StepEvent& ev) {
        watch.min_density =
            std::min({watch.min_density, ev.state.u1.minCoeff(), ev.state.u2.minCoeff()});
        if (ev.balance) {
          ++watch.steps;
          watch.balance = std::max(watch.balance, ev.balance->relative());
        }
        if (extra) extra(ev);
      },
      false);
}

double total(const Mesh& mesh, const Vector& u) {
  double s = 0.0;
  for (int i = 0; i < mesh.cell_count(); ++i) s += mesh.cells[i].volume * u(i);
  return s;
}

}  // namespace

std::vector<Check> mms_time(std::uint64_t) {
  const std::string suite = "mms-time";
  std::vector<Check> out;
  const double u0 = 0.5, rate = 1.0, g = 4.0;
  std::vector<double> h, err;
  for (int level = 0; level < 5; ++level) {
    const double dt = 0.1 / (1 << level);
    const std::string deck = R"(
device:
  dimension: 1
  extent: [1]
  resolution: [4]
  layers:
    - {name: bulk, permittivity: 1, mobility: 1}
  robin:
    left: {side: xmin, capacity: 1}
    right: {side: xmax, capacity: 1}
recombination:
  - {model: mass-action, rate: 1, g: 4}
initial: {Phi_n: -0.69314718055994531, Phi_p: -0.69314718055994531}
stepper: {t_end: 1, gummel_tol: 1.0e-14, dt: )" + format_number(dt) +
                             ", dt_max: " + format_number(dt) + "}\n";
    const auto config = parse_config(deck);
    const Simulation sim = make_simulation(config);
    Watch watch;
    double e = 0.0;
    run_deck(config, sim,
             [&](const StepEvent& ev) {
               const double exact = mass_action_exact(u0, rate, g, ev.state.t);
               e = std::max({e, (ev.state.u1.array() - exact).abs().maxCoeff(),
                             (ev.state.u2.array() - exact).abs().maxCoeff()});
             },
             watch);
    h.push_back(dt);
    err.push_back(e);
  }
  out.push_back(within(suite, "observed order over 4 halvings", observed_order(h, err), 0.8, 1.2));
  for (std::size_t i = 1; i < h.size(); ++i)
    out.push_back(within(suite, "order halving " + std::to_string(i), std::log2(err[i - 1] / err[i]),
                         0.8, 1.2));
  return out;
}

std::vector<Check> conservation(std::uint64_t) {
  const std::string suite = "conservation";
  std::vector<Check> out;
  for (const std::string name : {"diode", "two-layer-interface", "insulated"}) {
    const auto config = shipped_config(name);
    const Simulation sim = make_simulation(config);
    const Mesh& mesh = sim.mesh();
    Watch watch;
    double resum = 0.0, cellwise = 0.0, interface_mass = 0.0;
    double drift = 0.0;
    double mass0[2] = {0.0, 0.0};

    // Face index -> position in sim.surface_faces().
    std::vector<int> slot(mesh.face_count(), -1);
    for (std::size_t s = 0; s < sim.surface_faces().size(); ++s) slot[sim.surface_faces()[s]] = s;

    const auto result = run_deck(
        config, sim,
        [&](const StepEvent& ev) {
          if (!ev.record) {
            mass0[0] = total(mesh, ev.state.u1);
            mass0[1] = total(mesh, ev.state.u2);
            return;
          }
          if (config.device.boundary.contacts.empty()) {
            drift = std::max({drift, std::abs(total(mesh, ev.state.u1) - mass0[0]) / mass0[0],
                              std::abs(total(mesh, ev.state.u2) - mass0[1]) / mass0[1]});
          }
          for (int k = 0; k < 2; ++k) {
            double direct = 0.0, magnitude = 0.0;
            std::vector<int> faces;
            std::vector<double> rates;
            for (const auto& list : mesh.interface_faces) {
              for (int f : list) {
                const double r = ev.record->surface_rate[k][slot[f]];
                direct += mesh.faces[f].area * r;
                magnitude += std::abs(mesh.faces[f].area * r);
                faces.push_back(f);
                rates.push_back(r);
              }
            }
            const double scale = std::max(magnitude, std::numeric_limits<double>::min());
            resum = std::max(resum, std::abs(direct - ev.balance->interface_load[k]) / scale);
            cellwise = std::max(cellwise,
                                std::abs(apply_surface_load(mesh, faces, rates).sum() - direct) / scale);
            interface_mass = std::max(interface_mass, magnitude);
          }
        },
        watch);

    out.push_back(at_least(suite, name + " completed", result.status == RunStatus::Completed, 1));
    out.push_back(at_least(suite, name + " accepted steps", watch.steps, 1));
    out.push_back(at_most(suite, name + " max relative balance residual", watch.balance, 1e-12));
    out.push_back(at_least(suite, name + " min density", watch.min_density,
                           std::numeric_limits<double>::min()));
    if (!mesh.interface_faces.empty()) {
      out.push_back(at_least(suite, name + " max interfacial mass rate", interface_mass, 1e-12));
      out.push_back(at_most(suite, name + " interfacial re-summation (rel)", resum, 1e-15));
      out.push_back(at_most(suite, name + " interfacial cell distribution (rel)", cellwise, 1e-15));
    }
    if (config.device.boundary.contacts.empty())
      out.push_back(at_most(suite, name + " carrier content drift (rel)", drift, 1e-12));
  }
  return out;
}

std::vector<Check> equilibrium(std::uint64_t) {
  const std::string suite = "equilibrium";
  std::vector<Check> out;
  {
    const auto config = shipped_config("equilibrium");
    const Simulation sim = make_simulation(config);
    const CarrierState init = initial_state(sim, config);
    Watch watch;
    double drift = 0.0;
    run_deck(config, sim,
             [&](const StepEvent& ev) {
               for (auto pair :
                    {&CarrierState::phi, &CarrierState::Phi1, &CarrierState::Phi2,
                     &CarrierState::u1, &CarrierState::u2}) {
                 const Vector& now = ev.state.*pair;
                 const Vector& then = init.*pair;
                 drift = std::max(drift, ((now - then).array().abs() /
                                          then.array().abs().max(1.0)).maxCoeff());
               }
             },
             watch);
    double flux = 0.0;
    for (const auto& f : compute_currents(sim, init).flux)
      for (double v : f) flux = std::max(flux, std::abs(v));
    out.push_back(within(suite, "accepted steps at dt = 0.1", watch.steps, 100, 100));
    out.push_back(at_most(suite, "max field drift over 100 steps", drift, 1e-10));
    out.push_back(at_most(suite, "max face flux at equilibrium", flux, 1e-12));
  }
  {
    // Floating pn junction: Robin ends with negligible capacity, no contacts.
    const auto config = parse_config(R"(
device:
  dimension: 1
  extent: [40]
  resolution: [256]
  layers:
    - {name: bulk, permittivity: 1, mobility: 1}
  doping:
    - {lo: [0], hi: [20], value: 1}
    - {lo: [20], hi: [40], value: -1}
  robin:
    left: {side: xmin, capacity: 1.0e-10}
    right: {side: xmax, capacity: 1.0e-10}
)");
    const Simulation sim = make_simulation(config);
    const CarrierState eq = equilibrium_initial_state(sim);
    const double vbi = eq.phi(0) - eq.phi(eq.phi.size() - 1);
    out.push_back(within(suite, "built-in potential (256 cells)", vbi,
                         2.0 * std::asinh(0.5) - 1e-3, 2.0 * std::asinh(0.5) + 1e-3));
  }
  return out;
}

std::vector<Check> blowup(std::uint64_t) {
  const std::string suite = "blowup";
  std::vector<Check> out;
  {
    const auto config = shipped_config("avalanche-runaway");
    const Simulation sim = make_simulation(config);
    Watch watch;
    const auto result = run_deck(config, sim, {}, watch);
    const auto& norms = result.blowup.norms;
    const std::size_t n = norms.size();
    const bool increasing = n >= 3 && norms[n - 3] < norms[n - 2] && norms[n - 2] < norms[n - 1];
    out.push_back(at_least(suite, "avalanche deck ends in blow-up",
                           result.status == RunStatus::BlowUp, 1));
    out.push_back(at_least(suite, "last three norms strictly increasing", increasing, 1));
    out.push_back(at_least(suite, "final norm above threshold", n ? norms.back() : 0.0,
                           config.stepper.blowup_threshold));
    out.push_back(at_least(suite, "t* > 0", result.blowup.t_star, 1e-300));
    out.push_back(at_least(suite, "min density before blow-up", watch.min_density,
                           std::numeric_limits<double>::min()));
  }
  {
    TimeStepperConfig cfg;
    cfg.blowup_threshold = 10.0;
    const std::vector<double> t{0, 1, 2, 3, 4};
    const auto flat = detect_blowup(t, {20, 20, 20, 20, 20}, cfg);
    const auto grow = detect_blowup(t, {1, 3, 5, 9, 11}, cfg);
    const auto low = detect_blowup(t, {1, 2, 3, 4, 5}, cfg);
    const auto dip = detect_blowup(t, {1, 30, 20, 40, 50}, cfg);
    const auto collapse = detect_blowup(t, {1, 1, 1, 1, 1}, cfg, true);
    out.push_back(at_most(suite, "flat history above threshold flagged", flat.detected, 0));
    out.push_back(at_least(suite, "growth above threshold flagged", grow.detected, 1));
    out.push_back(within(suite, "t* of growing history", grow.t_star, 4, 4));
    out.push_back(at_most(suite, "growth below threshold flagged", low.detected, 0));
    out.push_back(at_least(suite, "growth after dip flagged", dip.detected, 1));
    out.push_back(at_least(suite, "step-size collapse flagged", collapse.detected, 1));
  }
  return out;
}

std::vector<Check> gummel_monolithic(std::uint64_t) {
  const std::string suite = "gummel-monolithic";
  std::vector<Check> out;
  const auto config = shipped_config("srh-2cell");
  const Simulation sim = make_simulation(config);
  const CarrierState s0 = initial_state(sim, config);
  const double dt = config.stepper.dt;
  const StepResult step = gummel_step(sim, s0, dt, config.stepper);

  const auto& spec = sim.spec();
  const auto& srh = std::get<Srh>(config.models.bulk.at(0));
  Monolithic1D dev;
  dev.length = spec.extent[0];
  dev.cells = sim.mesh().cell_count();
  dev.eps = spec.layers.at(0).eps.xx;
  dev.mu1 = spec.layers.at(0).mu1.xx;
  dev.mu2 = spec.layers.at(0).mu2.xx;
  dev.doping = cell_doping(spec, sim.mesh());
  const ContactData data = sim.contact_data(s0.t + dt);
  for (std::size_t c = 0; c < spec.boundary.contacts.size(); ++c) {
    const int end = spec.boundary.contacts[c].segment.side == Side::XMin ? 0 : 1;
    dev.phi_D[end] = data.phi[c];
    dev.Phi1_D[end] = data.Phi[0][c];
    dev.Phi2_D[end] = data.Phi[1][c];
  }
  dev.n_i = srh.n_i;
  dev.n1 = srh.n1;
  dev.n2 = srh.n2;
  dev.tau1 = srh.tau1;
  dev.tau2 = srh.tau2;

  const auto mono = monolithic_step(dev, s0.u1, s0.u2, dt, s0.phi, s0.Phi1, s0.Phi2);
  const double diff = std::max({(mono.phi - step.state.phi).lpNorm<Eigen::Infinity>(),
                                (mono.Phi1 - step.state.Phi1).lpNorm<Eigen::Infinity>(),
                                (mono.Phi2 - step.state.Phi2).lpNorm<Eigen::Infinity>()});
  const double moved = std::max((step.state.Phi1 - s0.Phi1).lpNorm<Eigen::Infinity>(),
                                (step.state.Phi2 - s0.Phi2).lpNorm<Eigen::Infinity>());
  out.push_back(at_most(suite, "oracle residual", mono.residual, 1e-13));
  out.push_back(at_least(suite, "quasi-Fermi change over the step", moved, 1e-6));
  out.push_back(at_most(suite, "max |gummel - monolithic|", diff, 10.0 * config.stepper.gummel_tol));
  return out;
}

}  // namespace ddsim::verify::detail
