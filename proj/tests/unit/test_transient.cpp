#include <doctest.h>

#include <cmath>

#include "ddsim/config.hpp"
#include "ddsim/transient.hpp"
#include "support.hpp"

using namespace ddsim;
using doctest::Approx;

namespace {

double sup(const Vector& v) { return v.lpNorm<Eigen::Infinity>(); }

double content(const Mesh& mesh, const Vector& u) {
  double s = 0.0;
  for (int i = 0; i < mesh.cell_count(); ++i) s += mesh.cells[i].volume * u(i);
  return s;
}

/// Intrinsic unit bar with prescribed contact levels; phi and both
/// quasi-Fermi levels drop by `v` from left to right.
SimulationConfig bar(double v) {
  const std::string deck = R"(
device:
  dimension: 1
  extent: [1]
  resolution: [8]
  layers:
    - {name: bulk, permittivity: 1, mobility: 1}
  contacts:
    left: {side: xmin, ohmic: false, phi: )" + std::to_string(v) +
                           ", Phi_n: " + std::to_string(v) + ", Phi_p: " + std::to_string(-v) + R"(}
    right: {side: xmax, ohmic: false, phi: 0, Phi_n: 0, Phi_p: 0}
)";
  return parse_config(deck);
}

/// Short pn diode held at a constant anode bias.
SimulationConfig short_diode(double bias) {
  const std::string deck = R"(
device:
  dimension: 1
  extent: [4]
  resolution: [40]
  layers:
    - {name: bulk, permittivity: 1, mobility: 1}
  doping:
    - {lo: [0], hi: [2], value: -5}
    - {lo: [2], hi: [4], value: 5}
  contacts:
    anode: {side: xmin, bias: 0}
    cathode: {side: xmax, bias: 0}
recombination:
  - {model: srh}
stepper: {t_end: 60, dt: 0.05, dt_max: 5}
)";
  return parse_config(set_config_value(deck, "device.contacts.anode.bias", bias));
}

}  // namespace

TEST_CASE("equilibrium is a fixed point of the step") {
  const auto config = test::deck("equilibrium");
  const Simulation sim = make_simulation(config);
  const CarrierState eq = equilibrium_initial_state(sim);
  const auto step = gummel_step(sim, eq, 0.1, config.stepper);
  CHECK(sup(step.state.phi - eq.phi) <= 1e-10);
  CHECK(sup(step.state.u1 - eq.u1) <= 1e-10 * sup(eq.u1));
  CHECK(sup(step.state.u2 - eq.u2) <= 1e-10 * sup(eq.u2));
  CHECK(step.state.t == Approx(0.1));

  const auto field = compute_currents(sim, eq);
  for (int k = 0; k < 2; ++k)
    for (double f : field.flux[k]) CHECK(std::abs(f) <= 1e-13 * sup(eq.u1));
  for (int c = 0; c < 2; ++c) CHECK(std::abs(terminal_current(sim, field.flux, c)) <= 1e-13 * sup(eq.u1));
}

TEST_CASE("closed device conserves its carriers") {
  auto config = test::deck("insulated");
  config.stepper.t_end = 0.2;
  const Simulation sim = make_simulation(config);
  const CarrierState s0 = initial_state(sim, config);
  const double n0 = content(sim.mesh(), s0.u1), p0 = content(sim.mesh(), s0.u2);
  int steps = 0;
  run(sim, s0, config.stepper,
      [&](const StepEvent& ev) {
        if (!ev.record) return;
        ++steps;
        CHECK(std::abs(content(sim.mesh(), ev.state.u1) - n0) <= 1e-12 * n0);
        CHECK(std::abs(content(sim.mesh(), ev.state.u2) - p0) <= 1e-12 * p0);
        CHECK(ev.balance->relative() <= 1e-12);
      },
      false);
  CHECK(steps >= 2);
}

TEST_CASE("uniform densities under a linear drop carry the drift current") {
  for (double v : {1.0, -1.0, 0.3}) {
    const Simulation sim = make_simulation(bar(v));
    const Mesh& mesh = sim.mesh();
    Vector phi(mesh.cell_count());
    for (int i = 0; i < mesh.cell_count(); ++i) phi(i) = v * (1.0 - mesh.cells[i].center[0]);
    const CarrierState s = make_state(sim, 0.0, phi, phi, -phi);
    CHECK(sup(s.u1 - Vector::Ones(8)) <= 1e-15);
    CHECK(sup(s.u2 - Vector::Ones(8)) <= 1e-15);

    const auto field = compute_currents(sim, s);
    for (int f = 0; f < mesh.face_count(); ++f) {
      const Face& face = mesh.faces[f];
      // Orientation along +x: interior as stored, boundary faces outward.
      const double along = face.is_boundary() ? face.outward_sign() : 1.0;
      CHECK(field.flux[0][f] * along == Approx(v).epsilon(1e-12));
      CHECK(field.flux[1][f] * along == Approx(-v).epsilon(1e-12));
    }
    // Electrons leave on the right, holes on the left.
    CHECK(terminal_current(sim, field.flux, 0) == Approx(-2.0 * v).epsilon(1e-12));
    CHECK(terminal_current(sim, field.flux, 1) == Approx(2.0 * v).epsilon(1e-12));
  }
}

TEST_CASE("balance of a driven step") {
  const auto config = test::deck("diode");
  const Simulation sim = make_simulation(config);
  CarrierState s = initial_state(sim, config);
  for (int i = 0; i < 5; ++i) {
    auto step = gummel_step(sim, s, 0.05, config.stepper);
    const auto b = balance_report(sim, s, step.state, step.record);
    CHECK(b.relative() <= 1e-12);
    CHECK(b.scale[0] >= 1.0);
    s = std::move(step.state);
  }
  CHECK(s.t == Approx(0.25));
}

TEST_CASE("blow-up detection") {
  TimeStepperConfig c;
  c.blowup_threshold = 1e3;
  const std::vector<double> t{0, 1, 2, 3};
  CHECK(detect_blowup(t, {1, 10, 1e4, 1e5}, c).detected);
  CHECK(detect_blowup(t, {1, 10, 1e4, 1e5}, c).t_star == 3.0);
  CHECK_FALSE(detect_blowup(t, {1, 2, 3, 4}, c).detected);
  CHECK_FALSE(detect_blowup(t, {1, 1e5, 1e4, 1e6}, c).detected);
  CHECK_FALSE(detect_blowup({0}, {1e9}, c).detected);
  const auto collapsed = detect_blowup(t, {1, 2, 3, 4}, c, true);
  CHECK(collapsed.detected);
  CHECK_FALSE(collapsed.reason.empty());
}

TEST_CASE("runs stay on the equilibrium and keep states consistent") {
  SUBCASE("stationary") {
    auto config = test::deck("equilibrium");
    config.stepper.t_end = 1.0;
    const Simulation sim = make_simulation(config);
    const CarrierState eq = equilibrium_initial_state(sim);
    const auto result = run(sim, eq, config.stepper);
    CHECK(result.status == RunStatus::Completed);
    CHECK(result.accepted == 10);
    for (const auto& s : result.states) {
      CHECK(sup(s.phi - eq.phi) <= 1e-10);
      CHECK(sup(s.u1 - eq.u1) <= 1e-10 * sup(eq.u1));
    }
  }
  SUBCASE("driven diode") {
    auto config = test::deck("diode");
    config.stepper.t_end = 0.5;
    const Simulation sim = make_simulation(config);
    const auto result = run(sim, initial_state(sim, config), config.stepper);
    CHECK(result.status == RunStatus::Completed);
    CHECK(result.states.back().t == Approx(0.5));
    for (const auto& s : result.states) {
      CHECK(sup(s.chi1 - (s.Phi1 - s.phi)) <= 1e-13 * (1 + sup(s.phi)));
      CHECK(sup(s.chi2 - (s.Phi2 + s.phi)) <= 1e-13 * (1 + sup(s.phi)));
      for (int i = 0; i < s.u1.size(); ++i) {
        CHECK(s.u1(i) == Approx(sim.stats(1).eval(s.chi1(i))).epsilon(1e-13));
        CHECK(s.u2(i) == Approx(sim.stats(2).eval(s.chi2(i))).epsilon(1e-13));
      }
      CHECK(s.u1.minCoeff() > 0.0);
      CHECK(s.u2.minCoeff() > 0.0);
    }
  }
}

TEST_CASE("steady diode currents grow with forward bias") {
  std::vector<double> current;
  for (double bias : {0.0, 0.2, 0.4, 0.6, 0.8}) {
    const auto config = short_diode(bias);
    const Simulation sim = make_simulation(config);
    const auto result = run(sim, initial_state(sim, config), config.stepper);
    REQUIRE(result.status == RunStatus::Completed);
    const auto field = compute_currents(sim, result.states.back());
    const double anode = terminal_current(sim, field.flux, 0);
    const double cathode = terminal_current(sim, field.flux, 1);
    CHECK(std::abs(anode + cathode) <= 1e-6 * (1.0 + std::abs(anode)));
    current.push_back(anode);
  }
  CHECK(std::abs(current[0]) <= 1e-10);
  for (std::size_t i = 1; i < current.size(); ++i) {
    CHECK(current[i] > 0.0);
    CHECK(current[i] > current[i - 1]);
  }
}
