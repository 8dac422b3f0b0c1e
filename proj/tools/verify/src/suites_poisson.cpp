#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "ddsim/mesh.hpp"
#include "ddsim/nonlinear_poisson.hpp"
#include "ddsim/operators.hpp"
#include "suites.hpp"

namespace ddsim::verify::detail {

namespace {

MaterialRegion layer(std::string name, Box box, DiagTensor eps) {
  return {std::move(name), box, eps, {}, {}};
}

Contact fixed_contact(std::string name, Side side, double phi) {
  Contact c;
  c.name = std::move(name);
  c.segment.side = side;
  c.ohmic = false;
  c.phi = phi;
  return c;
}

DeviceSpec line_64() {
  DeviceSpec s;
  s.dimension = 1;
  s.extent = {1.0, 1.0};
  s.layers = {layer("bulk", {{0.0, 0.0}, {1.0, 1.0}}, {1.0, 1.0})};
  s.boundary.contacts = {fixed_contact("left", Side::XMin, 0.0),
                         fixed_contact("right", Side::XMax, 0.0)};
  return s;
}

DeviceSpec square_two_layer() {
  DeviceSpec s;
  s.dimension = 2;
  s.extent = {1.0, 1.0};
  s.layers = {layer("a", {{0.0, 0.0}, {0.5, 1.0}}, {1.0, 1.0}),
              layer("b", {{0.5, 0.0}, {1.0, 1.0}}, {2.0, 0.5})};
  s.boundary.contacts = {fixed_contact("left", Side::XMin, 0.0)};
  RobinSegment gate;
  gate.name = "gate";
  gate.segment.side = Side::XMax;
  gate.capacity = 0.5;
  s.boundary.robin = {gate};
  return s;
}

struct Case {
  std::string name;
  std::shared_ptr<const PoissonOperator> op;
  StatisticsModel stats;
};

std::vector<Case> cases() {
  std::vector<Case> out;
  const DeviceSpec line = line_64(), square = square_two_layer();
  const auto line_op = PoissonOperator::build(line, build_mesh(line, {64, 1}));
  const auto square_op = PoissonOperator::build(square, build_mesh(square, {8, 8}));
  for (const auto& [tag, stats] : {std::pair{"boltzmann", StatisticsModel::boltzmann()},
                                   std::pair{"fermi-dirac", StatisticsModel::fermi_dirac_half()}}) {
    out.push_back({std::string("1d-64 ") + tag, line_op, stats});
    out.push_back({std::string("2d-8x8 ") + tag, square_op, stats});
  }
  return out;
}

struct Sample {
  Vector w1, w2, v1, v2;
};

// The 100 omega pairs of one case, reproducible from the seed.
std::vector<Sample> samples(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> base(-4.0, 4.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> expo(-3.0, 0.5);
  std::vector<Sample> out;
  for (int k = 0; k < 100; ++k) {
    Sample s{Vector(n), Vector(n), Vector(n), Vector(n)};
    const double r = std::pow(10.0, expo(rng));
    // Odd samples shift both levels rigidly, the direction in which S comes
    // closest to an isometry.
    const bool rigid = k % 2 == 1;
    for (int i = 0; i < n; ++i) {
      s.w1(i) = base(rng);
      s.w2(i) = base(rng);
      s.v1(i) = s.w1(i) + (rigid ? r : r * unit(rng));
      s.v2(i) = s.w2(i) + (rigid ? -r : r * unit(rng));
    }
    out.push_back(std::move(s));
  }
  return out;
}

NonlinearPoissonProblem problem(const Case& c, const Vector& w1, const Vector& w2) {
  return {c.op, c.stats, c.stats, w1, w2, {}, std::nullopt};
}

double sup(const Vector& v) { return v.lpNorm<Eigen::Infinity>(); }

double sup2(const Vector& a, const Vector& b) { return std::max(sup(a), sup(b)); }

}  // namespace

std::vector<Check> s_nonexpansive(std::uint64_t seed) {
  const std::string suite = "s-nonexpansive";
  std::vector<Check> out;
  std::mt19937_64 rng(seed);
  for (const auto& c : cases()) {
    double excess = -std::numeric_limits<double>::infinity();
    double ratio = 0.0;
    for (const auto& s : samples(rng, c.op->P.size())) {
      const Vector a = solve_operator_S(problem(c, s.w1, s.w2)).phi;
      const Vector b = solve_operator_S(problem(c, s.v1, s.v2)).phi;
      const double lhs = sup(a - b), rhs = sup2(s.w1 - s.v1, s.w2 - s.v2);
      excess = std::max(excess, lhs - rhs);
      ratio = std::max(ratio, lhs / rhs);
    }
    out.push_back(at_most(suite, c.name + " max(|S w - S w'| - |w - w'|)", excess, 1e-10));
    out.push_back(at_most(suite, c.name + " max |S w - S w'| / |w - w'|", ratio, 1.0 + 1e-8));
  }
  return out;
}

std::vector<Check> s_zero(std::uint64_t seed) {
  const std::string suite = "s-zero";
  std::vector<Check> out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> start(-1.0, 1.0);
  const auto boltz = StatisticsModel::boltzmann();
  const auto fd = StatisticsModel::fermi_dirac_half();
  for (const auto& c : cases()) {
    const int n = c.op->P.size();
    for (const auto& [tag, f2] : {std::pair{"same", c.stats}, std::pair{"mixed", c.stats.is_boltzmann() ? fd : boltz}}) {
      double newton = 0.0, contraction = 0.0;
      for (double k1 : {-3.0, -1.0, 0.0, 0.5, 2.0}) {
        const double k2 = f2.invert(c.stats.eval(k1));
        NonlinearPoissonProblem p{c.op, c.stats, f2, Vector::Constant(n, k1),
                                  Vector::Constant(n, k2), {}, std::nullopt};
        Vector init(n);
        for (int i = 0; i < n; ++i) init(i) = start(rng);
        newton = std::max(newton, sup(newton_solve(p, {1e-13, 100, std::nullopt}, &init).phi));
        contraction = std::max(contraction,
                               sup(contraction_iterate(p, {1e-13, 20000, std::nullopt}, &init).phi));
      }
      out.push_back(at_most(suite, c.name + " f2 " + tag + " newton |S(k)|", newton, 1e-12));
      out.push_back(
          at_most(suite, c.name + " f2 " + tag + " contraction |S(k)|", contraction, 1e-12));
    }
  }
  return out;
}

std::vector<Check> s_agreement(std::uint64_t seed) {
  const std::string suite = "s-agreement";
  std::vector<Check> out;
  std::mt19937_64 rng(seed);
  const SolveOptions contraction_opts{1e-11, 20000, std::nullopt};
  for (const auto& c : cases()) {
    double agree = 0.0, doubling = 0.0;
    const auto all = samples(rng, c.op->P.size());
    for (std::size_t k = 0; k < all.size(); ++k) {
      const auto& s = all[k];
      for (const auto* w : {&s.w1, &s.v1}) {
        const Vector& w2 = (w == &s.w1) ? s.w2 : s.v2;
        auto p = problem(c, *w, w2);
        const Vector newton = newton_solve(p).phi;
        const auto contracted = contraction_iterate(p, contraction_opts);
        agree = std::max(agree, sup(newton - contracted.phi));
        if (w == &s.w1 && k % 4 == 0) {
          p.cutoff_bound = 2.0 * contracted.report.cutoff_bound;
          doubling = std::max(doubling, sup(contraction_iterate(p, contraction_opts).phi - contracted.phi));
        }
      }
    }
    out.push_back(at_most(suite, c.name + " max |newton - contraction|", agree, 1e-8));
    out.push_back(at_most(suite, c.name + " max change when K doubles", doubling, 1e-12));
  }
  return out;
}

std::vector<Check> mms_poisson(std::uint64_t) {
  const std::string suite = "mms-poisson";
  std::vector<Check> out;
  const double pi = std::numbers::pi;
  struct Variant {
    std::string name;
    bool layered;
  };
  for (const Variant& v : {Variant{"eps=1", false}, Variant{"eps in {1,2}", true}}) {
    auto exact = [&](double x) {
      const double s = std::sin(pi * x);
      return (v.layered && x > 0.5) ? 1.0 + 0.5 * (s - 1.0) : s;
    };
    DeviceSpec spec;
    spec.dimension = 1;
    spec.extent = {1.0, 1.0};
    if (v.layered)
      spec.layers = {layer("a", {{0.0, 0.0}, {0.5, 1.0}}, {1.0, 1.0}),
                     layer("b", {{0.5, 0.0}, {1.0, 1.0}}, {2.0, 2.0})};
    else
      spec.layers = {layer("a", {{0.0, 0.0}, {1.0, 1.0}}, {1.0, 1.0})};
    spec.boundary.contacts = {fixed_contact("left", Side::XMin, exact(0.0)),
                              fixed_contact("right", Side::XMax, exact(1.0))};

    std::vector<double> h, err;
    for (int n : {16, 32, 64, 128, 256}) {
      const Mesh mesh = build_mesh(spec, {n, 1});
      const auto op = PoissonOperator::build(spec, mesh);
      Vector load = poisson_data_load(spec, mesh, 0.0);
      for (int i = 0; i < n; ++i) {
        const double x = mesh.cells[i].center[0];
        load(i) += mesh.cells[i].volume * (pi * pi * std::sin(pi * x) + 2.0 * std::sinh(exact(x)));
      }
      NonlinearPoissonProblem p{op, StatisticsModel::boltzmann(), StatisticsModel::boltzmann(),
                                Vector::Zero(n), Vector::Zero(n), load, std::nullopt};
      const Vector phi = newton_solve(p, {1e-14, 100, std::nullopt}).phi;
      double e = 0.0;
      for (int i = 0; i < n; ++i) e = std::max(e, std::abs(phi(i) - exact(mesh.cells[i].center[0])));
      h.push_back(1.0 / n);
      err.push_back(e);
    }
    out.push_back(within(suite, v.name + " observed order (16..256 cells)", observed_order(h, err),
                         1.8, 2.2));
    for (std::size_t i = 1; i < h.size(); ++i) {
      out.push_back(within(suite, v.name + " order " + std::to_string(16 << (i - 1)) + "->" +
                                      std::to_string(16 << i),
                           std::log2(err[i - 1] / err[i]), 1.8, 2.2));
    }
  }
  return out;
}

}  // namespace ddsim::verify::detail
