#include <doctest.h>

#include <cmath>
#include <random>

#include "ddsim/error.hpp"
#include "ddsim/mesh.hpp"
#include "ddsim/nonlinear_poisson.hpp"
#include "ddsim/operators.hpp"
#include "ddsim/verify/oracles.hpp"

using namespace ddsim;
using doctest::Approx;

namespace {

const auto boltz = StatisticsModel::boltzmann();
const auto fd = StatisticsModel::fermi_dirac_half();

Contact fixed(const std::string& name, Side side, double phi) {
  Contact c;
  c.name = name;
  c.segment.side = side;
  c.phi = phi;
  return c;
}

DeviceSpec line() {
  DeviceSpec s;
  s.dimension = 1;
  s.layers = {{"bulk", {{0, 0}, {1, 1}}, {1, 1}, {1, 1}, {1, 1}}};
  s.boundary.contacts = {fixed("l", Side::XMin, 0.0), fixed("r", Side::XMax, 0.0)};
  return s;
}

std::shared_ptr<const PoissonOperator> line_op(int n) {
  const DeviceSpec s = line();
  return PoissonOperator::build(s, build_mesh(s, {n, 1}));
}

double sup(const Vector& v) { return v.lpNorm<Eigen::Infinity>(); }

Vector random_vector(std::mt19937_64& rng, int n, double r) {
  std::uniform_real_distribution<double> u(-r, r);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

}  // namespace

TEST_CASE("a-priori bound and cut-off") {
  const Vector three = Vector::Constant(4, 3.0), minus = Vector::Constant(4, -1.0);
  CHECK(apriori_bound(three, minus, boltz, boltz) == 3.0);
  CHECK(apriori_bound(minus, three, fd, fd) == 3.0);
  CHECK(apriori_bound(Vector::Zero(4), Vector::Zero(4), boltz, boltz) == 0.0);
  // K0 = |F_FD^{-1}(1)| by bisection on the Simpson oracle.
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 40; ++i) {
    const double mid = 0.5 * (lo + hi);
    (verify::fermi_dirac_half_oracle(mid, 20000) < 1.0 ? lo : hi) = mid;
  }
  const double K = apriori_bound(Vector::Constant(4, 1.0), Vector::Constant(4, -0.5), boltz, fd);
  CHECK(K == Approx(1.0 + lo).epsilon(1e-8));

  CHECK(cutoff(0.5, 1.0) == 0.5);
  CHECK(cutoff(3.0, 1.0) == 1.0);
  CHECK(cutoff(-3.0, 1.0) == -1.0);
}

TEST_CASE("S vanishes at the equilibrium pair k") {
  const auto op = line_op(16);
  std::mt19937_64 rng(1);
  for (double k1 : {-2.0, 0.0, 1.5}) {
    const double k2 = fd.invert(boltz.eval(k1));
    NonlinearPoissonProblem p{op, boltz, fd, Vector::Constant(16, k1), Vector::Constant(16, k2), {}, std::nullopt};
    const auto c = contraction_iterate(p);
    CHECK(c.report.iterations <= 1);
    CHECK(sup(c.phi) <= 1e-12);
    const auto n = newton_solve(p);
    CHECK(n.report.iterations <= 1);
    CHECK(sup(n.phi) <= 1e-12);
    const Vector start = random_vector(rng, 16, 1.0);
    CHECK(sup(solve_operator_S(p, &start).phi) <= 1e-12);
  }
  NonlinearPoissonProblem shift{op, boltz, boltz, Vector::Constant(16, 0.8), Vector::Constant(16, 0.8), {}, std::nullopt};
  CHECK(sup(solve_operator_S(shift).phi) <= 1e-14);
}

TEST_CASE("two-cell toy against an explicit Newton oracle") {
  // P = [[3, -1], [-1, 3]] (unit spacing, Dirichlet both ends), V = 1.
  std::vector<Eigen::Triplet<double>> t{{0, 0, 3.0}, {0, 1, -1.0}, {1, 0, -1.0}, {1, 1, 3.0}};
  SparseOperator P;
  P.matrix.resize(2, 2);
  P.matrix.setFromTriplets(t.begin(), t.end());
  const auto op = PoissonOperator::from_matrix(P, Vector::Ones(2));
  const Vector w1 = (Vector(2) << 1.0, 0.0).finished(), w2 = Vector::Zero(2);
  NonlinearPoissonProblem p{op, boltz, boltz, w1, w2, {}, std::nullopt};

  Eigen::Vector2d x = Eigen::Vector2d::Zero();
  const Eigen::Matrix2d A{{3.0, -1.0}, {-1.0, 3.0}};
  for (int it = 0; it < 50; ++it) {
    Eigen::Vector2d F, d;
    for (int i = 0; i < 2; ++i) {
      F(i) = -(std::exp(w1(i) - x(i)) - std::exp(w2(i) + x(i)));
      d(i) = std::exp(w1(i) - x(i)) + std::exp(w2(i) + x(i));
    }
    F += A * x;
    x -= (A + Eigen::Matrix2d(d.asDiagonal())).lu().solve(F);
  }
  const auto c = contraction_iterate(p, {1e-13, 20000, std::nullopt});
  CHECK(sup(c.phi - Vector(x)) <= 1e-10);
  CHECK(sup(newton_solve(p).phi - Vector(x)) <= 1e-12);
}

TEST_CASE("stopping contracts and monotone residuals") {
  const auto op = line_op(64);
  std::mt19937_64 rng(2);
  for (const auto& f : {boltz, fd}) {
    for (int trial = 0; trial < 5; ++trial) {
      NonlinearPoissonProblem p{op, f, f, random_vector(rng, 64, 4.0), random_vector(rng, 64, 4.0), {}, std::nullopt};
      const auto c = contraction_iterate(p, {1e-10, 20000, std::nullopt});
      const Vector r = poisson_residual(p, c.phi, c.report.cutoff_bound);
      CHECK(op->dual_norm(r) <= 1e-9);
      const auto& h = c.report.residual_history;
      for (std::size_t i = 3; i < h.size(); ++i) CHECK(h[i] <= h[i - 1] * (1 + 1e-12) + 1e-14);

      const auto n = newton_solve(p);
      CHECK(n.report.residual <= 1e-12);
      CHECK(sup(n.phi - c.phi) <= 1e-8);
    }
  }
}

TEST_CASE("linearized regime") {
  const DeviceSpec s = line();
  const Mesh mesh = build_mesh(s, {32, 1});
  const auto op = PoissonOperator::build(s, mesh);
  std::mt19937_64 rng(3);
  const Vector w1 = random_vector(rng, 32, 1e-8), w2 = random_vector(rng, 32, 1e-8);
  NonlinearPoissonProblem p{op, boltz, boltz, w1, w2, {}, std::nullopt};
  // e^{w1 - phi} - e^{w2 + phi} ~ w1 - w2 - 2 phi.
  SparseMatrix A = op->P.matrix;
  for (int i = 0; i < 32; ++i) A.coeffRef(i, i) += 2.0 * op->volumes(i);
  const Vector rhs = op->volumes.cwiseProduct(w1 - w2);
  const Vector lin = solve_linear(A, rhs, MatrixStructure::SymmetricPositiveDefinite);
  CHECK(sup(newton_solve(p).phi - lin) <= 1e-12);
}

TEST_CASE("nonexpansive, bounded, and cut-off independent") {
  const auto op = line_op(64);
  std::mt19937_64 rng(4);
  for (const auto& f : {boltz, fd}) {
    for (int trial = 0; trial < 20; ++trial) {
      const Vector a1 = random_vector(rng, 64, 5.0), a2 = random_vector(rng, 64, 5.0);
      const Vector b1 = a1 + random_vector(rng, 64, 0.5), b2 = a2 + random_vector(rng, 64, 0.5);
      NonlinearPoissonProblem pa{op, f, f, a1, a2, {}, std::nullopt};
      NonlinearPoissonProblem pb{op, f, f, b1, b2, {}, std::nullopt};
      const Vector sa = solve_operator_S(pa).phi, sb = solve_operator_S(pb).phi;
      CHECK(sup(sa - sb) <= std::max(sup(a1 - b1), sup(a2 - b2)) + 1e-10);
      CHECK(sup(sa) <= apriori_bound(a1, a2, f, f) + 1e-10);
      const SolveOptions tight{1e-12, 20000, std::nullopt};
      const auto c = contraction_iterate(pa, tight);
      pa.cutoff_bound = 2.0 * c.report.cutoff_bound;
      CHECK(sup(contraction_iterate(pa, tight).phi - c.phi) <= 1e-10);
    }
  }
}

TEST_CASE("equilibrium states") {
  SUBCASE("intrinsic device") {
    const DeviceSpec s = line();
    const Mesh mesh = build_mesh(s, {20, 1});
    for (const auto& f : {boltz, fd}) {
      const auto eq = equilibrium_state(s, mesh, f, f);
      CHECK(sup(eq.phi) <= 1e-14);
      CHECK(sup(eq.u1 - Vector::Constant(20, f.eval(0.0))) <= 1e-14);
      CHECK(sup(eq.u2 - eq.u1) <= 1e-14);
    }
  }
  SUBCASE("abrupt pn junction built-in potential") {
    DeviceSpec s;
    s.dimension = 1;
    s.extent = {40.0, 1.0};
    s.layers = {{"bulk", {{0, 0}, {40, 1}}, {1, 1}, {1, 1}, {1, 1}}};
    s.doping.bulk = {{{{0, 0}, {20, 1}}, 1.0}, {{{20, 0}, {40, 1}}, -1.0}};
    for (Side side : {Side::XMin, Side::XMax}) {
      RobinSegment r;
      r.name = side == Side::XMin ? "l" : "r";
      r.segment.side = side;
      r.capacity = 1e-10;
      s.boundary.robin.push_back(r);
    }
    const Mesh mesh = build_mesh(s, {256, 1});
    const auto eq = equilibrium_state(s, mesh, boltz, boltz);
    // Neutral regions: e^{phi} - e^{-phi} = d, so phi = asinh(d / 2).
    CHECK(eq.phi(0) - eq.phi(255) == Approx(2.0 * std::asinh(0.5)).epsilon(1e-3));
    CHECK(std::abs(eq.phi(0) - eq.phi(255) - 0.962424) <= 1e-3);
  }
}

TEST_CASE("invalid problems") {
  const auto op = line_op(8);
  NonlinearPoissonProblem p{op, boltz, boltz, Vector::Zero(3), Vector::Zero(8), {}, std::nullopt};
  CHECK_THROWS(newton_solve(p));
  p.omega1 = Vector::Zero(8);
  CHECK_THROWS_AS(contraction_iterate(p, {1e-10, 10, 2.5}), DomainError);
}
