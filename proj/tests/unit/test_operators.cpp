#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ddsim/error.hpp"
#include "ddsim/linear_solver.hpp"
#include "ddsim/mesh.hpp"
#include "ddsim/operators.hpp"

using namespace ddsim;
using doctest::Approx;

namespace {

MaterialRegion region(const std::string& name, Box box, DiagTensor eps, DiagTensor mu = {}) {
  return {name, box, eps, mu, mu};
}

Contact fixed(const std::string& name, Side side, double phi) {
  Contact c;
  c.name = name;
  c.segment.side = side;
  c.phi = phi;
  return c;
}

DeviceSpec line(double extent, std::vector<MaterialRegion> layers, double left, double right) {
  DeviceSpec s;
  s.dimension = 1;
  s.extent = {extent, 1.0};
  s.layers = std::move(layers);
  s.boundary.contacts = {fixed("left", Side::XMin, left), fixed("right", Side::XMax, right)};
  return s;
}

Vector solve_poisson(const DeviceSpec& s, const Mesh& m) {
  return solve_linear(assemble_poisson(s, m).matrix, poisson_data_load(s, m, 0.0),
                      MatrixStructure::SymmetricPositiveDefinite);
}

// Random 2D layered device with contacts on part of the boundary and Robin elsewhere.
DeviceSpec random_device(std::mt19937_64& rng, double a, double b) {
  std::uniform_real_distribution<double> coef(0.2, 5.0);
  DeviceSpec s;
  s.dimension = 2;
  s.extent = {1.0, 1.0};
  s.layers = {region("a", {{0, 0}, {0.5, 1}}, {coef(rng), coef(rng)}),
              region("b", {{0.5, 0}, {1, 1}}, {coef(rng), coef(rng)})};
  s.boundary.contacts = {fixed("l", Side::XMin, a), fixed("r", Side::XMax, b)};
  RobinSegment top;
  top.name = "top";
  top.segment.side = Side::YMax;
  top.capacity = 0.0;
  s.boundary.robin = {top};
  return s;
}

double sup(const Vector& v) { return v.lpNorm<Eigen::Infinity>(); }

}  // namespace

TEST_CASE("Bernoulli function") {
  CHECK(bernoulli(0.0) == 1.0);
  CHECK(bernoulli(1.0) == Approx(1.0 / (std::numbers::e - 1.0)).epsilon(1e-15));
  CHECK(bernoulli(1.0) == Approx(0.581977).epsilon(1e-6));
  CHECK(bernoulli(-3.0) == Approx(3.0 / (1.0 - std::exp(-3.0))).epsilon(1e-15));
  CHECK(bernoulli(-3.0) == Approx(bernoulli(3.0) * std::exp(3.0)).epsilon(1e-14));
  // Series/closed-form seam.
  CHECK(bernoulli(1e-4 * (1 - 1e-12)) == Approx(bernoulli(1e-4 * (1 + 1e-12))).epsilon(1e-14));
  CHECK(bernoulli(800.0) == 0.0);
  CHECK(bernoulli(-800.0) == Approx(800.0));
}

TEST_CASE("two-point SG flux") {
  const auto sg = FluxScheme::scharfetter_gummel();
  CHECK(sg_flux(sg, 1.3, 1.3, 0, 0, 0.0, 1.0) == 0.0);
  CHECK(sg_flux(sg, 2.0, 1.0, 0, 0, 0.0, 1.0) == Approx(1.0));
  for (double drop : {-5.0, -0.3, 0.0, 1e-6, 2.0, 30.0}) {
    const double uR = 0.7;
    const double uL = std::exp(-drop) * uR;
    CHECK(std::abs(sg_flux(sg, uL, uR, 0, 0, drop, 1.0)) <= 1e-14 * std::max(uL, uR));
  }
  // Uniform density drifts against the electron potential gradient.
  CHECK(sg_flux(sg, 1.0, 1.0, 0, 0, -1.0, 1.0) < 0.0);
  CHECK_THROWS_AS(sg_flux(sg, 0.0, 1.0, 0, 0, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(sg_flux({FluxScheme::Kind::ScharfetterGummelEnhanced, std::nullopt}, 1, 1, 0, 0, 0, 1),
                  DomainError);
}

TEST_CASE("enhanced SG reduces to SG under Boltzmann and keeps zero flux under Fermi-Dirac") {
  const auto b = StatisticsModel::boltzmann();
  const auto fd = StatisticsModel::fermi_dirac_half();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> s(-4.0, 4.0);
  for (int i = 0; i < 200; ++i) {
    const double sL = s(rng), sR = s(rng), drop = s(rng), T = 0.5 + std::abs(s(rng));
    const auto plain = sg_coefficients(FluxScheme::scharfetter_gummel(), b.eval(sL), b.eval(sR),
                                       sL, sR, drop, T);
    const auto enh = sg_coefficients(FluxScheme::enhanced(b), b.eval(sL), b.eval(sR), sL, sR,
                                     drop, T);
    CHECK(std::abs(plain.a - enh.a) <= 1e-14 * std::abs(plain.a));
    CHECK(std::abs(plain.b - enh.b) <= 1e-14 * std::abs(plain.b));

    // Equal quasi-Fermi levels: chi_R - chi_L = -(phi_R - phi_L) = drop.
    const double sR2 = sL + drop;
    const double f = sg_flux(FluxScheme::enhanced(fd), fd.eval(sL), fd.eval(sR2), sL, sR2, drop, T);
    CHECK(std::abs(f) <= 1e-12 * T * std::max(fd.eval(sL), fd.eval(sR2)));
  }
}

TEST_CASE("Poisson examples") {
  SUBCASE("3 cells, Dirichlet 0 and 1") {
    const DeviceSpec s = line(1.0, {region("a", {{0, 0}, {1, 1}}, {1, 1})}, 0.0, 1.0);
    const Mesh m = build_mesh(s, {3, 1});
    CHECK(solve_poisson(s, m)(1) == Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("two layers 1 | 2: constant flux, interface potential 2/3") {
    const DeviceSpec s = line(1.0,
                              {region("a", {{0, 0}, {0.5, 1}}, {1, 1}),
                               region("b", {{0.5, 0}, {1, 1}}, {2, 2})},
                              0.0, 1.0);
    const Mesh m = build_mesh(s, {8, 1});
    const Vector phi = solve_poisson(s, m);
    const auto T = face_transmissibilities(s, m, Coefficient::Permittivity);
    std::vector<double> flux;
    for (int fi = 0; fi < m.face_count(); ++fi) {
      const Face& f = m.faces[fi];
      const double lo = f.minus < 0 ? 0.0 : phi(f.minus);
      const double hi = f.plus < 0 ? 1.0 : phi(f.plus);
      flux.push_back(T[fi] * (hi - lo));
    }
    for (double q : flux) CHECK(q == Approx(flux[0]).epsilon(1e-13));
    // Face value from the two half-cell conductances.
    const Face& f = m.faces[4];
    const double g1 = 1.0 / f.dist_minus, g2 = 2.0 / f.dist_plus;
    CHECK((g1 * phi(f.minus) + g2 * phi(f.plus)) / (g1 + g2) == Approx(2.0 / 3.0).epsilon(1e-13));
  }
  SUBCASE("Robin-only device keeps the constant") {
    DeviceSpec s;
    s.dimension = 1;
    s.layers = {region("a", {{0, 0}, {1, 1}}, {1, 1})};
    for (Side side : {Side::XMin, Side::XMax}) {
      RobinSegment r;
      r.name = side == Side::XMin ? "l" : "r";
      r.segment.side = side;
      r.capacity = 1.0;
      r.load = 1.0;
      s.boundary.robin.push_back(r);
    }
    const Mesh m = build_mesh(s, {10, 1});
    CHECK(sup(solve_poisson(s, m) - Vector::Ones(10)) <= 1e-13);
  }
  SUBCASE("no contact and no capacity is singular") {
    DeviceSpec s;
    s.dimension = 1;
    s.layers = {region("a", {{0, 0}, {1, 1}}, {1, 1})};
    CHECK_THROWS_AS(assemble_poisson(s, build_mesh(s, {4, 1})), SolverError);
  }
}

TEST_CASE("elliptic operator weights") {
  const DeviceSpec s = line(1.0, {region("a", {{0, 0}, {1, 1}}, {1, 1})}, 0.0, 0.0);
  const Mesh m = build_mesh(s, {4, 1});
  const std::vector<double> ones(4, 1.0), twos(4, 2.0), checker{1.0, 2.0, 1.0, 2.0};
  const auto a1 = assemble_elliptic(s, m, ones, Coefficient::Mobility1);
  const auto a2 = assemble_elliptic(s, m, twos, Coefficient::Mobility1);
  CHECK((Eigen::MatrixXd(a2.matrix) - 2.0 * Eigen::MatrixXd(a1.matrix)).norm() <= 1e-13);
  // Same as the Poisson operator with eps = 1 and no capacities.
  CHECK((Eigen::MatrixXd(a1.matrix) - Eigen::MatrixXd(assemble_poisson(s, m).matrix)).norm() <= 1e-13);
  const auto T = face_transmissibilities(s, m, Coefficient::Mobility1, checker);
  for (int fi = 1; fi < 4; ++fi) CHECK(T[fi] * 0.25 == Approx(4.0 / 3.0).epsilon(1e-14));
  const std::vector<double> bad{1.0, 0.0, 1.0, 1.0};
  CHECK_THROWS_AS(assemble_elliptic(s, m, bad, Coefficient::Mobility1), DomainError);
}

TEST_CASE("assembled operators are symmetric M-matrices with a maximum principle") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> data(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = data(rng), b = data(rng);
    const DeviceSpec s = random_device(rng, a, b);
    const Mesh m = build_mesh(s, {8, 6});
    std::vector<double> w(m.cell_count());
    for (auto& x : w) x = 0.5 + std::abs(data(rng));
    for (const auto& op : {assemble_poisson(s, m), assemble_elliptic(s, m, w, Coefficient::Mobility2)}) {
      const Eigen::MatrixXd A(op.matrix);
      CHECK((A - A.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * A.cwiseAbs().maxCoeff());
      for (int i = 0; i < A.rows(); ++i) {
        double row = 0.0;
        for (int j = 0; j < A.cols(); ++j) {
          if (i != j) CHECK(A(i, j) <= 0.0);
          row += A(i, j);
        }
        CHECK(row >= -1e-13 * A(i, i));
      }
    }
    const Vector phi = solve_poisson(s, m);
    CHECK(phi.maxCoeff() <= std::max(a, b) + 1e-13);
    CHECK(phi.minCoeff() >= std::min(a, b) - 1e-13);
  }
}

TEST_CASE("continuity assembly") {
  const DeviceSpec s = line(2.0, {region("a", {{0, 0}, {2, 1}}, {1, 1})}, 0.0, 0.0);
  const Mesh m = build_mesh(s, {2, 1});

  SUBCASE("uniform equilibrium is annihilated") {
    const std::vector<double> phi(2, 0.0), u(2, 1.7), sc(2, std::log(1.7));
    ContinuityInputs in{phi, u, sc, {0.0, 0.0}, {1.7, 1.7}, {std::log(1.7), std::log(1.7)}};
    for (int k : {1, 2}) {
      const auto sys = assemble_continuity(s, m, in, FluxScheme::scharfetter_gummel(), k);
      const Eigen::Map<const Vector> uv(u.data(), 2);
      CHECK(sup(sys.op.apply(uv) - sys.load) <= 1e-13);
    }
  }

  SUBCASE("two-cell steady current matches the exact constant-flux value") {
    // Linear potential 0.7 x; contact quasi-Fermi levels 0.4 and -0.2.
    const double slope = 0.7;
    const std::vector<double> phi{0.5 * slope, 1.5 * slope}, u{1.0, 1.0}, sc{0.0, 0.0};
    const double uL = std::exp(0.4 - 0.0), uR = std::exp(-0.2 - 2.0 * slope);
    ContinuityInputs in{phi, u, sc, {0.0, 2.0 * slope}, {uL, uR}, {std::log(uL), std::log(uR)}};
    const auto sys = assemble_continuity(s, m, in, FluxScheme::scharfetter_gummel(), 1);
    const Vector steady = solve_linear(sys.op.matrix, sys.load, MatrixStructure::General);
    const auto flux = face_fluxes(sys, m, {steady.data(), 2});
    // (u e^{phi})' = -(N/mu) e^{phi} along the whole device.
    const double L = 2.0, dphi = slope * L;
    const double exact = -(dphi) * (uR * std::exp(dphi) - uL) / (L * (std::exp(dphi) - 1.0));
    CHECK(flux[1] == Approx(exact).epsilon(1e-12));
    CHECK(-flux[0] == Approx(exact).epsilon(1e-12));  // left face is outward
    CHECK(flux[2] == Approx(exact).epsilon(1e-12));
  }
}

TEST_CASE("surface loads") {
  DeviceSpec s;
  s.dimension = 2;
  s.layers = {region("a", {{0, 0}, {1, 1}}, {1, 1})};
  s.boundary.contacts = {fixed("l", Side::XMin, 0.0)};
  const Mesh m4 = build_mesh(s, {4, 4});
  const int left = 0;  // x-face at x = 0, first row
  REQUIRE(m4.faces[left].is_boundary());
  const std::vector<int> one{left};
  const std::vector<double> unit{1.0};
  const Vector load = apply_surface_load(m4, one, unit);
  CHECK(load(m4.faces[left].boundary_cell()) == Approx(0.25));
  CHECK(load.sum() == Approx(0.25));

  const Mesh m2 = build_mesh(s, {2, 2});
  const int mid = 1;
  REQUIRE_FALSE(m2.faces[mid].is_boundary());
  const std::vector<int> inner{mid};
  const Vector split = apply_surface_load(m2, inner, unit);
  CHECK(split(m2.faces[mid].minus) == Approx(0.25));
  CHECK(split(m2.faces[mid].plus) == Approx(0.25));

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> r(-3.0, 3.0);
  std::uniform_int_distribution<int> pick(0, m4.face_count() - 1);
  std::vector<int> faces;
  std::vector<double> rates;
  double direct = 0.0, scale = 0.0;
  for (int k = 0; k < 60; ++k) {
    faces.push_back(pick(rng));
    rates.push_back(r(rng));
    direct += rates.back() * m4.faces[faces.back()].area;
    scale += std::abs(rates.back() * m4.faces[faces.back()].area);
  }
  CHECK(std::abs(apply_surface_load(m4, faces, rates).sum() - direct) <= 1e-15 * scale);
  const std::vector<int> bad{m4.face_count()};
  CHECK_THROWS_AS(apply_surface_load(m4, bad, unit), GeometryError);
}

TEST_CASE("linear solver") {
  SparseMatrix I(5, 5);
  I.setIdentity();
  const Vector b = Vector::LinSpaced(5, -1.0, 3.0);
  CHECK(sup(solve_linear(I, b, MatrixStructure::SymmetricPositiveDefinite) - b) == 0.0);

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> coef(0.1, 10.0);
  DeviceSpec s;
  s.dimension = 1;
  s.extent = {5.0, 1.0};
  for (int k = 0; k < 5; ++k) {
    const double e = coef(rng);
    s.layers.push_back(region("l" + std::to_string(k), {{double(k), 0}, {k + 1.0, 1}}, {e, e}));
  }
  s.boundary.contacts = {fixed("l", Side::XMin, 0.0)};
  RobinSegment r;
  r.name = "r";
  r.segment.side = Side::XMax;
  r.capacity = 0.3;
  s.boundary.robin = {r};
  const Mesh m = build_mesh(s, {50, 1});
  const auto P = assemble_poisson(s, m);
  Vector rhs(50);
  for (int i = 0; i < 50; ++i) rhs(i) = coef(rng) - 5.0;
  for (auto structure : {MatrixStructure::SymmetricPositiveDefinite, MatrixStructure::General}) {
    const Vector x = LinearSolver(P.matrix, structure).solve(rhs);
    CHECK((P.matrix * x - rhs).norm() <= 1e-12 * rhs.norm());
  }
  CHECK_THROWS_AS(LinearSolver(P.matrix, MatrixStructure::General).solve(Vector::Ones(3)),
                  SolverError);
}
