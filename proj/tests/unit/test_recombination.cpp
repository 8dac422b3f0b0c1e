#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "ddsim/error.hpp"
#include "ddsim/recombination.hpp"

using namespace ddsim;
using doctest::Approx;

namespace {
using V3 = std::array<double, 3>;
double k(const V3& e, const V3& j, double a) { return kappa(e, j, a); }
}  // namespace

TEST_CASE("kappa examples") {
  CHECK(k({1, 2, 3}, {0, 0, 0}, 1.0) == 0.0);
  CHECK(k({0, 1, 0}, {1, 0, 0}, 1.0) == 0.0);
  CHECK(k({1, 0, 0}, {2, 0, 0}, 1.0) == Approx(2.0 * std::exp(-1.0)).epsilon(1e-15));
  CHECK(k({1, 0, 0}, {2, 0, 0}, 1.0) == Approx(0.735759).epsilon(1e-6));
  // Antiparallel field and current count the same.
  CHECK(k({-1, 0, 0}, {2, 0, 0}, 1.0) == k({1, 0, 0}, {2, 0, 0}, 1.0));
  // Tiny projected field underflows to zero rather than dividing by zero.
  CHECK(k({1e-320, 0, 0}, {1, 0, 0}, 1.0) == 0.0);
}

TEST_CASE("kappa Lipschitz constant and bound") {
  CHECK(kappa_lipschitz_constant(1.0) == Approx(4.0 / std::exp(2.0)).epsilon(1e-15));
  CHECK(kappa_lipschitz_constant(1.0) < 0.542);
  CHECK(kappa_lipschitz_constant(2.0) == Approx(0.5 * kappa_lipschitz_constant(1.0)));
  CHECK(kappa_lipschitz_bound(1.0, 0, 0, 0, 0) == 0.0);
  CHECK(kappa_lipschitz_bound(2.0, 1.0, 0.0, 1.0, 0.0) ==
        Approx(2.0 * 4.0 / (2.0 * std::exp(2.0)) + 1.0).epsilon(1e-15));
}

TEST_CASE("kappa range and Lipschitz estimate on random samples") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  auto ball = [&] {
    for (;;) {
      V3 v{u(rng), u(rng), u(rng)};
      if (std::hypot(v[0], v[1], v[2]) <= 10.0) return v;
    }
  };
  auto norm = [](const V3& v) { return std::hypot(v[0], v[1], v[2]); };
  for (double a : {0.5, 1.0, 2.0}) {
    for (int i = 0; i < 20000; ++i) {
      const V3 e1 = ball(), j1 = ball(), e2 = ball(), j2 = ball();
      const double k1 = k(e1, j1, a);
      CHECK(k1 >= 0.0);
      CHECK(k1 <= norm(j1));
      const V3 dj{j1[0] - j2[0], j1[1] - j2[1], j1[2] - j2[2]};
      const V3 de{e1[0] - e2[0], e1[1] - e2[1], e1[2] - e2[2]};
      CHECK(std::abs(k1 - k(e2, j2, a)) <=
            kappa_lipschitz_bound(a, norm(e1), norm(j2), norm(dj), norm(de)) + 1e-14);
    }
  }
}

TEST_CASE("bulk rate examples") {
  BulkInputs eq;
  eq.u1 = 2.0;
  eq.u2 = 0.5;
  CHECK(eval_bulk(Srh{}, eq) == 0.0);
  BulkInputs in;
  in.u1 = 2.0;
  in.u2 = 3.0;
  CHECK(eval_bulk(Srh{}, in) == Approx(5.0 / 7.0).epsilon(1e-15));
  BulkInputs ones;
  CHECK(eval_bulk(Auger{}, ones) == 0.0);
  CHECK(eval_bulk(Avalanche{}, ones) == 0.0);
  CHECK(eval_surface(ZeroSurface{}, 2.0, 3.0) == 0.0);
  CHECK(eval_surface(SurfaceSrh{}, 2.0, 0.5) == 0.0);
  CHECK(eval_surface(SurfaceSrh{}, 2.0, 3.0) == Approx(5.0 / 7.0).epsilon(1e-15));
  // Printed SRH/Auger expressions are net recombination; production has the other sign.
  CHECK(bulk_production(Srh{}, in) == -eval_bulk(Srh{}, in));
  CHECK(surface_production(SurfaceSrh{}, 2.0, 3.0) == -eval_surface(SurfaceSrh{}, 2.0, 3.0));
  BulkInputs neg;
  neg.u1 = -1.0;
  CHECK_THROWS_AS(eval_bulk(Srh{}, neg), DomainError);
}

TEST_CASE("rate sign properties") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.01, 10.0), phi(-3.0, 3.0), v(-5.0, 5.0);
  const Srh srh{1.3, 0.7, 2.0, 0.5, 1.5};
  for (int i = 0; i < 5000; ++i) {
    BulkInputs in;
    in.u1 = u(rng);
    in.u2 = u(rng);
    const double excess = in.u1 * in.u2 - srh.n_i * srh.n_i;
    const double r = eval_bulk(srh, in);
    CHECK((r > 0) == (excess > 0));
    CHECK((r < 0) == (excess < 0));
    // On the hyperbola u1 u2 = ni^2.
    in.u2 = srh.n_i * srh.n_i / in.u1;
    CHECK(std::abs(eval_bulk(srh, in)) <= 1e-14);

    for (int c = 0; c < 3; ++c) in.grad_phi[c] = v(rng), in.j1[c] = v(rng), in.j2[c] = v(rng);
    CHECK(eval_bulk(Avalanche{0.7, 1.2, 3.0, 0.5}, in) >= 0.0);

    in.Phi1 = phi(rng);
    in.Phi2 = -in.Phi1;
    CHECK(std::abs(eval_bulk(MassAction{2.0, 1.0}, in)) <= 1e-14);
  }
}

TEST_CASE("linearized rates reproduce the production at the frozen state") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.05, 5.0), phi(-2.0, 2.0);
  const std::vector<BulkRecombination> models{Srh{1.0, 0.5, 2.0, 1.0, 3.0}, Auger{1.0, 0.2, 0.4},
                                              MassAction{2.0, 1.5}, Avalanche{1.0, 1.0, 2.0, 2.0}};
  for (int i = 0; i < 500; ++i) {
    BulkInputs in;
    in.u1 = u(rng);
    in.u2 = u(rng);
    in.Phi1 = std::log(in.u1) + phi(rng) * 0.1;
    in.Phi2 = std::log(in.u2) - phi(rng) * 0.1;
    in.grad_phi = {phi(rng), 0.0, 0.0};
    in.j1 = {phi(rng), phi(rng), 0.0};
    in.j2 = {phi(rng), 0.0, phi(rng)};
    for (const auto& m : models) {
      const double p = bulk_production(m, in);
      for (int c : {1, 2}) {
        const auto lin = linearize_bulk(m, c, in);
        CHECK(lin.loss >= 0.0);
        const double self = c == 1 ? in.u1 : in.u2;
        CHECK(lin.generation - lin.loss * self == Approx(p).epsilon(1e-12).scale(1.0));
      }
    }
    const SurfaceSrh s{1.0, 0.5, 0.5, 0.2, 0.3};
    for (int c : {1, 2}) {
      const auto lin = linearize_surface(s, c, in.u1, in.u2);
      CHECK(lin.generation - lin.loss * (c == 1 ? in.u1 : in.u2) ==
            Approx(surface_production(s, in.u1, in.u2)).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("model validation") {
  CHECK(validate_model(BulkRecombination{Srh{}}).empty());
  CHECK_FALSE(validate_model(BulkRecombination{Srh{1, 1, 1, 0.0, 1}}).empty());
  CHECK_FALSE(validate_model(BulkRecombination{Avalanche{0.0, 1, 1, 1}}).empty());
  CHECK(model_name(BulkRecombination{Auger{}}) == "auger");
  CHECK(model_name(SurfaceRecombination{SurfaceSrh{}}) == "surface-srh");
}
