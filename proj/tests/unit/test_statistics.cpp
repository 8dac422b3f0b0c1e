#include <doctest.h>

#include <cmath>
#include <random>

#include "ddsim/error.hpp"
#include "ddsim/statistics.hpp"
#include "ddsim/verify/oracles.hpp"

using namespace ddsim;
using doctest::Approx;

namespace {
const auto boltz = StatisticsModel::boltzmann();
const auto fd = StatisticsModel::fermi_dirac_half();
}  // namespace

TEST_CASE("Boltzmann is the exponential") {
  CHECK(boltz.eval(0.0) == 1.0);
  CHECK(boltz.eval(3.0) == std::exp(3.0));
  CHECK(boltz.eval_derivative(-2.0) == std::exp(-2.0));
  CHECK(boltz.eval_eta(17.0) == 1.0);
  CHECK(boltz.invert(1.0) == 0.0);
  CHECK(boltz.invert(std::exp(3.0)) == Approx(3.0).epsilon(1e-15));
}

TEST_CASE("Fermi-Dirac values against the Simpson oracle") {
  CHECK(std::abs(fd.eval(0.0) - verify::fermi_dirac_half_oracle(0.0)) <= 1e-5);
  CHECK(std::abs(fd.eval(0.0) - 0.76515) <= 1e-5);
  CHECK(std::abs(fd.eval_derivative(0.0) - verify::fermi_dirac_half_derivative_oracle(0.0)) <= 1e-4);
  CHECK(std::abs(fd.eval_derivative(0.0) - 0.60490) <= 1e-4);
  CHECK(std::abs(fd.eval_eta(0.0) - 1.26491) <= 1e-3);
  const double s = -12.0;
  CHECK(std::abs(fd.eval(s) / std::exp(s) - 1.0) <= 1e-4);
  CHECK(std::abs(fd.eval_derivative(s) / std::exp(s) - 1.0) <= 1e-3);
  CHECK(std::abs(fd.eval_eta(s) - 1.0) <= 1e-3);
  CHECK(std::abs(fd.invert(0.76515)) <= 1e-4);
}

TEST_CASE("crossovers are continuous") {
  for (double s : {StatisticsModel::kNondegenerateCrossover, StatisticsModel::kDegenerateCrossover}) {
    const QuadratureOptions q{};
    CHECK(fermi_dirac::half_by_quadrature(s, q) ==
          Approx(fd.eval(s)).epsilon(1e-12));
    CHECK(fermi_dirac::minus_half_by_quadrature(s, q) ==
          Approx(fd.eval_derivative(s)).epsilon(1e-12));
  }
  CHECK(fermi_dirac::half_nondegenerate_series(-15.0) ==
        Approx(fermi_dirac::half_by_quadrature(-15.0, {})).epsilon(1e-13));
  CHECK(fermi_dirac::half_degenerate_series(30.0) ==
        Approx(fermi_dirac::half_by_quadrature(30.0, {})).epsilon(1e-12));
}

TEST_CASE("round trip through invert") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(-20.0, 20.0);
  for (int i = 0; i < 1000; ++i) {
    const double s = dist(rng);
    CHECK(std::abs(fd.invert(fd.eval(s)) - s) <= 1e-8 + 1e-8 * std::abs(s));
    CHECK(std::abs(boltz.invert(boltz.eval(s)) - s) <= 1e-8 + 1e-8 * std::abs(s));
  }
}

TEST_CASE("monotone, eta >= 1 and derivative consistent on a grid") {
  double prev = -1.0;
  for (int i = 0; i < 1000; ++i) {
    const double s = -20.0 + 40.0 * i / 999.0;
    const double f = fd.eval(s);
    CHECK(f > prev);
    prev = f;
    CHECK(fd.eval_eta(s) >= 1.0 - 1e-10);
    const double d = fd.eval_derivative(s);
    const double fdiff = (fd.eval(s + 1e-5) - fd.eval(s - 1e-5)) / 2e-5;
    CHECK(std::abs(d - fdiff) <= 1e-4 * std::max(1.0, d));
  }
}

TEST_CASE("domain and configuration errors") {
  CHECK_THROWS_AS(fd.eval(std::nan("")), DomainError);
  CHECK_THROWS_AS(boltz.eval(INFINITY), DomainError);
  CHECK_THROWS_AS(fd.invert(0.0), DomainError);
  CHECK_THROWS_AS(fd.invert(-1.0), DomainError);
  CHECK_THROWS_AS(StatisticsModel(StatisticsKind::FermiDiracHalf, {0.0, 10}), DomainError);
  // A one-level rule cannot reach 1e-15.
  CHECK_THROWS_AS(StatisticsModel(StatisticsKind::FermiDiracHalf, {1e-15, 1}).eval(1.0),
                  QuadratureError);
}
