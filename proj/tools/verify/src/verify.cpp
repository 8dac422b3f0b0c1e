#include "ddsim/verify/verify.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "ddsim/output.hpp"
#include "ddsim/verify/decks.hpp"
#include "suites.hpp"

namespace ddsim::verify {

Check at_most(std::string suite, std::string property, double measured, double bound) {
  return {std::move(suite), std::move(property), measured,
          -std::numeric_limits<double>::infinity(), bound};
}

Check at_least(std::string suite, std::string property, double measured, double bound) {
  return {std::move(suite), std::move(property), measured, bound,
          std::numeric_limits<double>::infinity()};
}

Check within(std::string suite, std::string property, double measured, double lower,
             double upper) {
  return {std::move(suite), std::move(property), measured, lower, upper};
}

const std::vector<Suite>& suites() {
  using namespace detail;
  static const std::vector<Suite> all = {
      {"kappa-lipschitz", "avalanche kernel against its Lipschitz certificate", kappa_lipschitz},
      {"kappa-branches", "avalanche kernel branch and range", kappa_branches},
      {"fermi-dirac", "Fermi-Dirac integral against a Simpson oracle", fermi_dirac},
      {"s-nonexpansive", "nonexpansiveness of the nonlinear Poisson map", s_nonexpansive},
      {"s-zero", "S vanishes on constant equilibrium data", s_zero},
      {"s-agreement", "Newton against the contraction iteration", s_agreement},
      {"mms-poisson", "spatial order of the nonlinear Poisson solve", mms_poisson},
      {"mms-time", "temporal order of the implicit Euler step", mms_time},
      {"conservation", "discrete balance on shipped decks", conservation},
      {"equilibrium", "stationarity of thermal equilibrium", equilibrium},
      {"blowup", "positivity and blow-up detection", blowup},
      {"gummel-monolithic", "Gummel step against a monolithic Newton oracle", gummel_monolithic},
  };
  return all;
}

const Suite* find_suite(std::string_view name) {
  for (const auto& s : suites())
    if (s.name == name) return &s;
  return nullptr;
}

namespace {

void run_one(const Suite& suite, std::uint64_t seed, std::vector<Check>& out) {
  try {
    auto checks = suite.run(seed);
    out.insert(out.end(), checks.begin(), checks.end());
  } catch (const std::exception& e) {
    // A suite that cannot finish fails as a whole; NaN fails every bound.
    out.push_back({suite.name, std::string("completed: ") + e.what(),
                   std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0});
  }
}

}  // namespace

std::vector<Check> run_suite(std::string_view name, std::uint64_t seed) {
  std::vector<Check> out;
  if (name == "all") {
    for (const auto& s : suites()) run_one(s, seed, out);
    return out;
  }
  const Suite* s = find_suite(name);
  if (!s) throw std::invalid_argument("unknown suite '" + std::string(name) + "'");
  run_one(*s, seed, out);
  return out;
}

void write_checks(std::ostream& out, const std::vector<Check>& checks) {
  out << "suite,property,measured,lower,upper,status\n";
  for (const auto& c : checks) {
    write_csv_row(out, {c.suite, c.property, format_number(c.measured), format_number(c.lower),
                        format_number(c.upper), c.pass() ? "PASS" : "FAIL"});
  }
}

bool all_passed(const std::vector<Check>& checks) {
  for (const auto& c : checks)
    if (!c.pass()) return false;
  return !checks.empty();
}

namespace detail {

SimulationConfig shipped_config(const std::string& name) {
  return parse_config(shipped_deck(name));
}

double observed_order(const std::vector<double>& h, const std::vector<double>& err) {
  const std::size_t n = h.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(h[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace detail

}  // namespace ddsim::verify
