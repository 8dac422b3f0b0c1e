#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace ddsim::verify {

/// One measured property: passes iff lower <= measured <= upper.
struct Check {
  std::string suite;
  std::string property;
  double measured = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool pass() const { return measured >= lower && measured <= upper; }
};

Check at_most(std::string suite, std::string property, double measured, double bound);
Check at_least(std::string suite, std::string property, double measured, double bound);
Check within(std::string suite, std::string property, double measured, double lower,
             double upper);

struct Suite {
  std::string name;
  std::string summary;
  std::function<std::vector<Check>(std::uint64_t seed)> run;
};

/// Every registered suite, in the order `all` runs them.
const std::vector<Suite>& suites();

/// Null for unknown names; "all" is not a suite of its own.
const Suite* find_suite(std::string_view name);

/// Runs one suite or, for "all", every suite. Throws std::invalid_argument
/// for an unknown name. A suite that throws contributes a failing check.
std::vector<Check> run_suite(std::string_view name, std::uint64_t seed);

/// CSV: suite,property,measured,lower,upper,status
void write_checks(std::ostream& out, const std::vector<Check>& checks);

bool all_passed(const std::vector<Check>& checks);

}  // namespace ddsim::verify
