#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace ddsim::cli {

/// Process exit codes.
enum Exit : int { kComplete = 0, kFailure = 1, kUsage = 2, kBlowUp = 3 };

struct RunOptions {
  std::filesystem::path deck;
  std::filesystem::path out_dir = "simulate-out";
};

/// Writes timeseries.csv, fields_final.csv, config.normalized.yaml and, if
/// requested by the deck, fields_<step>.csv into out_dir; blowup_report.txt
/// on exit 3.
int cmd_run(const RunOptions& options, std::ostream& log, std::ostream& err);

struct SweepOptions {
  std::filesystem::path deck;
  std::string param;
  std::vector<double> values;
  /// Empty writes the table to `out`.
  std::filesystem::path output;
  int workers = 1;
};

/// One row per value, in the order given:
///   value, I_<contact>..., wall_time, steps, gummel_iterations, status, error
int cmd_sweep(const SweepOptions& options, std::ostream& out, std::ostream& err);

/// Check table on `out`, summary on `err`. Exit 0 if every check passes.
int cmd_verify(const std::string& suite, std::uint64_t seed, std::ostream& out,
               std::ostream& err);

/// SIMULATE_WORKERS if set to a positive integer, else the hardware concurrency.
int worker_count_from_env();

/// Comma-separated doubles; an empty or blank string gives an empty list.
/// Throws std::invalid_argument naming the bad entry.
std::vector<double> parse_value_list(std::string_view text);

/// Entry point shared by the executable and the tests.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ddsim::cli
