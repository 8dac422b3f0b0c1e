#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ddsim/config.hpp"

namespace ddsim::test {

/// Fresh empty directory under the build tree.
std::filesystem::path fresh_dir(const std::string& tag);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// A shipped deck, parsed.
SimulationConfig deck(const std::string& name);
/// Path of a shipped deck in the source tree.
std::filesystem::path deck_path(const std::string& name);

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

/// Runs the CLI in-process: args exclude the program name.
CliResult run_cli(const std::vector<std::string>& args);

}  // namespace ddsim::test
