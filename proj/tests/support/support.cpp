#include "support.hpp"

#include <fstream>
#include <sstream>

#include "ddsim/cli.hpp"
#include "ddsim/verify/decks.hpp"

namespace ddsim::test {

std::filesystem::path fresh_dir(const std::string& tag) {
  const auto dir = std::filesystem::path(DDSIM_TEST_SCRATCH) / tag;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

SimulationConfig deck(const std::string& name) {
  return parse_config(verify::shipped_deck(name));
}

std::filesystem::path deck_path(const std::string& name) {
  return std::filesystem::path(DDSIM_DECK_DIR) / (name + ".yaml");
}

CliResult run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"simulate"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliResult r;
  r.code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

}  // namespace ddsim::test
