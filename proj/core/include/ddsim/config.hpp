#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ddsim/device.hpp"
#include "ddsim/error.hpp"
#include "ddsim/mesh.hpp"
#include "ddsim/statistics.hpp"
#include "ddsim/transient.hpp"

namespace ddsim {

/// Every problem found in a deck, each prefixed with its line number.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const noexcept { return errors_; }

 private:
  std::vector<std::string> errors_;
};

struct InitialCondition {
  /// Thermal equilibrium; otherwise uniform quasi-Fermi levels.
  bool equilibrium = true;
  double Phi1 = 0.0;
  double Phi2 = 0.0;
  friend bool operator==(const InitialCondition&, const InitialCondition&) = default;
};

struct OutputSpec {
  /// Write a field snapshot every this many accepted steps (0: final only).
  int snapshot_every = 0;
  friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

struct SimulationConfig {
  DeviceSpec device;
  Resolution resolution;
  PhysicsModels models;
  InitialCondition initial;
  TimeStepperConfig stepper;
  OutputSpec output;
  std::uint64_t seed = 0;

  friend bool operator==(const SimulationConfig& a, const SimulationConfig& b) {
    return a.device == b.device && a.resolution.nx == b.resolution.nx &&
           a.resolution.ny == b.resolution.ny && a.models == b.models && a.initial == b.initial &&
           a.stepper == b.stepper && a.output == b.output && a.seed == b.seed;
  }
};

/// Parses and validates a deck. Throws ConfigError listing every problem;
/// unknown keys are errors that name the nearest valid key.
SimulationConfig parse_config(std::string_view text);

/// Reads and parses a deck file.
SimulationConfig load_config(const std::filesystem::path& path);

/// Canonical deck text: every field spelled out, doubles in round-trip precision.
std::string dump_config(const SimulationConfig& config);

/// Returns `text` with the scalar at a dotted path (list entries by index,
/// e.g. "device.contacts.anode.bias" or "recombination.0.tau_n") replaced by
/// `value`. Throws ConfigError if the path does not resolve.
std::string set_config_value(std::string_view text, std::string_view path, double value);

/// Builds the simulation (meshes the device, factorizes the Poisson operator).
Simulation make_simulation(const SimulationConfig& config);

/// Initial state requested by the deck.
CarrierState initial_state(const Simulation& sim, const SimulationConfig& config);

/// Levenshtein distance, used for key suggestions.
std::size_t edit_distance(std::string_view a, std::string_view b);

}  // namespace ddsim
