#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ddsim/config.hpp"
#include "ddsim/verify/verify.hpp"

namespace ddsim::verify::detail {

std::vector<Check> kappa_lipschitz(std::uint64_t seed);
std::vector<Check> kappa_branches(std::uint64_t seed);
std::vector<Check> fermi_dirac(std::uint64_t seed);
std::vector<Check> s_nonexpansive(std::uint64_t seed);
std::vector<Check> s_zero(std::uint64_t seed);
std::vector<Check> s_agreement(std::uint64_t seed);
std::vector<Check> mms_poisson(std::uint64_t seed);
std::vector<Check> mms_time(std::uint64_t seed);
std::vector<Check> conservation(std::uint64_t seed);
std::vector<Check> equilibrium(std::uint64_t seed);
std::vector<Check> blowup(std::uint64_t seed);
std::vector<Check> gummel_monolithic(std::uint64_t seed);

SimulationConfig shipped_config(const std::string& name);

/// Least-squares slope of log(err) against log(h).
double observed_order(const std::vector<double>& h, const std::vector<double>& err);

}  // namespace ddsim::verify::detail
