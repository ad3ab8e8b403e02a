#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nek/config.hpp"

namespace nek::run {

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;      // measured quantity
  double threshold = 0.0;  // pass bound
  std::string details;
};

// Operational property suite behind the `verify` subcommand: splitting
// partition, cohomological identity, Lie canonicity, full-rank emptiness,
// the volume inequality, classification uniqueness, envelope algebra.
// Smaller trial counts than the acceptance suite; same machinery.
std::vector<CheckResult> verify_suite(const cfg::RunConfig& config);

}  // namespace nek::run
