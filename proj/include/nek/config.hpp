#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"
#include "nek/cutoffs.hpp"
#include "nek/dynamics.hpp"
#include "nek/geometry.hpp"

namespace nek::cfg {

// Run configuration, read from one TOML file with [symbols], [cutoffs],
// [zone], [integrator] and [harness] sections.  Only the flat subset of TOML
// is supported: comments, sections, and key = number / bool / "string" /
// [numbers].  Unknown keys are rejected.
struct RunConfig {
  geo::ZoneParams zone;
  cut::CutoffParams cutoffs;
  dyn::IntegratorOptions integrator;
  struct Symbols {
    int kmax_budget = 32;
    int max_steps = 3;
    double beta = 1.0;
    double target_order = -3.0;
  } symbols;
  struct Harness {
    double horizon = 1e6;
    long decimate = 10000;
    bool forward_only = true;
  } harness;
  std::uint64_t seed = 1234;
  int threads = 0;  // 0: hardware concurrency

  static RunConfig from_toml_text(const std::string& text);
  static RunConfig load(const std::string& path);
  void validate();  // throws ConfigError with an actionable message
  nlohmann::json to_json() const;
};

// FNV-1a over a byte string, for input fingerprints in manifests.
std::uint64_t fnv1a64(std::string_view bytes);

// Deterministic per-task seed derivation (splitmix64 over seed ^ salt).
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t salt);

}  // namespace nek::cfg
