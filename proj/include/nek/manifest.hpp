#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace nek::cfg {

inline constexpr const char* kToolVersion = "0.1.0";

// Every CLI run writes out_dir/manifest.json with the resolved parameters,
// seed, tool version and input fingerprints, so runs can be reproduced
// byte-for-byte.  No timestamps: the manifest itself is deterministic.
struct Manifest {
  std::string subcommand;
  nlohmann::json config;
  std::map<std::string, std::string> input_hashes;  // path -> fnv64 hex
  std::vector<std::string> outputs;
  nlohmann::json extra;

  void add_input_file(const std::string& path);  // hashes the file bytes
  nlohmann::json to_json() const;
  void write(const std::string& out_dir) const;
};

std::string read_file(const std::string& path);  // throws ConfigError
void write_file(const std::string& path, const std::string& data);

}  // namespace nek::cfg
