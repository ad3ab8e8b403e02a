#include "nek/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nek/config.hpp"
#include "nek/errors.hpp"

namespace nek::cfg {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& data) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << data;
}

void Manifest::add_input_file(const std::string& path) {
  std::ostringstream hex;
  hex << std::hex << fnv1a64(read_file(path));
  input_hashes[path] = hex.str();
}

nlohmann::json Manifest::to_json() const {
  nlohmann::json j;
  j["tool"] = "nek";
  j["version"] = kToolVersion;
  j["subcommand"] = subcommand;
  j["config"] = config;
  j["inputs"] = input_hashes;
  j["outputs"] = outputs;
  if (!extra.is_null()) j["extra"] = extra;
  return j;
}

void Manifest::write(const std::string& out_dir) const {
  std::filesystem::create_directories(out_dir);
  write_file((std::filesystem::path(out_dir) / "manifest.json").string(),
             to_json().dump(2) + "\n");
}

}  // namespace nek::cfg
