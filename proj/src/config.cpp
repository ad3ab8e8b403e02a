#include "nek/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <variant>
#include <vector>

#include "nek/errors.hpp"

namespace nek::cfg {

namespace {

using TomlValue =
    std::variant<double, bool, std::string, std::vector<double>>;
using TomlTable = std::map<std::string, std::map<std::string, TomlValue>>;

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
  bool in_str = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_str = !in_str;
    if (line[i] == '#' && !in_str) return line.substr(0, i);
  }
  return line;
}

TomlValue parse_value(const std::string& raw, int line_no) {
  std::string v = trim(raw);
  if (v.empty())
    throw ConfigError("config line " + std::to_string(line_no) +
                      ": empty value");
  if (v == "true") return true;
  if (v == "false") return false;
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"')
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": unterminated string");
    return v.substr(1, v.size() - 2);
  }
  if (v.front() == '[') {
    if (v.back() != ']')
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": unterminated array");
    std::vector<double> arr;
    std::string inner = v.substr(1, v.size() - 2);
    std::stringstream ss(inner);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      char* end = nullptr;
      double x = std::strtod(item.c_str(), &end);
      if (end != item.c_str() + item.size())
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": bad array element '" + item + "'");
      arr.push_back(x);
    }
    return arr;
  }
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size())
    throw ConfigError("config line " + std::to_string(line_no) +
                      ": cannot parse value '" + v + "'");
  return x;
}

TomlTable parse_toml(const std::string& text) {
  TomlTable table;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": empty key");
    table[section][key] = parse_value(line.substr(eq + 1), line_no);
  }
  return table;
}

struct Reader {
  const TomlTable& table;
  std::map<std::string, std::vector<std::string>> consumed;

  template <typename T>
  void number(const std::string& sec, const std::string& key, T& out) {
    auto s = table.find(sec);
    if (s == table.end()) return;
    auto it = s->second.find(key);
    if (it == s->second.end()) return;
    consumed[sec].push_back(key);
    if (!std::holds_alternative<double>(it->second))
      throw ConfigError("config: '" + sec + "." + key + "' must be a number");
    out = static_cast<T>(std::get<double>(it->second));
  }

  void boolean(const std::string& sec, const std::string& key, bool& out) {
    auto s = table.find(sec);
    if (s == table.end()) return;
    auto it = s->second.find(key);
    if (it == s->second.end()) return;
    consumed[sec].push_back(key);
    if (!std::holds_alternative<bool>(it->second))
      throw ConfigError("config: '" + sec + "." + key + "' must be a bool");
    out = std::get<bool>(it->second);
  }

  void array(const std::string& sec, const std::string& key,
             std::vector<double>& out) {
    auto s = table.find(sec);
    if (s == table.end()) return;
    auto it = s->second.find(key);
    if (it == s->second.end()) return;
    consumed[sec].push_back(key);
    if (!std::holds_alternative<std::vector<double>>(it->second))
      throw ConfigError("config: '" + sec + "." + key + "' must be an array");
    out = std::get<std::vector<double>>(it->second);
  }

  void check_unknown() const {
    for (const auto& [sec, keys] : table) {
      auto c = consumed.find(sec);
      for (const auto& [key, val] : keys) {
        bool ok = c != consumed.end() &&
                  std::find(c->second.begin(), c->second.end(), key) !=
                      c->second.end();
        if (!ok)
          throw ConfigError("config: unknown key '" + sec + "." + key + "'");
      }
    }
  }
};

}  // namespace

RunConfig RunConfig::from_toml_text(const std::string& text) {
  RunConfig cfg;
  TomlTable table = parse_toml(text);
  Reader r{table, {}};

  r.number("", "seed", cfg.seed);
  r.number("", "threads", cfg.threads);

  r.number("zone", "d", cfg.zone.d);
  r.number("zone", "delta", cfg.zone.delta);
  r.number("zone", "mu", cfg.zone.mu);
  r.array("zone", "c", cfg.zone.cs);
  r.array("zone", "dbnd", cfg.zone.ds);
  r.number("zone", "radius", cfg.zone.radius);
  r.number("zone", "plane_step_div", cfg.zone.plane_step_div);
  r.number("zone", "plane_radius_factor", cfg.zone.plane_radius_factor);
  r.number("zone", "plane_budget", cfg.zone.plane_budget);
  r.number("zone", "boundary_eps", cfg.zone.boundary_eps);

  r.number("cutoffs", "delta", cfg.cutoffs.delta);
  r.number("cutoffs", "mu", cfg.cutoffs.mu);

  r.number("integrator", "dt", cfg.integrator.dt);
  r.number("integrator", "tol_fp", cfg.integrator.tol_fp);
  r.number("integrator", "max_fp_iter", cfg.integrator.max_fp_iter);
  r.number("integrator", "max_halvings", cfg.integrator.max_halvings);
  r.number("integrator", "spike_threshold", cfg.integrator.spike_threshold);
  r.number("integrator", "decimate", cfg.integrator.decimate);
  r.number("integrator", "budget_steps", cfg.integrator.budget_steps);
  r.boolean("integrator", "audit_symplectic", cfg.integrator.audit_symplectic);
  r.number("integrator", "audit_count", cfg.integrator.audit_count);
  r.number("integrator", "audit_h", cfg.integrator.audit_h);

  r.number("symbols", "kmax_budget", cfg.symbols.kmax_budget);
  r.number("symbols", "max_steps", cfg.symbols.max_steps);
  r.number("symbols", "beta", cfg.symbols.beta);
  r.number("symbols", "target_order", cfg.symbols.target_order);

  r.number("harness", "horizon", cfg.harness.horizon);
  r.number("harness", "decimate", cfg.harness.decimate);
  r.boolean("harness", "forward_only", cfg.harness.forward_only);

  r.check_unknown();
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return from_toml_text(buf.str());
}

void RunConfig::validate() {
  zone.validate();
  cutoffs.validate();
  if (!(integrator.dt > 0.0))
    throw ConfigError("config: integrator.dt must be positive");
  if (!(integrator.tol_fp > 0.0))
    throw ConfigError("config: integrator.tol_fp must be positive");
  if (integrator.decimate < 1)
    throw ConfigError("config: integrator.decimate must be >= 1");
  if (symbols.kmax_budget < 1)
    throw ConfigError("config: symbols.kmax_budget must be >= 1");
  if (symbols.max_steps < 0)
    throw ConfigError("config: symbols.max_steps must be >= 0");
  if (!(harness.horizon > 0.0))
    throw ConfigError("config: harness.horizon must be positive");
  if (harness.decimate < 1)
    throw ConfigError("config: harness.decimate must be >= 1");
  if (threads < 0) throw ConfigError("config: threads must be >= 0");
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["threads"] = threads;
  j["zone"] = {{"d", zone.d},
               {"delta", zone.delta},
               {"mu", zone.mu},
               {"c", zone.cs},
               {"dbnd", zone.ds},
               {"radius", zone.radius},
               {"plane_step_div", zone.plane_step_div},
               {"plane_radius_factor", zone.plane_radius_factor},
               {"plane_budget", zone.plane_budget},
               {"boundary_eps", zone.boundary_eps}};
  j["cutoffs"] = {{"delta", cutoffs.delta}, {"mu", cutoffs.mu}};
  j["integrator"] = {{"dt", integrator.dt},
                     {"tol_fp", integrator.tol_fp},
                     {"max_fp_iter", integrator.max_fp_iter},
                     {"max_halvings", integrator.max_halvings},
                     {"spike_threshold", integrator.spike_threshold},
                     {"decimate", integrator.decimate},
                     {"budget_steps", integrator.budget_steps},
                     {"audit_symplectic", integrator.audit_symplectic},
                     {"audit_count", integrator.audit_count},
                     {"audit_h", integrator.audit_h}};
  j["symbols"] = {{"kmax_budget", symbols.kmax_budget},
                  {"max_steps", symbols.max_steps},
                  {"beta", symbols.beta},
                  {"target_order", symbols.target_order}};
  j["harness"] = {{"horizon", harness.horizon},
                  {"decimate", harness.decimate},
                  {"forward_only", harness.forward_only}};
  return j;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t salt) {
  std::uint64_t z = root ^ (salt + 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace nek::cfg
