#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "nek/manifest.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  fs::path dir = fs::temp_directory_path() / "nek_cli_test";
  fs::create_directories(dir);
  fs::path out = dir / "stdout.txt";
  std::string cmd = std::string(NEK_CLI_PATH) + " " + args + " > " +
                    out.string() + " 2> " + (dir / "stderr.txt").string();
  int rc = std::system(cmd.c_str());
  RunResult res;
  res.exit_code = WEXITSTATUS(rc);
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  res.out = ss.str();
  return res;
}

fs::path sandbox(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "nek_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("classify: json output and exit code") {
  auto dir = sandbox("classify");
  auto res = run_cli("classify --point 50,0 --out-dir " + dir.string());
  CHECK(res.exit_code == 0);
  auto j = nlohmann::json::parse(res.out);
  CHECK(j.at("status") == "ok");
  CHECK(j.at("label").at("s") == 0);
  CHECK(fs::exists(dir / "manifest.json"));
}

TEST_CASE("validation failure exits with code 1 and a clear message") {
  auto dir = sandbox("badcfg");
  std::ofstream(dir / "bad.toml") << "[zone]\ndelta = 0.5\n";
  auto res = run_cli("classify --point 1,1 --config " +
                     (dir / "bad.toml").string() + " --out-dir " +
                     dir.string());
  CHECK(res.exit_code == 1);
  std::ifstream err(fs::temp_directory_path() / "nek_cli_test" / "stderr.txt");
  std::stringstream ss;
  ss << err.rdbuf();
  CHECK(ss.str().find("must exceed 2/3") != std::string::npos);
}

TEST_CASE("simulate: deterministic trajectory output") {
  auto dir1 = sandbox("sim1");
  auto res1 = run_cli(
      "simulate --em-example --a 3,2 --phi 0.4,1.9 --t-end 5 --dt 0.01 "
      "--out-dir " + dir1.string());
  CHECK(res1.exit_code == 0);
  auto dir2 = sandbox("sim2");
  auto res2 = run_cli(
      "simulate --em-example --a 3,2 --phi 0.4,1.9 --t-end 5 --dt 0.01 "
      "--out-dir " + dir2.string());
  CHECK(res2.exit_code == 0);
  auto bytes1 = nek::cfg::read_file((dir1 / "trajectory.csv").string());
  auto bytes2 = nek::cfg::read_file((dir2 / "trajectory.csv").string());
  CHECK(bytes1 == bytes2);
  CHECK(bytes1.find("t,a1,a2,phi1,phi2,sup_norm_a,H") == 0);
}

TEST_CASE("manifest records config changes") {
  auto dir1 = sandbox("man1");
  std::ofstream(dir1 / "cfg.toml") << "[zone]\ndelta = 0.75\n";
  run_cli("classify --point 7,3 --config " + (dir1 / "cfg.toml").string() +
          " --out-dir " + dir1.string());
  auto m1 = nlohmann::json::parse(
      nek::cfg::read_file((dir1 / "manifest.json").string()));

  auto dir2 = sandbox("man2");
  std::ofstream(dir2 / "cfg.toml") << "[zone]\ndelta = 0.8\n";
  run_cli("classify --point 7,3 --config " + (dir2 / "cfg.toml").string() +
          " --out-dir " + dir2.string());
  auto m2 = nlohmann::json::parse(
      nek::cfg::read_file((dir2 / "manifest.json").string()));
  CHECK(m1.at("config").at("zone").at("delta") !=
        m2.at("config").at("zone").at("delta"));
  CHECK(m1.at("inputs") != m2.at("inputs"));
}

TEST_CASE("growth consumes simulate output") {
  auto dir = sandbox("growth");
  std::ofstream(dir / "cfg.toml") << "[harness]\ndecimate = 50\n";
  auto res = run_cli(
      "simulate --em-example --a 16,12 --t-end 2000 --dt 0.02 --config " +
      (dir / "cfg.toml").string() + " --out-dir " + dir.string());
  REQUIRE(res.exit_code == 0);
  auto rep = run_cli("growth --trajectory " +
                     (dir / "trajectory.csv").string() + " --out-dir " +
                     dir.string());
  CHECK(rep.exit_code == 0);
  auto j = nlohmann::json::parse(rep.out);
  CHECK(j.at("r0").get<double>() == doctest::Approx(20.0));
  CHECK(j.at("eps_hat").get<double>() <= 0.05);
  CHECK(j.at("envelope16_ok") == true);
  CHECK(fs::exists(dir / "growth.csv"));
}

TEST_CASE("zonemap produces csv and pgm") {
  auto dir = sandbox("zonemap");
  std::ofstream(dir / "cfg.toml") << "seed = 7\n";
  auto res = run_cli("zonemap --box 10,20,10,20 --res 6 --config " +
                     (dir / "cfg.toml").string() + " --out-dir " +
                     dir.string());
  CHECK(res.exit_code == 0);
  auto csv = nek::cfg::read_file((dir / "zonemap.csv").string());
  CHECK(csv.find("x,y,s,module") == 0);
  auto pgm = nek::cfg::read_file((dir / "zonemap.pgm").string());
  CHECK(pgm.substr(0, 2) == "P2");
  // all cells inside the calibrated ball are s = 0 (gray 255)
  CHECK(pgm.find("255") != std::string::npos);
}

TEST_CASE("missing required option exits nonzero") {
  auto dir = sandbox("missing");
  auto res = run_cli("simulate --em-example --t-end 5 --out-dir " +
                     dir.string());
  CHECK(res.exit_code == 1);
}

TEST_CASE("normalform subcommand emits ledger and result json") {
  auto dir = sandbox("nf");
  // write the EM example as a system json input
  nlohmann::json sysj;
  sysj["kind"] = "em";
  sysj["A"] = nlohmann::json::array();
  {
    nlohmann::json a1 = {{"d", 2},
                         {"k_max", 1},
                         {"real", true},
                         {"modes",
                          {{{"k", {1, 0}},
                            {"expr", "(* 0.5 (exp (* (const 0 -1) t)))"}},
                           {{"k", {-1, 0}},
                            {"expr", "(* 0.5 (exp (* (const 0 1) t)))"}}}}};
    sysj["A"].push_back(a1);
    nlohmann::json zero = {{"d", 2},
                           {"k_max", 0},
                           {"real", true},
                           {"modes", nlohmann::json::array()}};
    sysj["A"].push_back(zero);
  }
  std::ofstream(dir / "em.json") << sysj.dump(2);
  auto res = run_cli("normalform --hamiltonian " + (dir / "em.json").string() +
                     " --steps 1 --out-dir " + dir.string());
  CHECK(res.exit_code == 0);
  CHECK(res.out.find("step") != std::string::npos);
  auto nf = nlohmann::json::parse(
      nek::cfg::read_file((dir / "normalform.json").string()));
  CHECK(nf.at("steps") == 1);
  CHECK(nf.at("generators").size() == 1);
  CHECK(nf.at("ledger").at(0).at("sigma").get<double>() ==
        doctest::Approx(0.5));
  CHECK(fs::exists(dir / "ledger.txt"));
}

TEST_CASE("verify subcommand returns a machine-readable summary") {
  auto dir = sandbox("verify");
  auto res = run_cli("verify --out-dir " + dir.string());
  CHECK(res.exit_code == 0);
  auto j = nlohmann::json::parse(res.out);
  CHECK(j.at("all_pass") == true);
  CHECK(j.at("checks").size() >= 7);
  for (const auto& c : j.at("checks")) CHECK(c.at("pass") == true);
}

TEST_CASE("diverging fixed-point iteration exits with code 2") {
  auto dir = sandbox("diverge");
  std::ofstream(dir / "cfg.toml")
      << "[integrator]\ndt = 10.0\nmax_halvings = 0\n";
  // steep action-coupled system at a large radius cannot contract at dt = 10
  nlohmann::json sysj = {{"kind", "symbol"},
                         {"include_h0", true},
                         {"P",
                          {{"d", 2},
                           {"k_max", 1},
                           {"real", true},
                           {"modes",
                            {{{"k", {1, 0}}, {"expr", "(* 2.5 a1)"}},
                             {{"k", {-1, 0}}, {"expr", "(* 2.5 a1)"}}}}}}};
  std::ofstream(dir / "sys.json") << sysj.dump();
  auto res = run_cli("simulate --system " + (dir / "sys.json").string() +
                     " --a 50,0 --t-end 100 --config " +
                     (dir / "cfg.toml").string() + " --out-dir " +
                     dir.string());
  CHECK(res.exit_code == 2);
}
