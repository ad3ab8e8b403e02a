// nek - numerical laboratory for long-time stability of particles on the
// torus: resonance-zone classification, cutoff normal forms, symplectic
// simulation and growth measurement.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "nek/cohomology.hpp"
#include "nek/config.hpp"
#include "nek/errors.hpp"
#include "nek/harness.hpp"
#include "nek/manifest.hpp"
#include "nek/symbol_io.hpp"
#include "nek/verify.hpp"

namespace {

using nlohmann::json;

std::vector<double> parse_csv_doubles(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    char* end = nullptr;
    double v = std::strtod(item.c_str(), &end);
    if (end != item.c_str() + item.size())
      throw nek::ConfigError("cannot parse number '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Common {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed_override = 0;
  bool seed_set = false;
  int threads_override = -1;

  nek::cfg::RunConfig load() const {
    nek::cfg::RunConfig cfg;
    if (!config_path.empty())
      cfg = nek::cfg::RunConfig::load(config_path);
    else
      cfg.validate();
    if (seed_set) cfg.seed = seed_override;
    if (threads_override >= 0) cfg.threads = threads_override;
    return cfg;
  }

  nek::cfg::Manifest manifest(const std::string& sub,
                              const nek::cfg::RunConfig& cfg) const {
    nek::cfg::Manifest m;
    m.subcommand = sub;
    m.config = cfg.to_json();
    if (!config_path.empty()) m.add_input_file(config_path);
    return m;
  }
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "TOML configuration file");
  app->add_option("--out-dir", c.out_dir, "output directory");
  auto* s = app->add_option("--seed", c.seed_override, "RNG seed override");
  s->each([&c](const std::string&) { c.seed_set = true; });
  app->add_option("--threads", c.threads_override,
                  "worker threads (0 = hardware)");
}

int resolved_threads(const nek::cfg::RunConfig& cfg) {
  if (cfg.threads > 0) return cfg.threads;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::string trajectory_csv(const nek::dyn::Trajectory& traj, int d) {
  std::ostringstream os;
  os << "t";
  for (int j = 1; j <= d; ++j) os << ",a" << j;
  for (int j = 1; j <= d; ++j) os << ",phi" << j;
  os << ",sup_norm_a,H\n";
  for (const auto& s : traj.samples) {
    os << fmt(s.t);
    for (double a : s.actions) os << "," << fmt(a);
    for (double p : s.angles) os << "," << fmt(p);
    os << "," << fmt(s.sup_norm) << "," << fmt(s.energy) << "\n";
  }
  return os.str();
}

int cmd_classify(const Common& common, const std::string& point_text) {
  auto cfg = common.load();
  auto pt = parse_csv_doubles(point_text);
  if (static_cast<int>(pt.size()) != cfg.zone.d)
    throw nek::ConfigError("point dimension does not match zone.d");
  nek::geo::ZoneGeometry geom(cfg.zone);
  auto res = geom.classify(pt);
  std::cout << nek::geo::classify_to_json(res).dump(2) << "\n";
  auto m = common.manifest("classify", cfg);
  m.extra = {{"point", pt}};
  m.write(common.out_dir);
  return 0;
}

int cmd_zonemap(const Common& common, const std::string& box_text,
                const std::string& res_text) {
  auto cfg = common.load();
  auto box = parse_csv_doubles(box_text);
  if (box.size() != 4)
    throw nek::ConfigError("--box needs x0,x1,y0,y1");
  auto res = parse_csv_doubles(res_text);
  if (res.empty() || res.size() > 2)
    throw nek::ConfigError("--res needs nx[,ny]");
  int nx = static_cast<int>(res[0]);
  int ny = res.size() == 2 ? static_cast<int>(res[1]) : nx;
  nek::geo::ZoneGeometry geom(cfg.zone);
  auto raster = nek::geo::zone_map_raster(geom, box[0], box[1], box[2], box[3],
                                          nx, ny, resolved_threads(cfg));
  // CSV: x, y, s, module basis
  std::ostringstream csv;
  csv << "x,y,s,module\n";
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      const auto& cell = raster.at(ix, iy);
      double x = box[0] + (ix + 0.5) * (box[1] - box[0]) / nx;
      double y = box[2] + (iy + 0.5) * (box[3] - box[2]) / ny;
      csv << fmt(x) << "," << fmt(y) << "," << cell.s << ","
          << (cell.boundary ? "boundary" : cell.module_key) << "\n";
    }
  // PGM, gray = 255 - 64 s for labelled cells, 32 boundary band, 0 failure
  std::ostringstream pgm;
  pgm << "P2\n" << nx << " " << ny << "\n255\n";
  for (int iy = ny - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const auto& cell = raster.at(ix, iy);
      int gray = cell.boundary ? 32 : (cell.s < 0 ? 0 : 255 - 64 * cell.s);
      pgm << gray << (ix + 1 == nx ? "" : " ");
    }
    pgm << "\n";
  }
  namespace fs = std::filesystem;
  fs::create_directories(common.out_dir);
  nek::cfg::write_file((fs::path(common.out_dir) / "zonemap.csv").string(),
                       csv.str());
  nek::cfg::write_file((fs::path(common.out_dir) / "zonemap.pgm").string(),
                       pgm.str());
  auto m = common.manifest("zonemap", cfg);
  m.outputs = {"zonemap.csv", "zonemap.pgm"};
  m.extra = {{"box", box}, {"nx", nx}, {"ny", ny}};
  m.write(common.out_dir);
  std::cerr << "wrote zonemap.csv and zonemap.pgm\n";
  return 0;
}

int cmd_normalform(const Common& common, const std::string& ham_path,
                   int steps_override, double target_override) {
  auto cfg = common.load();
  auto ham = json::parse(nek::cfg::read_file(ham_path));
  auto sys = nek::dyn::system_from_json(ham, cfg.symbols.kmax_budget);

  nek::coho::NormalFormOptions opts;
  opts.beta = cfg.symbols.beta;
  opts.kmax_budget = cfg.symbols.kmax_budget;
  opts.max_steps = steps_override > 0 ? steps_override : cfg.symbols.max_steps;
  opts.target_order =
      target_override < 1e8 ? target_override : cfg.symbols.target_order;
  for (int i = 0; i < 7; ++i)
    opts.fit_radii.push_back(std::pow(2.0, 40 + 2 * i));
  opts.fit.directions = 24;
  opts.fit.angle_samples = 12;
  opts.fit.seed = cfg.seed;

  auto nf = nek::coho::normal_form(sys.perturbation, cfg.cutoffs, opts);

  std::ostringstream table;
  table << "step  m_class   sigma    e1       e2       e3       e4       "
           "fit_in   fit_out  trunc\n";
  for (const auto& e : nf.ledger) {
    char line[200];
    std::snprintf(line, sizeof line,
                  "%-5d %-9.4f %-8.4f %-8.4f %-8.4f %-8.4f %-8.4f %-8.4f "
                  "%-8.4f %s\n",
                  e.step, e.m_class, e.sigma, e.e1, e.e2, e.e3, e.e4,
                  e.fitted_in, e.fitted_out, e.truncated ? "yes" : "no");
    table << line;
  }
  std::cout << table.str();

  namespace fs = std::filesystem;
  fs::create_directories(common.out_dir);
  nek::cfg::write_file(
      (fs::path(common.out_dir) / "normalform.json").string(),
      nek::coho::normal_form_to_json(nf).dump(2) + "\n");
  nek::cfg::write_file((fs::path(common.out_dir) / "ledger.txt").string(),
                       table.str());
  auto m = common.manifest("normalform", cfg);
  m.add_input_file(ham_path);
  m.outputs = {"normalform.json", "ledger.txt"};
  m.write(common.out_dir);
  return nf.budget_exhausted ? 2 : 0;
}

int cmd_simulate(const Common& common, const std::string& system_path,
                 bool em_example, const std::string& a_text,
                 const std::string& phi_text, double t0, double t_end,
                 double dt_override) {
  auto cfg = common.load();
  nek::dyn::HamiltonianSystem sys;
  if (em_example) {
    sys = nek::dyn::em_system(nek::dyn::em_plane_wave(2),
                              cfg.symbols.kmax_budget);
  } else if (!system_path.empty()) {
    sys = nek::dyn::system_from_json(json::parse(nek::cfg::read_file(system_path)),
                                     cfg.symbols.kmax_budget);
  } else {
    throw nek::ConfigError("simulate: need --system or --em-example");
  }
  auto a = parse_csv_doubles(a_text);
  if (static_cast<int>(a.size()) != sys.d)
    throw nek::ConfigError("simulate: initial actions dimension mismatch");
  std::vector<double> phi(sys.d, 0.0);
  if (!phi_text.empty()) {
    phi = parse_csv_doubles(phi_text);
    if (static_cast<int>(phi.size()) != sys.d)
      throw nek::ConfigError("simulate: initial angles dimension mismatch");
  }
  auto opts = cfg.integrator;
  if (dt_override > 0.0) opts.dt = dt_override;
  opts.decimate = cfg.harness.decimate;
  auto start = nek::sym::make_point(a, phi, t0);
  auto traj = nek::dyn::integrate(sys, start, t_end, opts);

  std::string csv = trajectory_csv(traj, sys.d);
  namespace fs = std::filesystem;
  fs::create_directories(common.out_dir);
  nek::cfg::write_file((fs::path(common.out_dir) / "trajectory.csv").string(),
                       csv);
  auto m = common.manifest("simulate", cfg);
  if (!system_path.empty()) m.add_input_file(system_path);
  m.outputs = {"trajectory.csv"};
  m.extra = {{"steps", traj.audit.steps},
             {"running_sup", traj.running_sup},
             {"halvings", traj.audit.halvings},
             {"max_fp_iters", traj.audit.max_fp_iters}};
  m.write(common.out_dir);
  std::cerr << "steps=" << traj.audit.steps
            << " sup=" << fmt(traj.running_sup) << "\n";
  return 0;
}

int cmd_growth(const Common& common, const std::string& traj_path) {
  auto cfg = common.load();
  std::string text = nek::cfg::read_file(traj_path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw nek::ConfigError("growth: empty trajectory file");
  // header: t,a1..ad,phi1..phid,sup_norm_a,H
  int cols = 1;
  for (char c : line) cols += c == ',';
  int d = (cols - 3) / 2;
  if (cols != 3 + 2 * d) throw nek::ConfigError("growth: malformed header");
  std::vector<double> times, sups;
  double r0 = -1.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto vals = parse_csv_doubles(line);
    if (static_cast<int>(vals.size()) != cols)
      throw nek::ConfigError("growth: malformed row");
    times.push_back(vals[0]);
    sups.push_back(vals[cols - 2]);
    if (r0 < 0.0) {
      double s = 0.0;
      for (int j = 1; j <= d; ++j) s += vals[j] * vals[j];
      r0 = std::sqrt(s);
    }
  }
  auto rep = nek::run::growth_fit(times, sups, r0);
  json j = {{"r0", rep.r0},
            {"eps_hat", rep.eps_hat},
            {"envelope16_ok", rep.envelope16_ok},
            {"envelope4_ok", rep.envelope4_ok},
            {"max_ratio16", rep.max_ratio16},
            {"fit_t_min", rep.fit_t_min},
            {"fit_t_max", rep.fit_t_max},
            {"n_samples", rep.n_samples}};
  std::cout << j.dump(2) << "\n";
  // plot data: t, sup, envelope
  std::ostringstream plot;
  plot << "t,sup,envelope\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    double bracket =
        std::sqrt(1.0 + (times[i] / rep.r0) * (times[i] / rep.r0));
    double env =
        16.0 * rep.r0 * std::pow(bracket, std::max(rep.eps_hat, 0.0));
    plot << fmt(times[i]) << "," << fmt(sups[i]) << "," << fmt(env) << "\n";
  }
  namespace fs = std::filesystem;
  fs::create_directories(common.out_dir);
  nek::cfg::write_file((fs::path(common.out_dir) / "growth.csv").string(),
                       plot.str());
  auto m = common.manifest("growth", cfg);
  m.add_input_file(traj_path);
  m.outputs = {"growth.csv"};
  m.extra = j;
  m.write(common.out_dir);
  return 0;
}

int cmd_verify(const Common& common) {
  auto cfg = common.load();
  auto checks = nek::run::verify_suite(cfg);
  bool all = true;
  json arr = json::array();
  for (const auto& c : checks) {
    all = all && c.pass;
    arr.push_back({{"name", c.name},
                   {"pass", c.pass},
                   {"value", c.value},
                   {"threshold", c.threshold},
                   {"details", c.details}});
  }
  json out = {{"all_pass", all}, {"checks", arr}};
  std::cout << out.dump(2) << "\n";
  auto m = common.manifest("verify", cfg);
  m.extra = out;
  m.write(common.out_dir);
  return all ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for long-time stability on the torus"};
  app.require_subcommand(1);

  Common common;

  auto* classify = app.add_subcommand("classify", "label one action point");
  add_common(classify, common);
  std::string point_text;
  classify->add_option("--point", point_text, "action point, e.g. 50,0")
      ->required();

  auto* zonemap = app.add_subcommand("zonemap", "raster the zone partition");
  add_common(zonemap, common);
  std::string box_text, res_text = "64";
  zonemap->add_option("--box", box_text, "x0,x1,y0,y1")->required();
  zonemap->add_option("--res", res_text, "nx[,ny]");

  auto* normalform =
      app.add_subcommand("normalform", "iterate the cutoff normal form");
  add_common(normalform, common);
  std::string ham_path;
  int nf_steps = 0;
  double nf_target = 1e9;
  normalform->add_option("--hamiltonian", ham_path, "system JSON")->required();
  normalform->add_option("--steps", nf_steps, "step count override");
  normalform->add_option("--target", nf_target, "target remainder order");

  auto* simulate = app.add_subcommand("simulate", "integrate a trajectory");
  add_common(simulate, common);
  std::string system_path, a_text, phi_text;
  bool em_example = false;
  double t0 = 0.0, t_end = 0.0, dt_override = 0.0;
  simulate->add_option("--system", system_path, "system JSON");
  simulate->add_flag("--em-example", em_example,
                     "use the built-in plane-wave example (d = 2)");
  simulate->add_option("--a", a_text, "initial actions")->required();
  simulate->add_option("--phi", phi_text, "initial angles (default 0)");
  simulate->add_option("--t0", t0, "start time");
  simulate->add_option("--t-end", t_end, "end time")->required();
  simulate->add_option("--dt", dt_override, "time step override");

  auto* growth = app.add_subcommand("growth", "fit the action-growth report");
  add_common(growth, common);
  std::string traj_path;
  growth->add_option("--trajectory", traj_path, "trajectory CSV")->required();

  auto* verify = app.add_subcommand("verify", "run the property suite");
  add_common(verify, common);

  try {
    app.parse(argc, argv);
    if (classify->parsed()) return cmd_classify(common, point_text);
    if (zonemap->parsed()) return cmd_zonemap(common, box_text, res_text);
    if (normalform->parsed())
      return cmd_normalform(common, ham_path, nf_steps, nf_target);
    if (simulate->parsed())
      return cmd_simulate(common, system_path, em_example, a_text, phi_text,
                          t0, t_end, dt_override);
    if (growth->parsed()) return cmd_growth(common, traj_path);
    if (verify->parsed()) return cmd_verify(common);
    return 1;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const nek::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const nek::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const nek::BudgetError& e) {
    std::cerr << "budget error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
