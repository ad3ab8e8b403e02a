#include "nek/harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "nek/errors.hpp"

namespace nek::run {

GrowthReport growth_fit(std::span<const double> times,
                        std::span<const double> sups, double r0) {
  if (times.size() != sups.size())
    throw ConfigError("growth_fit: times/sups length mismatch");
  if (!(r0 > 0.0)) throw ConfigError("growth_fit: r0 must be positive");
  double t_min_pos = 0.0, t_max = 0.0;
  std::size_t usable = 0;
  double prev_sup = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (sups[i] + 1e-12 * r0 < prev_sup)
      throw ConfigError("growth_fit: running sup must be nondecreasing");
    prev_sup = std::max(prev_sup, sups[i]);
    if (times[i] > 0.0) {
      if (t_min_pos == 0.0) t_min_pos = times[i];
      t_max = std::max(t_max, times[i]);
      ++usable;
    }
  }
  if (usable < 1000)
    throw ConfigError("growth_fit: need at least 1000 positive-time samples");
  if (!(t_max / t_min_pos >= 1e3))
    throw ConfigError("growth_fit: samples must span at least 3 decades");

  GrowthReport rep;
  rep.r0 = r0;
  rep.n_samples = times.size();
  rep.fit_t_min = t_max / 100.0;  // final two decades
  rep.fit_t_max = t_max;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < rep.fit_t_min || times[i] <= 0.0) continue;
    double bracket = std::sqrt(1.0 + (times[i] / r0) * (times[i] / r0));
    lx.push_back(std::log(bracket));
    ly.push_back(std::log(std::max(sups[i] / r0, 1e-300)));
  }
  if (lx.size() < 2) throw ConfigError("growth_fit: too few samples in window");
  // guard the degenerate exactly-flat case (log <t> varies, sup constant)
  rep.eps_hat = sym::ls_slope(lx, ly);
  if (!std::isfinite(rep.eps_hat)) rep.eps_hat = 0.0;

  rep.envelope16_ok = true;
  rep.envelope4_ok = true;
  for (std::size_t i = 0; i < times.size(); ++i) {
    double bracket = std::sqrt(1.0 + (times[i] / r0) * (times[i] / r0));
    double env = std::pow(bracket, std::max(rep.eps_hat, 0.0));
    double v16 = sups[i] / (16.0 * r0 * env);
    rep.max_ratio16 = std::max(rep.max_ratio16, v16);
    if (v16 > 1.0) rep.envelope16_ok = false;
    if (sups[i] > 4.0 * r0 * env) rep.envelope4_ok = false;
  }
  return rep;
}

GrowthReport growth_fit(const dyn::Trajectory& traj) {
  std::vector<double> t, s;
  t.reserve(traj.samples.size());
  s.reserve(traj.samples.size());
  for (const auto& smp : traj.samples) {
    t.push_back(smp.t);
    s.push_back(smp.sup_norm);
  }
  double r0 = traj.samples.empty()
                  ? 0.0
                  : std::sqrt([&] {
                      double acc = 0.0;
                      for (double a : traj.samples.front().actions)
                        acc += a * a;
                      return acc;
                    }());
  return growth_fit(t, s, r0);
}

void merge_symmetric(const dyn::Trajectory& forward,
                     const dyn::Trajectory& backward,
                     std::vector<double>& times, std::vector<double>& sups) {
  times.clear();
  sups.clear();
  const double t0 = forward.samples.empty() ? 0.0 : forward.samples.front().t;
  std::map<double, double> by_abs_t;  // |t - t0| -> sup over that horizon
  for (const auto& s : forward.samples) {
    double at = std::fabs(s.t - t0);
    auto it = by_abs_t.find(at);
    by_abs_t[at] = it == by_abs_t.end() ? s.sup_norm
                                        : std::max(it->second, s.sup_norm);
  }
  for (const auto& s : backward.samples) {
    double at = std::fabs(s.t - t0);
    auto it = by_abs_t.find(at);
    by_abs_t[at] = it == by_abs_t.end() ? s.sup_norm
                                        : std::max(it->second, s.sup_norm);
  }
  double running = 0.0;
  for (const auto& [at, sup] : by_abs_t) {
    running = std::max(running, sup);
    times.push_back(at);
    sups.push_back(running);
  }
}

double Envelope::tau(int k) const {
  if (k <= 0) return 0.0;
  return std::pow(r0 * std::pow(2.0, k - 1), n) / (2.0 * kd);
}

double Envelope::eval(double t) const {
  double grow = 4.0 * std::pow(2.0 * kd, 1.0 / n) * std::pow(std::max(t, 0.0),
                                                             1.0 / n);
  return std::max(4.0 * r0, grow);
}

double Envelope::eval_scaled(double t) const {
  double t1 = tau(1);
  return 4.0 * r0 * std::max(1.0, std::pow(std::max(t, 0.0) / t1, 1.0 / n));
}

Envelope envelope_from_doubles(double r0, std::span<const double> taus) {
  if (taus.size() < 2)
    throw ConfigError("envelope fit: need at least 2 observed doublings");
  if (!(r0 > 0.0)) throw ConfigError("envelope fit: r0 must be positive");
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < taus.size(); ++k) {
    if (!(taus[k] > 0.0))
      throw ConfigError("envelope fit: doubling times must be positive");
    lx.push_back(std::log(r0 * std::pow(2.0, static_cast<double>(k))));
    ly.push_back(std::log(taus[k]));
  }
  double n = sym::ls_slope(lx, ly);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= lx.size();
  my /= ly.size();
  double intercept = my - n * mx;  // = -log(2 kd)
  Envelope env;
  env.r0 = r0;
  env.n = n;
  env.kd = 0.5 * std::exp(-intercept);
  return env;
}

ConfinementReport nekhoroshev_confinement(const dyn::HamiltonianSystem& system,
                                          const sym::PhasePoint& start,
                                          const geo::ZoneGeometry& geom,
                                          double horizon,
                                          const dyn::IntegratorOptions& opts,
                                          double n_exponent) {
  auto cls = geom.classify(start.actions);
  if (cls.status != geo::ClassifyStatus::Ok)
    throw ConfigError("confinement: initial datum failed to classify: " +
                      cls.diagnostic);
  ConfinementReport rep;
  rep.label = cls.label;

  double r0 = 0.0;
  for (double a : start.actions) r0 += a * a;
  r0 = std::sqrt(r0);
  const auto& params = geom.params();
  const int s = rep.label.s;
  rep.transverse_allowance = std::pow(r0, params.delta_s(std::min(s + 1, params.d)));

  auto traj = dyn::integrate(system, start, start.time + horizon, opts);
  const int d = system.d;
  for (const auto& smp : traj.samples) {
    ++rep.checks;
    double na = 0.0;
    for (double a : smp.actions) na += a * a;
    na = std::sqrt(na);
    rep.sup_ratio = std::max(rep.sup_ratio, na / r0);
    // transverse displacement from the fast-drift plane a_0 + M_R
    std::vector<double> diff(d);
    for (int j = 0; j < d; ++j) diff[j] = smp.actions[j] - start.actions[j];
    std::vector<double> along = rep.label.module.rank() > 0
                                    ? rep.label.module.project(diff)
                                    : std::vector<double>(d, 0.0);
    double trans = 0.0;
    for (int j = 0; j < d; ++j)
      trans += (diff[j] - along[j]) * (diff[j] - along[j]);
    trans = std::sqrt(trans);
    rep.max_transverse = std::max(rep.max_transverse, trans);
    bool inside = na <= 2.0 * r0 && trans <= rep.transverse_allowance;
    if (!inside && !rep.exited) {
      rep.exited = true;
      rep.t_exit = smp.t - start.time;
    }
  }
  if (rep.exited && rep.t_exit > 0.0)
    rep.ks_empirical =
        std::pow(r0, n_exponent + params.delta) / rep.t_exit;
  return rep;
}

}  // namespace nek::run
