#pragma once

#include <span>
#include <string>
#include <vector>

#include "nek/dynamics.hpp"
#include "nek/geometry.hpp"

namespace nek::run {

struct GrowthReport {
  double r0 = 0.0;
  double eps_hat = 0.0;          // fitted slope of log sup vs log <t/r0>
  bool envelope16_ok = false;    // sup(t) <= 16 r0 <t/r0>^eps_hat pointwise
  bool envelope4_ok = false;     // the 4 r0 variant
  double max_ratio16 = 0.0;      // max sup / (16 r0 <t/r0>^eps_hat)
  double fit_t_min = 0.0, fit_t_max = 0.0;
  std::size_t n_samples = 0;
};

// Least-squares growth exponent over the final two decades of the running
// sup; needs >= 1000 samples spanning >= 3 decades of positive time.
GrowthReport growth_fit(std::span<const double> times,
                        std::span<const double> sups, double r0);
GrowthReport growth_fit(const dyn::Trajectory& traj);

// Symmetric-time series sup_{|tau| <= t} ||a|| from a forward and a backward
// trajectory of the same initial datum; forward-only callers just pass one
// trajectory to growth_fit directly.
void merge_symmetric(const dyn::Trajectory& forward,
                     const dyn::Trajectory& backward,
                     std::vector<double>& times, std::vector<double>& sups);

// Doubling envelope: R_k = r0 2^k, tau_{k+1} = (r0 2^k)^n / (2 kd), and the
// interpolant sup bound 4 r0 max{1, (t / tau_1)^{1/n}}.
struct Envelope {
  double kd = 1.0;
  double n = 1.0;
  double r0 = 1.0;

  double tau(int k) const;           // tau_0 = 0
  double eval(double t) const;       // max{4 r0, 4 (2 kd)^{1/n} t^{1/n}}
  double eval_scaled(double t) const;  // 4 r0 max{1, (t/tau_1)^{1/n}}
};

// Fit (kd, n) from observed doubling times tau_1..tau_K (k >= 1) by linear
// regression of log tau_{k+1} = n log R_k - log(2 kd).
Envelope envelope_from_doubles(double r0, std::span<const double> taus);

struct ConfinementReport {
  geo::ZoneLabel label;
  bool exited = false;
  double t_exit = 0.0;
  double sup_ratio = 0.0;       // max ||a(t)|| / ||a_0||
  double max_transverse = 0.0;  // max distance to the extended plane
  double transverse_allowance = 0.0;
  double ks_empirical = 0.0;    // ||a_0||^{n+delta} / t_exit (0 if no exit)
  long checks = 0;
};

// Integrates the (normal-form) system and checks the fast-drift confinement:
// sup ||a|| <= 2 ||a_0|| and membership of a(t) in the extended plane of the
// initial label.  n_exponent is the remainder-order probe N.
ConfinementReport nekhoroshev_confinement(const dyn::HamiltonianSystem& system,
                                          const sym::PhasePoint& start,
                                          const geo::ZoneGeometry& geom,
                                          double horizon,
                                          const dyn::IntegratorOptions& opts,
                                          double n_exponent);

}  // namespace nek::run
