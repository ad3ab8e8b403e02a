#include "nek/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nek/errors.hpp"

namespace nek::dyn {

using sym::Cx;
using sym::Mode;
using sym::PhasePoint;
using sym::SymbolFunction;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

HamiltonianSystem em_system(const EMField& field, int kmax_budget) {
  if (field.vector_potential.empty())
    throw ConfigError("em_system: empty vector potential");
  const int d = field.vector_potential.front().dim();
  for (const auto& aj : field.vector_potential) {
    if (aj.dim() != d) throw ConfigError("em_system: mixed dimensions");
    for (const auto& [k, c] : aj.coeffs())
      if (sym::depends_on_actions(c))
        throw ConfigError("em_system: vector potential must not depend on a");
  }
  for (const auto& [k, c] : field.scalar_potential.coeffs())
    if (sym::depends_on_actions(c))
      throw ConfigError("em_system: scalar potential must not depend on a");

  SymbolFunction p = SymbolFunction::zero(d);
  for (int j = 0; j < d; ++j) {
    const auto& aj = field.vector_potential[j];
    if (aj.empty()) continue;
    SymbolFunction action_j(d, 0, true);
    action_j.set_coeff(Mode(d, 0), sym::ex_action(j));
    // -a_j A_j
    auto cross = sym::multiply(action_j, aj, kmax_budget);
    if (cross.truncated) throw BudgetError("em_system: k_max budget exceeded");
    p = sym::sub(p, cross.value);
    // + A_j^2 / 2
    auto square = sym::multiply(aj, aj, kmax_budget);
    if (square.truncated) throw BudgetError("em_system: k_max budget exceeded");
    p = sym::add(p, square.value.scaled(Cx{0.5, 0.0}));
  }
  if (!field.scalar_potential.empty())
    p = sym::add(p, field.scalar_potential);
  HamiltonianSystem sys;
  sys.d = d;
  sys.perturbation = std::move(p);
  sys.include_h0 = true;
  return sys;
}

EMField em_plane_wave(int d) {
  // A_1 = cos(phi_1 - t) = (e^{i phi_1} e^{-i t} + e^{-i phi_1} e^{i t}) / 2
  EMField f;
  SymbolFunction a1(d, 1, true);
  Mode k(d, 0);
  k[0] = 1;
  auto half_phase = sym::ex_mul(
      sym::ex_const(Cx{0.5, 0.0}),
      sym::ex_exp(sym::ex_mul(sym::ex_const(Cx{0.0, -1.0}), sym::ex_time())));
  a1.set_real_pair(k, half_phase);
  f.vector_potential.push_back(std::move(a1));
  for (int j = 1; j < d; ++j)
    f.vector_potential.push_back(SymbolFunction::zero(d));
  f.scalar_potential = SymbolFunction::zero(d);
  return f;
}

SystemEvaluator::SystemEvaluator(const HamiltonianSystem& system)
    : d_(system.d), include_h0_(system.include_h0) {
  const auto& p = system.perturbation;
  if (p.dim() != d_) throw ConfigError("system evaluator: dimension mismatch");
  std::map<Mode, int> mode_index;
  auto intern_mode = [&](const Mode& k) {
    auto it = mode_index.find(k);
    if (it != mode_index.end()) return it->second;
    int idx = static_cast<int>(modes_.size());
    modes_.push_back(std::vector<int>(k.begin(), k.end()));
    mode_index.emplace(k, idx);
    return idx;
  };
  auto add_symbol = [&](const SymbolFunction& s) {
    std::vector<TermRef> refs;
    for (const auto& [k, c] : s.coeffs())
      refs.push_back(TermRef{intern_mode(k), tape_.add_root(c)});
    return refs;
  };
  for (int j = 0; j < d_; ++j) grads_.push_back(add_symbol(p.derive_action(j)));
  for (int j = 0; j < d_; ++j) grads_.push_back(add_symbol(p.derive_angle(j)));
  energy_terms_ = add_symbol(p);
  axis_kmax_.assign(d_, 0);
  for (const auto& k : modes_)
    for (int j = 0; j < d_; ++j)
      axis_kmax_[j] = std::max(axis_kmax_[j], std::abs(k[j]));
  scratch_.powers.resize(d_);
  for (int j = 0; j < d_; ++j)
    scratch_.powers[j].resize(2 * axis_kmax_[j] + 1);
}

void SystemEvaluator::compute_powers(std::span<const double> angles) const {
  for (int j = 0; j < d_; ++j) {
    auto& pw = scratch_.powers[j];
    const int K = axis_kmax_[j];
    pw[K] = Cx{1.0, 0.0};  // exponent 0 at the centre
    if (K == 0) continue;
    Cx e{std::cos(angles[j]), std::sin(angles[j])};
    for (int m = 1; m <= K; ++m) {
      pw[K + m] = pw[K + m - 1] * e;
      pw[K - m] = std::conj(pw[K + m]);
    }
  }
}

sym::Cx SystemEvaluator::mode_phase(int mode_index) const {
  const auto& k = modes_[mode_index];
  Cx acc{1.0, 0.0};
  for (int j = 0; j < d_; ++j) {
    if (k[j] == 0) continue;
    acc *= scratch_.powers[j][axis_kmax_[j] + k[j]];
  }
  return acc;
}

void SystemEvaluator::field(std::span<const double> actions,
                            std::span<const double> angles, double t,
                            std::span<double> adot,
                            std::span<double> phidot) const {
  tape_.run(actions, t, scratch_.regs);
  compute_powers(angles);
  for (int j = 0; j < d_; ++j) {
    double dp_da = 0.0;
    for (const auto& ref : grads_[j])
      dp_da += (scratch_.regs[ref.slot] * mode_phase(ref.mode_index)).real();
    double dp_dphi = 0.0;
    for (const auto& ref : grads_[d_ + j])
      dp_dphi += (scratch_.regs[ref.slot] * mode_phase(ref.mode_index)).real();
    phidot[j] = (include_h0_ ? actions[j] : 0.0) + dp_da;
    adot[j] = -dp_dphi;
  }
}

double SystemEvaluator::energy(std::span<const double> actions,
                               std::span<const double> angles,
                               double t) const {
  tape_.run(actions, t, scratch_.regs);
  compute_powers(angles);
  double h = 0.0;
  if (include_h0_)
    for (double a : actions) h += 0.5 * a * a;
  for (const auto& ref : energy_terms_)
    h += (scratch_.regs[ref.slot] * mode_phase(ref.mode_index)).real();
  return h;
}

namespace {

struct Stepper {
  const SystemEvaluator& eval;
  int d;
  double tol_fp;
  int max_iter;
  mutable std::vector<double> mid_a, mid_phi, adot, phidot, z, znew;

  explicit Stepper(const SystemEvaluator& e, double tol, int iters)
      : eval(e), d(e.dim()), tol_fp(tol), max_iter(iters) {
    mid_a.resize(d);
    mid_phi.resize(d);
    adot.resize(d);
    phidot.resize(d);
    z.resize(2 * d);
    znew.resize(2 * d);
  }

  // One implicit-midpoint step from y at time t; returns the iteration count
  // and final residual, or -1 iterations on divergence.
  struct Outcome {
    int iters = 0;
    double residual = 0.0;
    bool converged = false;
  };

  Outcome step(std::vector<double>& y, double t, double dt) const {
    const double tmid = t + 0.5 * dt;
    // explicit predictor
    eval.field(std::span<const double>(y.data(), d),
               std::span<const double>(y.data() + d, d), tmid, adot, phidot);
    for (int j = 0; j < d; ++j) {
      z[j] = y[j] + dt * adot[j];
      z[d + j] = y[d + j] + dt * phidot[j];
    }
    Outcome out;
    double prev_res = 1e300;
    int grew = 0;
    for (int it = 0; it < max_iter; ++it) {
      for (int j = 0; j < d; ++j) {
        mid_a[j] = 0.5 * (y[j] + z[j]);
        mid_phi[j] = 0.5 * (y[d + j] + z[d + j]);
      }
      eval.field(mid_a, mid_phi, tmid, adot, phidot);
      double res = 0.0;
      for (int j = 0; j < d; ++j) {
        znew[j] = y[j] + dt * adot[j];
        znew[d + j] = y[d + j] + dt * phidot[j];
        res = std::max(res, std::fabs(znew[j] - z[j]) /
                                (1.0 + std::fabs(y[j])));
        res = std::max(res, std::fabs(znew[d + j] - z[d + j]) /
                                (1.0 + std::fabs(y[d + j])));
      }
      std::swap(z, znew);
      out.iters = it + 1;
      out.residual = res;
      if (res <= tol_fp) {
        out.converged = true;
        break;
      }
      grew = res > prev_res ? grew + 1 : 0;
      if (grew >= 3) break;  // diverging
      prev_res = res;
    }
    if (out.converged) y = z;
    return out;
  }
};

}  // namespace

Trajectory integrate(const HamiltonianSystem& system,
                     const sym::PhasePoint& start, double t_end,
                     const IntegratorOptions& opts) {
  if (!(opts.dt > 0.0)) throw ConfigError("integrate: dt must be positive");
  if (start.dim() != system.d)
    throw ConfigError("integrate: start point dimension mismatch");
  const int d = system.d;
  const double dir = t_end >= start.time ? 1.0 : -1.0;
  SystemEvaluator eval(system);
  Stepper stepper(eval, opts.tol_fp, opts.max_fp_iter);

  Trajectory traj;
  std::vector<double> y(2 * d);
  for (int j = 0; j < d; ++j) {
    y[j] = start.actions[j];
    y[d + j] = start.angles[j];
  }
  double dt = opts.dt * dir;
  double t = start.time;
  const double span = std::fabs(t_end - start.time);
  double covered = 0.0;

  auto norm_a = [&](const std::vector<double>& state) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) s += state[j] * state[j];
    return std::sqrt(s);
  };
  traj.running_sup = norm_a(y);

  std::vector<double> adot(d), phidot(d);
  auto record = [&](double at_t) {
    TrajectorySample smp;
    smp.t = at_t;
    smp.actions.assign(y.begin(), y.begin() + d);
    smp.angles.assign(y.begin() + d, y.end());
    smp.sup_norm = traj.running_sup;
    eval.field(std::span<const double>(y.data(), d),
               std::span<const double>(y.data() + d, d), at_t, adot, phidot);
    double dr = 0.0;
    for (int j = 0; j < d; ++j) dr += adot[j] * adot[j];
    smp.drift_rate = std::sqrt(dr);
    traj.max_drift_rate = std::max(traj.max_drift_rate, smp.drift_rate);
    smp.energy = eval.energy(std::span<const double>(y.data(), d),
                             std::span<const double>(y.data() + d, d), at_t);
    traj.samples.push_back(std::move(smp));
  };
  record(t);

  long audit_stride = 0;
  long next_audit = -1;
  if (opts.audit_symplectic) {
    long approx_steps = static_cast<long>(span / opts.dt) + 1;
    audit_stride = std::max<long>(1, approx_steps / std::max(1, opts.audit_count));
    next_audit = audit_stride;
  }

  int spike_run = 0;
  long step_count = 0;
  while (span - covered > 1e-12 * std::max(1.0, span)) {
    if (step_count >= opts.budget_steps)
      throw BudgetError("integrate: step budget exceeded");
    double h = std::min(std::fabs(dt), span - covered);
    double hs = dir * h;
    auto outcome = stepper.step(y, t, hs);
    traj.audit.total_fp_iters += outcome.iters;
    traj.audit.max_fp_iters = std::max(traj.audit.max_fp_iters, outcome.iters);
    traj.audit.max_residual = std::max(traj.audit.max_residual,
                                       outcome.converged ? outcome.residual : 0.0);
    if (!outcome.converged) {
      if (traj.audit.halvings >= opts.max_halvings)
        throw NumericalError(
            "integrate: fixed-point iteration diverged (dt too large)");
      dt *= 0.5;
      ++traj.audit.halvings;
      continue;
    }
    if (outcome.iters >= opts.spike_threshold) {
      if (++spike_run >= 20 && traj.audit.halvings < opts.max_halvings) {
        dt *= 0.5;
        ++traj.audit.halvings;
        spike_run = 0;
      }
    } else {
      spike_run = 0;
    }
    covered += h;
    ++step_count;
    t = start.time + dir * covered;
    // wrap angles; the field is 2pi-periodic so the step map commutes with it
    for (int j = 0; j < d; ++j) {
      y[d + j] = std::fmod(y[d + j], kTwoPi);
      if (y[d + j] < 0.0) y[d + j] += kTwoPi;
    }
    traj.running_sup = std::max(traj.running_sup, norm_a(y));
    if (step_count % opts.decimate == 0) record(t);
    if (opts.audit_symplectic && step_count == next_audit) {
      next_audit += audit_stride;
      // finite-difference symplectic audit of one step at the current state
      auto one_step = [&](const std::vector<double>& z0, double tt) {
        std::vector<double> yy = z0;
        Stepper tight(eval, opts.tol_fp * 1e-2, opts.max_fp_iter * 2);
        auto oc = tight.step(yy, tt, hs);
        if (!oc.converged)
          throw NumericalError("integrate: audit step failed to converge");
        return yy;
      };
      std::vector<std::vector<double>> pts{y};
      double defect = lie::symplectic_defect(one_step, d, pts, t, opts.audit_h);
      traj.audit.max_symplectic_defect =
          std::max(traj.audit.max_symplectic_defect, defect);
    }
  }
  if (traj.samples.empty() || traj.samples.back().t != t) record(t);
  traj.audit.steps = step_count;
  traj.audit.final_dt = std::fabs(dt);
  return traj;
}

sym::PhasePoint to_normal_form(const coho::NormalFormResult& nf,
                               const sym::PhasePoint& p,
                               const lie::FlowOptions& opts) {
  sym::PhasePoint cur = p;
  for (const auto& g : nf.generators) {
    lie::GeneratorFlow flow(g);
    cur = flow.flow(cur, 1.0, opts).point;
  }
  return cur;
}

sym::PhasePoint from_normal_form(const coho::NormalFormResult& nf,
                                 const sym::PhasePoint& p,
                                 const lie::FlowOptions& opts) {
  sym::PhasePoint cur = p;
  for (auto it = nf.generators.rbegin(); it != nf.generators.rend(); ++it) {
    lie::GeneratorFlow flow(*it);
    cur = flow.flow(cur, -1.0, opts).point;
  }
  return cur;
}

}  // namespace nek::dyn
