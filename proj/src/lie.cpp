#include "nek/lie.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "nek/errors.hpp"

namespace nek::lie {

using sym::Cx;
using sym::PhasePoint;
using sym::SymbolFunction;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Dormand-Prince 5(4) tableau.
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
constexpr double kB5[7] = {35.0 / 384,    0.0,           500.0 / 1113,
                           125.0 / 192,   -2187.0 / 6784, 11.0 / 84,
                           0.0};
constexpr double kB4[7] = {5179.0 / 57600, 0.0, 7571.0 / 16695, 393.0 / 640,
                           -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

// Gauss-Kronrod 15 nodes/weights on [-1, 1] with the embedded Gauss-7 rule.
constexpr double kGKNodes[15] = {
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,                0.207784955007898,
    0.405845151377397,  0.586087235467691,  0.741531185599394,
    0.864864423359769,  0.949107912342759,  0.991455371120813};
constexpr double kGKWeights[15] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529};
constexpr double kGWeights[7] = {0.129484966168870, 0.279705391489277,
                                 0.381830050505119, 0.417959183673469,
                                 0.381830050505119, 0.279705391489277,
                                 0.129484966168870};

}  // namespace

struct GeneratorFlow::State {
  std::vector<double> base_a, base_phi;
  std::vector<double> y;  // (delta_a, delta_phi)
  mutable std::vector<double> work_a, work_phi, rhs_buf;
  mutable std::vector<Cx> regs;
};

GeneratorFlow::GeneratorFlow(const sym::SymbolFunction& g)
    : g_(g), d_(g.dim()) {
  if (!g.is_real())
    throw ConfigError("generator flow: the generator must be real-flagged");
  for (int j = 0; j < d_; ++j) {
    dg_da_.emplace_back(g_.derive_action(j));
    dg_dphi_.emplace_back(g_.derive_angle(j));
  }
  auto dt = g_.derive_time();
  if (!dt.empty()) dg_dt_.emplace(dt);
}

void GeneratorFlow::rhs(const State& s, double t,
                        std::vector<double>& out) const {
  s.work_a.resize(d_);
  s.work_phi.resize(d_);
  for (int j = 0; j < d_; ++j) {
    s.work_a[j] = s.base_a[j] + s.y[j];
    s.work_phi[j] = s.base_phi[j] + s.y[d_ + j];
  }
  out.resize(2 * d_);
  for (int j = 0; j < d_; ++j) {
    out[j] = -dg_dphi_[j].evaluate(s.work_a, s.work_phi, t, s.regs);
    out[d_ + j] = dg_da_[j].evaluate(s.work_a, s.work_phi, t, s.regs);
  }
}

// One attempted step of signed size h.  On acceptance advances s.y and
// reports the recommended size factor; on rejection leaves s.y and reports a
// shrink factor.  With fixed == true the step is always taken.
bool GeneratorFlow::dp5_step(State& s, double t, double& h, double tol,
                             bool fixed) const {
  const int n = 2 * d_;
  std::vector<double> k[7];
  std::vector<double> y0 = s.y;
  for (int stage = 0; stage < 7; ++stage) {
    for (int i = 0; i < n; ++i) {
      double acc = y0[i];
      for (int j = 0; j < stage; ++j) acc += h * kA[stage][j] * k[j][i];
      s.y[i] = acc;
    }
    k[stage].resize(n);
    rhs(s, t, k[stage]);
  }
  double norm = 0.0;
  std::vector<double> y5(n);
  for (int i = 0; i < n; ++i) {
    double acc5 = y0[i], err = 0.0;
    for (int j = 0; j < 7; ++j) {
      acc5 += h * kB5[j] * k[j][i];
      err += h * (kB5[j] - kB4[j]) * k[j][i];
    }
    y5[i] = acc5;
    if (!fixed) {
      double sc = tol * (1.0 + std::max(std::fabs(y0[i]), std::fabs(acc5)));
      norm += (err / sc) * (err / sc);
    }
  }
  if (fixed) {
    s.y = std::move(y5);
    return true;
  }
  norm = std::sqrt(norm / n);
  if (norm <= 1.0) {
    s.y = std::move(y5);
    h *= std::clamp(0.9 * std::pow(std::max(norm, 1e-12), -0.2), 1.0, 5.0);
    return true;
  }
  s.y = std::move(y0);
  h *= std::clamp(0.9 * std::pow(norm, -0.2), 0.1, 0.9);
  return false;
}

namespace {

template <typename StepFn>
void drive_adaptive(double tau, const FlowOptions& opts, StepFn&& attempt) {
  const double dir = tau >= 0 ? 1.0 : -1.0;
  const double span = std::fabs(tau);
  if (span == 0.0) return;
  double done = 0.0;
  double h = std::min(opts.h_init, span);
  long attempts = 0;
  while (span - done > 1e-14 * span) {
    h = std::min(h, span - done);
    if (h < opts.h_min)
      throw NumericalError("generator flow: step size underflow");
    double hs = dir * h;
    if (attempt(hs)) done += h;
    h = std::fabs(hs);
    if (++attempts > opts.max_steps)
      throw NumericalError("generator flow: step budget exceeded");
  }
}

}  // namespace

GeneratorFlow::Result GeneratorFlow::flow(const sym::PhasePoint& start,
                                          double tau,
                                          const FlowOptions& opts) const {
  State s;
  s.base_a = start.actions;
  s.base_phi = start.angles;
  s.y.assign(2 * d_, 0.0);
  long nsteps = 0;
  drive_adaptive(tau, opts, [&](double& hs) {
    bool ok = dp5_step(s, start.time, hs, opts.tol, false);
    if (ok) ++nsteps;
    return ok;
  });
  Result out;
  out.steps = nsteps;
  out.delta_a.assign(s.y.begin(), s.y.begin() + d_);
  out.delta_phi.assign(s.y.begin() + d_, s.y.end());
  out.point.actions.resize(d_);
  out.point.angles.resize(d_);
  for (int j = 0; j < d_; ++j) {
    out.point.actions[j] = start.actions[j] + out.delta_a[j];
    out.point.angles[j] = start.angles[j] + out.delta_phi[j];
  }
  out.point.time = start.time;
  out.point.wrap_angles();
  return out;
}

std::vector<double> GeneratorFlow::accepted_steps(
    const sym::PhasePoint& start, double tau, const FlowOptions& opts) const {
  State s;
  s.base_a = start.actions;
  s.base_phi = start.angles;
  s.y.assign(2 * d_, 0.0);
  std::vector<double> steps;
  drive_adaptive(tau, opts, [&](double& hs) {
    double taken = hs;
    bool ok = dp5_step(s, start.time, hs, opts.tol, false);
    if (ok) steps.push_back(taken);
    return ok;
  });
  return steps;
}

GeneratorFlow::Result GeneratorFlow::flow_replay(
    const sym::PhasePoint& start, std::span<const double> steps) const {
  State s;
  s.base_a = start.actions;
  s.base_phi = start.angles;
  s.y.assign(2 * d_, 0.0);
  for (double h : steps) {
    double hs = h;
    dp5_step(s, start.time, hs, 0.0, true);
  }
  Result out;
  out.steps = static_cast<long>(steps.size());
  out.delta_a.assign(s.y.begin(), s.y.begin() + d_);
  out.delta_phi.assign(s.y.begin() + d_, s.y.end());
  out.point.actions.resize(d_);
  out.point.angles.resize(d_);
  for (int j = 0; j < d_; ++j) {
    out.point.actions[j] = start.actions[j] + out.delta_a[j];
    out.point.angles[j] = start.angles[j] + out.delta_phi[j];
  }
  out.point.time = start.time;
  out.point.wrap_angles();
  return out;
}

namespace {

// Integrand of Psi along the flow, with a monotone cache so ascending node
// sequences continue the previous flow instead of restarting at tau = 0.
struct PsiIntegrand {
  const GeneratorFlow& flow;
  const sym::PhasePoint& start;
  const FlowOptions& opts;
  const sym::CompiledSymbol* dgdt;
  mutable double cached_tau = 0.0;
  mutable sym::PhasePoint cached;
  mutable bool have_cache = false;
  mutable std::vector<Cx> regs;

  double operator()(double tau) const {
    sym::PhasePoint at;
    if (have_cache && tau >= cached_tau) {
      at = flow.flow(cached, tau - cached_tau, opts).point;
    } else {
      at = flow.flow(start, tau, opts).point;
    }
    cached = at;
    cached_tau = tau;
    have_cache = true;
    return dgdt->evaluate(at.actions, at.angles, start.time, regs);
  }
};

double gk_recurse(const PsiIntegrand& f, double a, double b, double tol,
                  int depth) {
  if (depth > 24) throw NumericalError("psi quadrature failed to converge");
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double i15 = 0.0, i7 = 0.0;
  for (int i = 0; i < 15; ++i) {
    double v = f(mid + half * kGKNodes[i]);
    i15 += kGKWeights[i] * v;
    if (i % 2 == 1) i7 += kGWeights[i / 2] * v;
  }
  i15 *= half;
  i7 *= half;
  if (std::fabs(i15 - i7) <= tol * (1.0 + std::fabs(i15))) return i15;
  return gk_recurse(f, a, mid, 0.7 * tol, depth + 1) +
         gk_recurse(f, mid, b, 0.7 * tol, depth + 1);
}

}  // namespace

double GeneratorFlow::psi(const sym::PhasePoint& start,
                          const FlowOptions& opts, double quad_tol) const {
  if (!dg_dt_) return 0.0;
  PsiIntegrand f{*this, start, opts, &*dg_dt_, 0.0, {}, false, {}};
  return gk_recurse(f, 0.0, 1.0, quad_tol, 0);
}

Pushforward pushforward_taylor(const sym::SymbolFunction& f,
                               const sym::SymbolFunction& g, int terms,
                               int kmax_budget) {
  if (terms < 0) throw ConfigError("pushforward: negative term count");
  Pushforward out{{f}, f, false};
  double fact = 1.0;
  for (int l = 1; l <= terms; ++l) {
    const auto& prev = out.terms.back();
    auto b = sym::poisson_bracket(
        prev, g, std::min(kmax_budget, prev.kmax() + g.kmax()));
    out.truncated = out.truncated || b.truncated;
    out.terms.push_back(std::move(b.value));
    fact *= l;
    out.sum = sym::add(out.sum, out.terms.back().scaled(Cx{1.0 / fact, 0.0}));
  }
  return out;
}

double pushforward_probe_max(const Pushforward& pf,
                             const sym::SymbolFunction& f,
                             const GeneratorFlow& flow,
                             std::span<const sym::PhasePoint> points,
                             const FlowOptions& opts) {
  double worst = 0.0;
  for (const auto& p : points) {
    auto end = flow.flow(p, 1.0, opts);
    worst = std::max(worst,
                     std::fabs(f.evaluate(end.point) - pf.sum.evaluate(p)));
  }
  return worst;
}

namespace {

std::vector<sym::PhasePoint> sphere_points(int d, double r, int count,
                                           std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> uphi(0.0, kTwoPi);
  std::vector<sym::PhasePoint> pts;
  for (int i = 0; i < count; ++i) {
    std::vector<double> u(d);
    double n = 0.0;
    do {
      n = 0.0;
      for (auto& x : u) {
        x = gauss(rng);
        n += x * x;
      }
      n = std::sqrt(n);
    } while (n < 1e-12);
    sym::PhasePoint p;
    p.actions.resize(d);
    p.angles.resize(d);
    for (int j = 0; j < d; ++j) {
      p.actions[j] = r * u[j] / n;
      p.angles[j] = uphi(rng);
    }
    pts.push_back(std::move(p));
  }
  return pts;
}

}  // namespace

double pushforward_probe_order(const Pushforward& pf,
                               const sym::SymbolFunction& f,
                               const GeneratorFlow& flow,
                               std::span<const double> radii, int directions,
                               std::uint64_t seed, const FlowOptions& opts) {
  std::mt19937_64 rng(seed);
  std::vector<double> lx, ly;
  for (double r : radii) {
    double sup = 0.0;
    for (const auto& p : sphere_points(f.dim(), r, directions, rng)) {
      auto end = flow.flow(p, 1.0, opts);
      sup = std::max(sup,
                     std::fabs(f.evaluate(end.point) - pf.sum.evaluate(p)));
    }
    if (sup > 0.0) {
      lx.push_back(std::log(r));
      ly.push_back(std::log(sup));
    }
  }
  if (lx.size() < 2) return sym::kOrderFitDegenerate;
  return sym::ls_slope(lx, ly);
}

double symplectic_defect(const PhaseMap& map, int d,
                         std::span<const std::vector<double>> points,
                         double time, double h_rel) {
  const int n = 2 * d;
  double worst = 0.0;
  for (const auto& z0 : points) {
    if (static_cast<int>(z0.size()) != n)
      throw ConfigError("symplectic_defect: bad point dimension");
    std::vector<std::vector<double>> jac(n, std::vector<double>(n));
    for (int j = 0; j < n; ++j) {
      double h = h_rel * std::max(1.0, std::fabs(z0[j]));
      auto zp = z0, zm = z0;
      zp[j] += h;
      zm[j] -= h;
      auto fp = map(zp, time);
      auto fm = map(zm, time);
      for (int i = 0; i < n; ++i) jac[i][j] = (fp[i] - fm[i]) / (2.0 * h);
    }
    // J^T Omega J - Omega with Omega = [0 -I; I 0] in (a, phi) order.
    std::vector<double> ocol(n);
    for (int cj = 0; cj < n; ++cj) {
      for (int i = 0; i < d; ++i) {
        ocol[i] = -jac[d + i][cj];
        ocol[d + i] = jac[i][cj];
      }
      for (int ci = 0; ci < n; ++ci) {
        double v = 0.0;
        for (int i = 0; i < n; ++i) v += jac[i][ci] * ocol[i];
        double target = 0.0;
        if (ci < d && cj == ci + d) target = -1.0;
        if (ci >= d && cj == ci - d) target = 1.0;
        worst = std::max(worst, std::fabs(v - target));
      }
    }
  }
  return worst;
}

PhaseMap flow_phase_map(const GeneratorFlow& flow, const FlowOptions& opts) {
  return [&flow, opts](const std::vector<double>& z, double time) {
    const int d = flow.dim();
    sym::PhasePoint p;
    p.actions.assign(z.begin(), z.begin() + d);
    p.angles.assign(z.begin() + d, z.end());
    p.time = time;
    auto steps = flow.accepted_steps(p, 1.0, opts);
    auto r = flow.flow_replay(p, steps);
    std::vector<double> out(2 * d);
    for (int j = 0; j < d; ++j) {
      out[j] = z[j] + r.delta_a[j];
      out[d + j] = z[d + j] + r.delta_phi[j];
    }
    return out;
  };
}

DisplacementFit displacement_exponent(const GeneratorFlow& flow,
                                      std::span<const double> radii,
                                      int directions, std::uint64_t seed,
                                      const FlowOptions& opts) {
  std::mt19937_64 rng(seed);
  DisplacementFit fit;
  std::vector<double> lx, ly;
  for (double r : radii) {
    double sup = 0.0;
    for (const auto& p : sphere_points(flow.dim(), r, directions, rng)) {
      auto res = flow.flow(p, 1.0, opts);
      double disp = 0.0;
      for (double x : res.delta_a) disp += x * x;
      sup = std::max(sup, std::sqrt(disp));
    }
    fit.max_disp = std::max(fit.max_disp, sup);
    if (sup > 0.0) {
      lx.push_back(std::log(r));
      ly.push_back(std::log(sup));
    }
  }
  fit.slope = lx.size() < 2 ? sym::kOrderFitDegenerate : sym::ls_slope(lx, ly);
  return fit;
}

ConjugatedHamiltonian::ConjugatedHamiltonian(
    std::vector<sym::SymbolFunction> parts, bool include_h0,
    const GeneratorFlow& gen, FlowOptions opts, double quad_tol)
    : include_h0_(include_h0), gen_(gen), opts_(opts), quad_tol_(quad_tol) {
  for (auto& p : parts) parts_.emplace_back(p);
}

double ConjugatedHamiltonian::operator()(const sym::PhasePoint& p) const {
  auto end = gen_.flow(p, 1.0, opts_);
  double h = 0.0;
  if (include_h0_)
    for (double a : end.point.actions) h += 0.5 * a * a;
  std::vector<Cx> regs;
  for (const auto& part : parts_)
    h += part.evaluate(end.point.actions, end.point.angles, p.time, regs);
  return h - gen_.psi(p, opts_, quad_tol_);
}

}  // namespace nek::lie
