#include "nek/cohomology.hpp"

#include <algorithm>
#include <cmath>

#include "nek/errors.hpp"

namespace nek::coho {

using sym::Cx;
using sym::ExprPtr;
using sym::Mode;
using sym::SymbolFunction;

namespace {

bool is_zero_mode(const Mode& k) {
  return std::all_of(k.begin(), k.end(), [](int x) { return x == 0; });
}

}  // namespace

SplitResult split(const sym::SymbolFunction& f, const cut::CutoffParams& p) {
  p.validate();
  const int d = f.dim();
  SymbolFunction nr(d, f.kmax(), f.is_real());
  SymbolFunction res(d, f.kmax(), f.is_real());
  SymbolFunction sm(d, f.kmax(), f.is_real());
  for (const auto& [k, c] : f.coeffs()) {
    if (is_zero_mode(k)) {
      res.set_coeff(k, c);
      continue;
    }
    auto chi = cut::chi_res_expr(k, p);
    auto chi_uv = cut::chi_uv_expr(k, p);
    nr.set_coeff(k, sym::ex_mul({cut::one_minus_chi_res_expr(k, p), chi_uv, c}));
    res.set_coeff(k, sym::ex_mul({chi, chi_uv, c}));
    sm.set_coeff(k, sym::ex_mul(cut::one_minus_chi_uv_expr(k, p), c));
  }
  return {std::move(nr), std::move(res), std::move(sm)};
}

sym::SymbolFunction solve_cohomological(const sym::SymbolFunction& f,
                                        const cut::CutoffParams& p) {
  p.validate();
  SymbolFunction g(f.dim(), f.kmax(), f.is_real());
  for (const auto& [k, c] : f.coeffs()) {
    if (is_zero_mode(k)) continue;
    g.set_coeff(k, sym::ex_mul({sym::ex_const(Cx{0.0, 1.0}),
                                cut::d_k_expr(k, p), cut::chi_uv_expr(k, p),
                                c}));
  }
  return g;
}

double sigma_gain(double beta, double delta) {
  return std::min(2.0 * delta - beta, delta);
}

StepResult normal_form_step(const sym::SymbolFunction& z_n,
                            const sym::SymbolFunction& r_n,
                            const cut::CutoffParams& p,
                            const NormalFormOptions& opts, int step_index) {
  const double sigma = sigma_gain(opts.beta, p.delta);
  if (sigma <= 0.0)
    throw ConfigError("normal form: need delta > beta/2 for a positive gain");

  LedgerEntry entry;
  entry.step = step_index;
  entry.sigma = sigma;
  entry.m_class = opts.beta - step_index * sigma;
  entry.s1 = 3.0 * p.delta - opts.h0_degree;
  entry.s2 = 2.0 * p.delta - opts.beta;
  entry.s3 = 2.0 * (step_index * sigma + 2.0 * p.delta - opts.beta);
  entry.s4 = p.delta;
  entry.e1 = entry.m_class - entry.s1;
  entry.e2 = entry.m_class - entry.s2;
  entry.e3 = entry.m_class - entry.s3;
  entry.e4 = entry.m_class - entry.s4;

  StepResult out{
      sym::SymbolFunction::zero(r_n.dim()), sym::SymbolFunction::zero(r_n.dim()),
      sym::SymbolFunction::zero(r_n.dim()), sym::SymbolFunction::zero(r_n.dim()),
      entry};

  auto sp = split(r_n, p);
  out.generator = solve_cohomological(r_n, p);
  out.z_next = sym::add(z_n, sp.resonant);
  out.smoothing = sp.smoothing;

  const int K = opts.kmax_budget;
  bool truncated = false;
  auto bracket = [&](const SymbolFunction& a, const SymbolFunction& b) {
    auto r = sym::poisson_bracket(a, b, std::min(K, a.kmax() + b.kmax()));
    truncated = truncated || r.truncated;
    return std::move(r.value);
  };

  // R_{n+1} = {R^nr, g}/2 - {Z_n, g} - {R_n, g} + d_t g
  SymbolFunction r_next =
      bracket(sp.nonresonant, out.generator).scaled(Cx{0.5, 0.0});
  r_next = sym::sub(r_next, bracket(z_n, out.generator));
  r_next = sym::sub(r_next, bracket(r_n, out.generator));
  r_next = sym::add(r_next, out.generator.derive_time());
  out.r_next = std::move(r_next);

  out.entry.truncated = truncated;
  out.entry.generator_modes = out.generator.mode_count();
  if (opts.measure_orders && !opts.fit_radii.empty()) {
    out.entry.fitted_in = sym::fit_order(r_n, opts.fit_radii, opts.fit);
    out.entry.fitted_out = sym::fit_order(out.r_next, opts.fit_radii, opts.fit);
    sym::CompiledSymbol cs(out.r_next);
    out.entry.tape_size_out = cs.tape_size();
  }
  return out;
}

NormalFormResult normal_form(const sym::SymbolFunction& perturbation,
                             const cut::CutoffParams& p,
                             const NormalFormOptions& opts) {
  p.validate();
  if (!(opts.beta < 2.0))
    throw ConfigError("normal form: perturbation order must be below 2");
  if (!(p.delta > opts.beta / 2.0))
    throw ConfigError("normal form: need delta > beta/2");

  NormalFormResult res{sym::SymbolFunction::zero(perturbation.dim()),
                       perturbation,
                       sym::SymbolFunction::zero(perturbation.dim()),
                       {},
                       {},
                       false,
                       0};
  for (int n = 0; n < opts.max_steps; ++n) {
    if (res.r.empty()) break;
    auto step = normal_form_step(res.z, res.r, p, opts, n);
    res.z = std::move(step.z_next);
    res.r = std::move(step.r_next);
    res.r_flat = sym::add(res.r_flat, step.smoothing);
    res.generators.push_back(std::move(step.generator));
    res.ledger.push_back(step.entry);
    ++res.steps;
    if (step.entry.truncated) {
      res.budget_exhausted = true;
      break;  // partial result returned with the flag set
    }
    if (opts.measure_orders && !opts.fit_radii.empty() &&
        step.entry.fitted_out <= opts.target_order)
      break;
  }
  return res;
}

}  // namespace nek::coho
