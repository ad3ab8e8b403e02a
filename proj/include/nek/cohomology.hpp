#pragma once

#include <vector>

#include "nek/cutoffs.hpp"
#include "nek/symbol.hpp"

namespace nek::coho {

// Pointwise-exact decomposition f = nonresonant + resonant + smoothing.
// The k = 0 part is resonant (a.0 = 0 always); for k != 0 the coefficients
// carry (1-chi_k) chi~_k, chi_k chi~_k and (1-chi~_k) respectively.
struct SplitResult {
  sym::SymbolFunction nonresonant;
  sym::SymbolFunction resonant;
  sym::SymbolFunction smoothing;
};

SplitResult split(const sym::SymbolFunction& f, const cut::CutoffParams& p);

// Generator g = i sum_{k!=0} d_k(a) chi~_k(a) f_k(a,t) e^{ik.phi}, which
// satisfies {h0; g} = f^{(nr)} exactly, mode by mode.  The normal-form step
// conjugates with the inverse Lie flow (generator -g) so the nonresonant part
// cancels.
sym::SymbolFunction solve_cohomological(const sym::SymbolFunction& f,
                                        const cut::CutoffParams& p);

// Per-step exponent bookkeeping (class orders, not measurements): with
// m = beta - n sigma and the quadratic h0,
//   e1 = m - (3 delta - 2)        e2 = beta + m - 2 delta
//   e3 = m + 2(m - 2 delta)       e4 = m - delta
struct LedgerEntry {
  int step = 0;
  double m_class = 0.0;  // incoming class order beta - n sigma
  double sigma = 0.0;    // min(2 delta - beta, delta)
  double e1 = 0, e2 = 0, e3 = 0, e4 = 0;
  double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
  double fitted_in = 0.0;   // measured order of the incoming remainder
  double fitted_out = 0.0;  // measured order of the outgoing remainder
  bool truncated = false;   // convolution hit the k_max budget
  std::size_t generator_modes = 0;
  std::size_t tape_size_out = 0;  // compiled size of the outgoing remainder
};

struct NormalFormOptions {
  double beta = 1.0;       // order of the perturbation
  int kmax_budget = 32;    // angle-truncation budget for all convolutions
  int max_steps = 3;
  double target_order = -1e9;      // stop once fitted order falls below
  double h0_degree = 2.0;          // the kinetic degree entering e1
  std::vector<double> fit_radii;   // dyadic radii for order measurements
  sym::FitOptions fit;
  bool measure_orders = true;
};

struct StepResult {
  sym::SymbolFunction z_next;
  sym::SymbolFunction r_next;
  sym::SymbolFunction smoothing;  // the split-off flat contribution
  sym::SymbolFunction generator;
  LedgerEntry entry;
};

// One normal-form step: g = solve_cohomological(R_n); Z_{n+1} = Z_n + R^res;
// R_{n+1} = {R^nr, g}/2 - {Z_n, g} - {R_n, g} + d_t g (Taylor pieces kept to
// second order in the Lie expansion of h0 and first order elsewhere).
StepResult normal_form_step(const sym::SymbolFunction& z_n,
                            const sym::SymbolFunction& r_n,
                            const cut::CutoffParams& p,
                            const NormalFormOptions& opts, int step_index);

struct NormalFormResult {
  sym::SymbolFunction z;       // normal-form part
  sym::SymbolFunction r;       // current remainder
  sym::SymbolFunction r_flat;  // accumulated smoothing-class remainder
  std::vector<sym::SymbolFunction> generators;
  std::vector<LedgerEntry> ledger;
  bool budget_exhausted = false;
  int steps = 0;
};

double sigma_gain(double beta, double delta);  // min(2 delta - beta, delta)

// Iterates normal_form_step on H = h0 + P until the remainder's fitted order
// reaches -target or the step/truncation budget runs out.
NormalFormResult normal_form(const sym::SymbolFunction& perturbation,
                             const cut::CutoffParams& p,
                             const NormalFormOptions& opts);

}  // namespace nek::coho
