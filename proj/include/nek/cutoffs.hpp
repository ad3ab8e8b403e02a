#pragma once

#include <span>
#include <vector>

#include "nek/bump.hpp"
#include "nek/expr.hpp"

namespace nek::cut {

// Parameters of the resonance cutoffs.  delta grades the small-divisor
// threshold ||a||^delta, mu the ultraviolet threshold ||a||^mu.
struct CutoffParams {
  double delta = 0.75;
  double mu = 0.08;

  // delta in (2/3, 1), mu > 0; when the ambient dimension is known the
  // geometric smallness condition d(d+1)/2 * mu < 1 - delta is enforced too.
  void validate(int d = 0) const;
};

// chi_k(a) = bump(a.k / (||a||^delta ||k||)); 1 when |a.k| <= ||a||^delta||k||/2,
// 0 when |a.k| >= ||a||^delta ||k||.
double chi_res(std::span<const double> a, std::span<const int> k,
               const CutoffParams& p);

// chi~_k(a) = bump(||k|| / ||a||^mu).
double chi_uv(std::span<const double> a, std::span<const int> k,
              const CutoffParams& p);

// d_k(a) = (1 - chi_k(a)) / (a.k): identically 0 on the inner resonant layer,
// 1/(a.k) outside, smooth in between, |d_k| <= 2 / (||a||^delta ||k||).
double d_k(std::span<const double> a, std::span<const int> k,
           const CutoffParams& p);

// Expression-DAG forms of the same functions of a (k and parameters baked
// in); these evaluate identically to the scalar forms above because they
// share the bump kernel and the absorbing-zero product semantics.
sym::ExprPtr dot_k_expr(std::span<const int> k);
sym::ExprPtr chi_res_expr(std::span<const int> k, const CutoffParams& p);
sym::ExprPtr one_minus_chi_res_expr(std::span<const int> k,
                                    const CutoffParams& p);
sym::ExprPtr chi_uv_expr(std::span<const int> k, const CutoffParams& p);
sym::ExprPtr one_minus_chi_uv_expr(std::span<const int> k,
                                   const CutoffParams& p);
sym::ExprPtr d_k_expr(std::span<const int> k, const CutoffParams& p);

}  // namespace nek::cut
