#include "nek/cutoffs.hpp"

#include <cmath>

#include "nek/errors.hpp"

namespace nek::cut {

namespace {

double dot(std::span<const double> a, std::span<const int> k) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * k[i];
  return s;
}

double norm(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return std::sqrt(s);
}

double knorm(std::span<const int> k) {
  double s = 0.0;
  for (int x : k) s += static_cast<double>(x) * x;
  return std::sqrt(s);
}

void require_nonzero_k(std::span<const int> k) {
  for (int x : k)
    if (x != 0) return;
  throw ConfigError("cutoff: k must be nonzero");
}

}  // namespace

void CutoffParams::validate(int d) const {
  if (!(delta > 2.0 / 3.0))
    throw ConfigError("delta must exceed 2/3 (got " + std::to_string(delta) +
                      ")");
  if (!(delta < 1.0))
    throw ConfigError("delta must be below 1 (got " + std::to_string(delta) +
                      ")");
  if (!(mu > 0.0)) throw ConfigError("mu must be positive");
  if (d > 0 && !(0.5 * d * (d + 1) * mu < 1.0 - delta))
    throw ConfigError("mu too large: need d(d+1)/2 * mu < 1 - delta");
}

double chi_res(std::span<const double> a, std::span<const int> k,
               const CutoffParams& p) {
  require_nonzero_k(k);
  double na = norm(a);
  if (na == 0.0) throw ConfigError("chi_res: a must be nonzero");
  return bump(dot(a, k) / (std::pow(na, p.delta) * knorm(k)));
}

double chi_uv(std::span<const double> a, std::span<const int> k,
              const CutoffParams& p) {
  double na = norm(a);
  if (na == 0.0) throw ConfigError("chi_uv: a must be nonzero");
  return bump(knorm(k) / std::pow(na, p.mu));
}

double d_k(std::span<const double> a, std::span<const int> k,
           const CutoffParams& p) {
  require_nonzero_k(k);
  double na = norm(a);
  if (na == 0.0) throw ConfigError("d_k: a must be nonzero");
  double u = 1.0 - bump(dot(a, k) / (std::pow(na, p.delta) * knorm(k)));
  if (u == 0.0) return 0.0;
  return u / dot(a, k);
}

sym::ExprPtr dot_k_expr(std::span<const int> k) {
  std::vector<sym::ExprPtr> terms;
  for (std::size_t j = 0; j < k.size(); ++j) {
    if (k[j] == 0) continue;
    terms.push_back(sym::ex_mul(sym::ex_const(static_cast<double>(k[j])),
                                sym::ex_action(static_cast<int>(j))));
  }
  return sym::ex_add(std::move(terms));
}

namespace {

sym::ExprPtr res_ratio_expr(std::span<const int> k, const CutoffParams& p) {
  return sym::ex_mul(
      {dot_k_expr(k), sym::ex_pow(sym::ex_norm(), -p.delta),
       sym::ex_const(1.0 / knorm(k))});
}

}  // namespace

sym::ExprPtr chi_res_expr(std::span<const int> k, const CutoffParams& p) {
  require_nonzero_k(k);
  return sym::ex_bump(res_ratio_expr(k, p));
}

sym::ExprPtr one_minus_chi_res_expr(std::span<const int> k,
                                    const CutoffParams& p) {
  require_nonzero_k(k);
  return sym::ex_sub(sym::ex_const(1.0), chi_res_expr(k, p));
}

sym::ExprPtr chi_uv_expr(std::span<const int> k, const CutoffParams& p) {
  return sym::ex_bump(
      sym::ex_mul(sym::ex_const(knorm(k)), sym::ex_pow(sym::ex_norm(), -p.mu)));
}

sym::ExprPtr one_minus_chi_uv_expr(std::span<const int> k,
                                   const CutoffParams& p) {
  return sym::ex_sub(sym::ex_const(1.0), chi_uv_expr(k, p));
}

sym::ExprPtr d_k_expr(std::span<const int> k, const CutoffParams& p) {
  require_nonzero_k(k);
  // The absorbing-zero product keeps the quotient exactly 0 (not NaN) on the
  // inner layer where 1 - chi vanishes identically.
  return sym::ex_mul(one_minus_chi_res_expr(k, p),
                     sym::ex_pow(dot_k_expr(k), -1.0));
}

}  // namespace nek::cut
