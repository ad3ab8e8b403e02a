#include "nek/probes.hpp"

#include <cmath>
#include <numbers>

namespace nek::probes {

using sym::Cx;
using sym::ExprPtr;
using sym::Mode;
using sym::PhasePoint;
using sym::SymbolFunction;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

sym::SymbolFunction random_symbol(std::mt19937_64& rng,
                                  const SymbolSpec& spec) {
  std::uniform_real_distribution<double> uc(-1.0, 1.0);
  std::uniform_int_distribution<int> upoly(0, static_cast<int>(spec.max_poly_degree));
  std::uniform_int_distribution<int> uvar(0, spec.d - 1);
  std::uniform_int_distribution<int> ukk(-spec.kmax, spec.kmax);
  std::uniform_real_distribution<double> ujac(spec.jac_exponent_lo,
                                              spec.jac_exponent_hi);
  std::uniform_int_distribution<int> uw(-2, 2);

  auto random_coeff = [&](bool force_real) {
    std::vector<ExprPtr> factors;
    factors.push_back(sym::ex_const(force_real
                                        ? Cx{uc(rng), 0.0}
                                        : Cx{uc(rng), uc(rng)}));
    int p = upoly(rng);
    for (int i = 0; i < p; ++i) factors.push_back(sym::ex_action(uvar(rng)));
    factors.push_back(sym::ex_pow(sym::ex_jac(), ujac(rng)));
    if (spec.time_dependent && !force_real) {
      int w = uw(rng);
      if (w != 0)
        factors.push_back(sym::ex_exp(sym::ex_mul(
            sym::ex_const(Cx{0.0, static_cast<double>(w)}), sym::ex_time())));
    }
    return sym::ex_mul(std::move(factors));
  };

  SymbolFunction f(spec.d, spec.kmax, true);
  if (spec.with_zero_mode) {
    // a real zero-mode coefficient: real polynomial part times cos-type time
    auto c = random_coeff(true);
    if (spec.time_dependent) {
      auto e = sym::ex_exp(sym::ex_mul(sym::ex_const(Cx{0.0, 1.0}),
                                       sym::ex_time()));
      auto em = sym::ex_exp(sym::ex_mul(sym::ex_const(Cx{0.0, -1.0}),
                                        sym::ex_time()));
      c = sym::ex_mul(c, sym::ex_mul(sym::ex_const(0.5), sym::ex_add(e, em)));
    }
    f.set_coeff(Mode(spec.d, 0), c);
  }
  std::uniform_int_distribution<int> umodes(1, spec.max_modes);
  int n_modes = umodes(rng);
  for (int m = 0; m < n_modes; ++m) {
    Mode k(spec.d, 0);
    bool zero = true;
    for (int j = 0; j < spec.d; ++j) {
      k[j] = ukk(rng);
      zero = zero && k[j] == 0;
    }
    if (zero) k[0] = 1;
    f.set_real_pair(k, random_coeff(false));
  }
  return f;
}

std::vector<sym::PhasePoint> random_points(std::mt19937_64& rng, int n, int d,
                                           double lo, double hi) {
  std::uniform_real_distribution<double> ua(lo, hi);
  std::uniform_real_distribution<double> uphi(0.0, kTwoPi);
  std::vector<PhasePoint> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) {
    PhasePoint p;
    p.actions.resize(d);
    p.angles.resize(d);
    for (int j = 0; j < d; ++j) {
      p.actions[j] = ua(rng);
      p.angles[j] = uphi(rng);
    }
    p.time = uphi(rng);
    pts.push_back(std::move(p));
  }
  return pts;
}

std::vector<sym::PhasePoint> random_shell_points(std::mt19937_64& rng, int n,
                                                 int d, double r_lo,
                                                 double r_hi) {
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> ur(std::log(r_lo), std::log(r_hi));
  std::uniform_real_distribution<double> uphi(0.0, kTwoPi);
  std::vector<PhasePoint> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) {
    PhasePoint p;
    p.actions.resize(d);
    p.angles.resize(d);
    double nn = 0.0;
    do {
      nn = 0.0;
      for (int j = 0; j < d; ++j) {
        p.actions[j] = gauss(rng);
        nn += p.actions[j] * p.actions[j];
      }
      nn = std::sqrt(nn);
    } while (nn < 1e-12);
    double r = std::exp(ur(rng));
    for (int j = 0; j < d; ++j) {
      p.actions[j] *= r / nn;
      p.angles[j] = uphi(rng);
    }
    p.time = uphi(rng);
    pts.push_back(std::move(p));
  }
  return pts;
}

double fd_poisson_bracket(const sym::SymbolFunction& f,
                          const sym::SymbolFunction& g,
                          const sym::PhasePoint& p, double h) {
  const int d = f.dim();
  auto eval_at = [&](const sym::SymbolFunction& s, int var, double offset,
                     bool angle) {
    PhasePoint q = p;
    if (angle)
      q.angles[var] += offset;
    else
      q.actions[var] += offset;
    return s.evaluate_cx(q);
  };
  Cx sum{0.0, 0.0};
  for (int j = 0; j < d; ++j) {
    double ha = h * std::max(1.0, std::fabs(p.actions[j]));
    Cx df_dphi = (eval_at(f, j, h, true) - eval_at(f, j, -h, true)) / (2.0 * h);
    Cx dg_da =
        (eval_at(g, j, ha, false) - eval_at(g, j, -ha, false)) / (2.0 * ha);
    Cx dg_dphi = (eval_at(g, j, h, true) - eval_at(g, j, -h, true)) / (2.0 * h);
    Cx df_da =
        (eval_at(f, j, ha, false) - eval_at(f, j, -ha, false)) / (2.0 * ha);
    sum += df_dphi * dg_da - dg_dphi * df_da;
  }
  return sum.real();
}

}  // namespace nek::probes
