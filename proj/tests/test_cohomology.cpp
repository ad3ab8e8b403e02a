#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "nek/cohomology.hpp"
#include "nek/dynamics.hpp"
#include "nek/lattice.hpp"
#include "nek/probes.hpp"

using namespace nek;
using sym::Cx;
using sym::Mode;
using sym::SymbolFunction;

namespace {

cut::CutoffParams params08() {
  cut::CutoffParams p;
  p.delta = 0.75;
  p.mu = 0.08;
  return p;
}

}  // namespace

TEST_CASE("split: angle-free symbols are resonant") {
  auto p = params08();
  SymbolFunction f(2, 0, true);
  f.set_coeff(Mode{0, 0}, sym::ex_pow(sym::ex_jac(), 1.5));
  auto sp = coho::split(f, p);
  CHECK(sp.nonresonant.empty());
  CHECK(sp.smoothing.empty());
  std::mt19937_64 rng(3);
  for (const auto& q : probes::random_points(rng, 50, 2, -20.0, 20.0))
    CHECK(sp.resonant.evaluate(q) == doctest::Approx(f.evaluate(q)));
}

TEST_CASE("split: UV modes land in the smoothing part") {
  auto p = params08();
  // ||k|| = 5 mode at ||a|| ~ 100: ||a||^mu = 1.45, chi~ = 0
  SymbolFunction f(2, 5, false);
  f.set_coeff(Mode{5, 0}, sym::ex_const(1.0));
  auto sp = coho::split(f, p);
  auto q = sym::make_point({70.0, 70.0}, {0.3, 0.9});
  CHECK(std::abs(sp.smoothing.evaluate_cx(q) - f.evaluate_cx(q)) < 1e-14);
  CHECK(std::abs(sp.nonresonant.evaluate_cx(q)) == 0.0);
  CHECK(std::abs(sp.resonant.evaluate_cx(q)) == 0.0);
}

TEST_CASE("split partition is pointwise exact") {
  auto p = params08();
  std::mt19937_64 rng(5);
  // absolute 1e-12 over a box where symbol values are O(10^2)
  probes::SymbolSpec gentle;
  gentle.max_poly_degree = 1;
  gentle.jac_exponent_hi = 0.5;
  for (int trial = 0; trial < 8; ++trial) {
    auto f = probes::random_symbol(rng, gentle);
    auto sp = coho::split(f, p);
    for (const auto& q : probes::random_points(rng, 600, 2, -20.0, 20.0)) {
      if (std::hypot(q.actions[0], q.actions[1]) < 1e-6) continue;
      Cx whole = f.evaluate_cx(q);
      Cx sum = sp.nonresonant.evaluate_cx(q) + sp.resonant.evaluate_cx(q) +
               sp.smoothing.evaluate_cx(q);
      CHECK(std::abs(whole - sum) <= 1e-12);
    }
  }
  // relative identity over a wide range for generic symbols
  probes::SymbolSpec spec;
  for (int trial = 0; trial < 4; ++trial) {
    auto f = probes::random_symbol(rng, spec);
    auto sp = coho::split(f, p);
    for (const auto& q : probes::random_shell_points(rng, 400, 2, 1.0, 1e6)) {
      Cx whole = f.evaluate_cx(q);
      Cx sum = sp.nonresonant.evaluate_cx(q) + sp.resonant.evaluate_cx(q) +
               sp.smoothing.evaluate_cx(q);
      CHECK(std::abs(whole - sum) <= 1e-13 * (1.0 + std::abs(whole)));
    }
  }
}

TEST_CASE("split: resonant part satisfies the normal-form certificate") {
  auto p = params08();
  std::mt19937_64 rng(7);
  probes::SymbolSpec spec;
  spec.max_modes = 3;
  for (int trial = 0; trial < 5; ++trial) {
    auto f = probes::random_symbol(rng, spec);
    auto sp = coho::split(f, p);
    for (const auto& [k, c] : sp.resonant.coeffs()) {
      bool zero_mode = true;
      for (int kj : k) zero_mode = zero_mode && kj == 0;
      if (zero_mode) continue;
      double nk = 0.0;
      for (int kj : k) nk += double(kj) * kj;
      nk = std::sqrt(nk);
      for (const auto& q : probes::random_points(rng, 200, 2, -1e4, 1e4)) {
        sym::EvalPoint ep{q.actions, q.time};
        double na = std::hypot(q.actions[0], q.actions[1]);
        if (na < 1.0) continue;
        double val = std::abs(sym::evaluate(c, ep));
        if (val == 0.0) continue;  // outside the cutoff support
        double ak = std::fabs(q.actions[0] * k[0] + q.actions[1] * k[1]);
        CHECK(ak <= std::pow(na, p.delta) * nk * (1 + 1e-12));
        CHECK(nk <= std::pow(na, p.mu) * (1 + 1e-12));
      }
    }
  }
}

TEST_CASE("solve_cohomological: pure inverse regime hand value") {
  auto p = params08();
  SymbolFunction f(2, 1, false);
  f.set_coeff(Mode{1, 0}, sym::ex_const(1.0));  // e^{i phi_1}
  auto g = coho::solve_cohomological(f, p);
  // at a = (1e6, 0): chi_uv = 1 (1e6^{0.08} = 3.02 > 2), chi_res = 0
  // (a.k = 1e6 > (1e6)^{0.75}), so g = i (1/a_1) e^{i phi_1}
  auto q = sym::make_point({1e6, 0.0}, {0.4, 0.0});
  Cx expect = Cx{0.0, 1e-6} * Cx{std::cos(0.4), std::sin(0.4)};
  CHECK(std::abs(g.evaluate_cx(q) - expect) <= 1e-18);
}

TEST_CASE("solve_cohomological: vanishes on the resonant support") {
  auto p = params08();
  SymbolFunction f(2, 1, false);
  f.set_coeff(Mode{0, 1}, sym::ex_pow(sym::ex_jac(), 0.5));
  auto g = coho::solve_cohomological(f, p);
  // deep resonance a.k = 0: the (1 - chi) factor vanishes identically
  auto q = sym::make_point({5e5, 0.0}, {1.1, 0.2});
  CHECK(std::abs(g.evaluate_cx(q)) == 0.0);
}

TEST_CASE("cohomological identity {h0; g} = f_nr") {
  auto p = params08();
  auto h0 = SymbolFunction::h0(2);
  std::mt19937_64 rng(11);
  probes::SymbolSpec spec;
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    auto f = probes::random_symbol(rng, spec);
    auto sp = coho::split(f, p);
    auto g = coho::solve_cohomological(f, p);
    CHECK(g.is_real());
    auto lhs = sym::poisson_bracket_or_throw(h0, g, g.kmax());
    for (const auto& q :
         probes::random_shell_points(rng, 1000, 2, 1e3, 1e7)) {
      double l = lhs.evaluate(q);
      double r = sp.nonresonant.evaluate(q);
      worst = std::max(worst, std::fabs(l - r) / (1.0 + std::fabs(r)));
    }
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("cohomological solution drops the order by delta") {
  auto p = params08();
  // f with coefficient <a> on a single ||k|| = 1 mode: order 1
  SymbolFunction f(2, 1, true);
  f.set_real_pair(Mode{1, 0}, sym::ex_mul(sym::ex_const(0.5), sym::ex_jac()));
  auto g = coho::solve_cohomological(f, p);
  std::vector<double> radii;
  for (int i = 0; i < 6; ++i) radii.push_back(std::pow(2.0, 40 + 2 * i));
  sym::FitOptions fo;
  fo.directions = 16;
  fo.angle_samples = 6;
  double of = sym::fit_order(f, radii, fo);
  double og = sym::fit_order(g, radii, fo);
  CHECK(of == doctest::Approx(1.0).epsilon(0.05));
  CHECK(og <= of - p.delta + 0.1);
}

TEST_CASE("normal_form_step: zero remainder is a fixed point") {
  auto p = params08();
  coho::NormalFormOptions opts;
  opts.measure_orders = false;
  auto z = SymbolFunction::zero(2);
  auto r = SymbolFunction::zero(2);
  auto step = coho::normal_form_step(z, r, p, opts, 0);
  CHECK(step.z_next.empty());
  CHECK(step.r_next.empty());
  CHECK(step.generator.empty());
}

TEST_CASE("normal_form_step: EM ledger entries") {
  auto p = params08();
  auto sys = dyn::em_system(dyn::em_plane_wave(2), 32);
  coho::NormalFormOptions opts;
  opts.beta = 1.0;
  opts.measure_orders = false;
  auto step = coho::normal_form_step(SymbolFunction::zero(2),
                                     sys.perturbation, p, opts, 0);
  // sigma = min(2 delta - beta, delta) = 0.5
  CHECK(step.entry.sigma == doctest::Approx(0.5));
  CHECK(step.entry.s2 == doctest::Approx(0.5));
  CHECK(step.entry.s4 == doctest::Approx(0.75));
  CHECK(step.entry.s1 == doctest::Approx(3 * 0.75 - 2.0));
  CHECK(step.entry.m_class == doctest::Approx(1.0));
  CHECK(step.entry.e2 == doctest::Approx(0.5));
  CHECK(step.entry.e4 == doctest::Approx(0.25));
  CHECK_FALSE(step.entry.truncated);
  CHECK(step.generator.mode_count() == 4);  // +-(1,0), +-(2,0)
}

TEST_CASE("normal_form: trivial perturbation") {
  auto p = params08();
  coho::NormalFormOptions opts;
  opts.measure_orders = false;
  auto nf = coho::normal_form(SymbolFunction::zero(2), p, opts);
  CHECK(nf.steps == 0);
  CHECK(nf.z.empty());
  CHECK(nf.r.empty());
  CHECK(nf.generators.empty());
}

TEST_CASE("normal_form: generator count equals steps; budget flag works") {
  auto p = params08();
  auto sys = dyn::em_system(dyn::em_plane_wave(2), 32);
  coho::NormalFormOptions opts;
  opts.beta = 1.0;
  opts.max_steps = 2;
  opts.measure_orders = false;
  auto nf = coho::normal_form(sys.perturbation, p, opts);
  CHECK(nf.steps == 2);
  CHECK(nf.generators.size() == 2);
  CHECK(nf.ledger.size() == 2);
  CHECK_FALSE(nf.budget_exhausted);

  // a tiny k_max budget forces truncation reporting
  coho::NormalFormOptions tight = opts;
  tight.kmax_budget = 2;
  auto nf2 = coho::normal_form(sys.perturbation, p, tight);
  CHECK(nf2.budget_exhausted);
  CHECK(nf2.steps >= 1);
}

TEST_CASE("normal_form rejects bad parameters") {
  auto p = params08();
  coho::NormalFormOptions opts;
  opts.beta = 2.5;
  CHECK_THROWS(coho::normal_form(SymbolFunction::zero(2), p, opts));
  opts.beta = 1.6;  // needs delta > 0.8
  CHECK_THROWS(coho::normal_form(SymbolFunction::zero(2), p, opts));
}

TEST_CASE("smoothing part flattens with the coefficient decay") {
  // shell modes with steeply decaying coefficients; the UV transition sweeps
  // across the fit window, so the measured slope must collapse well below
  // the symbol order m = 1; faster coefficient decay gives flatter slopes
  auto p = params08();
  const double r_fit = 1e6;
  std::vector<double> radii;
  for (int i = 0; i <= 6; ++i)
    radii.push_back(r_fit * std::pow(100.0, i / 6.0));
  sym::FitOptions fo;
  fo.directions = 24;
  fo.angle_samples = 6;
  auto shell_symbol = [&](double n2) {
    SymbolFunction f(2, 4, true);
    for (const auto& k : lat::enumerate_ball(2, 3.3)) {
      double nk = std::sqrt(double(k[0] * k[0] + k[1] * k[1]));
      if (nk < 2.0) continue;
      Mode m{k[0], k[1]};
      f.set_real_pair(
          m, sym::ex_mul(sym::ex_const(0.5 * std::pow(nk, -n2)), sym::ex_jac()));
    }
    return f;
  };
  double prev = 1.0;
  for (double n2 : {20.0, 40.0, 60.0}) {
    auto f = shell_symbol(n2);
    auto sp = coho::split(f, p);
    double slope = sym::fit_order(sp.smoothing, radii, fo);
    CHECK(slope < prev - 0.5);  // decreasing roughly linearly in n2
    prev = slope;
  }
}

TEST_CASE("bracket order gain for cutoff-graded symbols") {
  // f, g built from the small-divisor quotient d_k (class -delta in a);
  // the bracket loses another delta: fit({f,g}) <= m1 + m2 - delta + 0.1
  auto p = params08();
  sym::SymbolFunction f(2, 1, false);
  f.set_coeff(Mode{1, 0},
              sym::ex_mul(sym::ex_pow(sym::ex_jac(), 1.75),
                          cut::d_k_expr(std::vector<int>{1, 0}, p)));
  sym::SymbolFunction g(2, 1, false);
  g.set_coeff(Mode{0, 1},
              sym::ex_mul(sym::ex_pow(sym::ex_jac(), 0.75),
                          cut::d_k_expr(std::vector<int>{0, 1}, p)));
  std::vector<double> radii;
  for (int i = 0; i < 6; ++i) radii.push_back(std::pow(2.0, 40 + 2 * i));
  sym::FitOptions fo;
  fo.directions = 24;
  fo.angle_samples = 6;
  fo.focus_modes = std::vector<Mode>{{1, 0}, {0, 1}};
  double m1 = sym::fit_order(f, radii, fo);
  double m2 = sym::fit_order(g, radii, fo);
  CHECK(m1 == doctest::Approx(1.0).epsilon(0.05));
  CHECK(m2 == doctest::Approx(0.0).epsilon(0.05));
  auto br = sym::poisson_bracket_or_throw(f, g, 2);
  double mb = sym::fit_order(br, radii, fo);
  CHECK(mb <= m1 + m2 - p.delta + 0.1);
}

TEST_CASE("normal_form stops at the target order") {
  auto p = params08();
  auto sys = dyn::em_system(dyn::em_plane_wave(2), 32);
  coho::NormalFormOptions opts;
  opts.beta = 1.0;
  opts.max_steps = 3;
  opts.target_order = 0.3;  // the first step already reaches order ~ 0
  for (int i = 0; i < 5; ++i) opts.fit_radii.push_back(std::pow(2.0, 40 + 3 * i));
  opts.fit.directions = 12;
  opts.fit.angle_samples = 6;
  auto nf = coho::normal_form(sys.perturbation, p, opts);
  CHECK(nf.steps == 1);
  CHECK(nf.ledger.back().fitted_out <= 0.3);
}
