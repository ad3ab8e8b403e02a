#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "nek/bump.hpp"
#include "nek/expr.hpp"

using namespace nek::sym;

namespace {

EvalPoint at(const std::vector<double>& a, double t = 0.0) {
  return EvalPoint{std::span<const double>(a), t};
}

}  // namespace

TEST_CASE("constant folding and identities") {
  auto two = ex_add(ex_const(1.0), ex_const(1.0));
  CHECK(two->is_const());
  CHECK(two->cval == Cx{2.0, 0.0});
  auto x = ex_action(0);
  CHECK(ex_mul(ex_const(0.0), x)->is_zero());
  CHECK(ex_mul(ex_const(1.0), x).get() == x.get());
  CHECK(ex_add(ex_const(0.0), x).get() == x.get());
  CHECK(ex_pow(x, 1.0).get() == x.get());
  CHECK(ex_pow(x, 0.0)->is_one());
}

TEST_CASE("evaluation of primitives") {
  std::vector<double> a{3.0, 4.0};
  CHECK(evaluate(ex_norm(), at(a)).real() == doctest::Approx(5.0));
  CHECK(evaluate(ex_jac(), at(a)).real() == doctest::Approx(std::sqrt(26.0)));
  CHECK(evaluate(ex_action(1), at(a)).real() == 4.0);
  CHECK(evaluate(ex_time(), at(a, 2.5)).real() == 2.5);
  auto e = ex_exp(ex_mul(ex_const(Cx{0.0, 1.0}), ex_time()));
  auto v = evaluate(e, at(a, std::numbers::pi / 2));
  CHECK(v.real() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(v.imag() == doctest::Approx(1.0));
}

TEST_CASE("absorbing zero multiplication masks singular factors") {
  // (1 - bump(u)) * u^-1 at u = 0 must be exactly 0, not NaN
  auto u = ex_action(0);
  auto expr = ex_mul(ex_sub(ex_const(1.0), ex_bump(u)), ex_pow(u, -1.0));
  std::vector<double> zero{0.0, 0.0};
  CHECK(evaluate(expr, at(zero)) == Cx{0.0, 0.0});
  std::vector<double> inside{0.3, 0.0};  // bump == 1, factor exactly 0
  CHECK(evaluate(expr, at(inside)) == Cx{0.0, 0.0});
  std::vector<double> outside{2.0, 0.0};  // pure 1/u regime
  CHECK(evaluate(expr, at(outside)).real() == doctest::Approx(0.5));
}

TEST_CASE("derivatives: forward rules against finite differences") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ua(0.3, 3.0);
  // f = a1^2 * <a>^-1.5 * exp(i t) + norm
  auto f = ex_add(
      ex_mul({ex_pow(ex_action(0), 2.0), ex_pow(ex_jac(), -1.5),
              ex_exp(ex_mul(ex_const(Cx{0.0, 1.0}), ex_time()))}),
      ex_norm());
  const double h = 1e-5;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a{ua(rng), ua(rng)};
    double t = ua(rng);
    for (int var : {0, 1, kTimeVar}) {
      auto d = derive(f, var);
      auto ap = a, am = a;
      double tp = t, tm = t;
      if (var == kTimeVar) {
        tp += h;
        tm -= h;
      } else {
        ap[var] += h;
        am[var] -= h;
      }
      Cx fd = (evaluate(f, at(ap, tp)) - evaluate(f, at(am, tm))) / (2.0 * h);
      Cx ex = evaluate(d, at(a, t));
      CHECK(std::abs(ex - fd) <= 1e-6 * (1.0 + std::abs(ex)));
    }
  }
}

TEST_CASE("second derivatives via iterated passes") {
  auto f = ex_pow(ex_jac(), 0.75);
  auto d11 = derive(derive(f, 0), 0);
  std::vector<double> a{1.2, -0.7};
  const double h = 1e-4;
  auto ap = a, am = a;
  ap[0] += h;
  am[0] -= h;
  double fd = (evaluate(f, at(ap)).real() - 2 * evaluate(f, at(a)).real() +
               evaluate(f, at(am)).real()) /
              (h * h);
  CHECK(evaluate(d11, at(a)).real() == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("bump derivative nodes chain correctly") {
  auto f = ex_bump(ex_mul(ex_const(0.2), ex_action(0)));
  auto d = derive(f, 0);
  std::vector<double> a{3.5, 0.0};  // 0.2 * 3.5 = 0.7 inside the layer
  double expect = nek::cut::bump_derivative(1, 0.7) * 0.2;
  CHECK(evaluate(d, at(a)).real() == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("conjugation") {
  auto f = ex_mul(ex_const(Cx{1.0, 2.0}),
                  ex_exp(ex_mul(ex_const(Cx{0.0, 3.0}), ex_time())));
  auto fc = conjugate(f);
  std::vector<double> a{1.0};
  auto v = evaluate(f, at(a, 0.37));
  auto vc = evaluate(fc, at(a, 0.37));
  CHECK(vc.real() == doctest::Approx(v.real()));
  CHECK(vc.imag() == doctest::Approx(-v.imag()));
}

TEST_CASE("prefix round trip") {
  auto f = ex_add(
      ex_mul({ex_const(Cx{0.0, -0.5}), ex_action(0),
              ex_exp(ex_mul(ex_const(Cx{0.0, -1.0}), ex_time()))}),
      ex_mul(ex_bump(ex_mul(ex_action(1), ex_pow(ex_norm(), -0.75))),
             ex_pow(ex_jac(), 2.0)));
  std::string text = to_prefix(f);
  auto g = parse_prefix(text, 2);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ua(0.5, 4.0);
  for (int i = 0; i < 20; ++i) {
    std::vector<double> a{ua(rng), ua(rng)};
    double t = ua(rng);
    CHECK(std::abs(evaluate(f, at(a, t)) - evaluate(g, at(a, t))) < 1e-14);
  }
}

TEST_CASE("parser rejects malformed input") {
  CHECK_THROWS(parse_prefix("(+ a1", 2));
  CHECK_THROWS(parse_prefix("a3", 2));
  CHECK_THROWS(parse_prefix("(frob a1)", 2));
  CHECK_THROWS(parse_prefix("(^ a1 a2)", 2));
  CHECK_THROWS(parse_prefix("", 2));
}

TEST_CASE("tape agrees with the recursive evaluator") {
  auto f = ex_add(
      ex_mul({ex_sub(ex_const(1.0),
                     ex_bump(ex_mul(ex_action(0), ex_pow(ex_norm(), -0.75)))),
              ex_pow(ex_action(0), -1.0), ex_pow(ex_jac(), 1.25)}),
      ex_exp(ex_mul(ex_const(Cx{0.0, 2.0}), ex_time())));
  Tape tape;
  int slot = tape.add_root(f);
  std::vector<Cx> regs;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ua(-5.0, 5.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> a{ua(rng), ua(rng)};
    double t = ua(rng);
    tape.run(a, t, regs);
    Cx ref = evaluate(f, at(a, t));
    CHECK(std::abs(regs[slot] - ref) <= 1e-13 * (1.0 + std::abs(ref)));
  }
}

TEST_CASE("depends_on_actions") {
  CHECK(depends_on_actions(ex_action(0)));
  CHECK(depends_on_actions(ex_norm()));
  CHECK(depends_on_actions(ex_mul(ex_const(2.0), ex_jac())));
  CHECK_FALSE(depends_on_actions(ex_exp(ex_time())));
  CHECK_FALSE(depends_on_actions(ex_const(3.0)));
}
