#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "nek/errors.hpp"
#include "nek/lattice.hpp"

using namespace nek::lat;

TEST_CASE("hermite normal form: canonical and idempotent") {
  IntMat m{{2, 4}, {1, 1}};
  auto h = hermite_normal_form(m);
  REQUIRE(h.size() == 2);
  CHECK(h[0][0] > 0);
  CHECK(hermite_normal_form(h) == h);
  // two generating sets of the same lattice agree
  IntMat m2{{1, 1}, {2, 4}, {3, 5}};
  auto h2 = hermite_normal_form(m2);
  CHECK(h2 == h);
}

TEST_CASE("saturation divides content: {(2,0)} -> {(1,0)}") {
  auto m = saturate({{2, 0}}, 2);
  CHECK(m.rank() == 1);
  REQUIRE(m.basis().size() == 1);
  CHECK(m.basis()[0] == IntVec{1, 0});
}

TEST_CASE("saturation of a full-rank sublattice is the full lattice") {
  auto m = saturate({{1, 1}, {1, -1}}, 2);  // determinant 2
  CHECK(m.rank() == 2);
  CHECK(m.basis()[0] == IntVec{1, 0});
  CHECK(m.basis()[1] == IntVec{0, 1});
}

TEST_CASE("saturate is idempotent") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> ui(-6, 6);
  for (int trial = 0; trial < 200; ++trial) {
    int d = 2 + static_cast<int>(trial % 2);
    std::vector<std::vector<int>> vs;
    for (int i = 0; i < 2; ++i) {
      std::vector<int> v(d);
      for (auto& x : v) x = ui(rng);
      vs.push_back(std::move(v));
    }
    bool allzero = true;
    for (const auto& v : vs)
      for (int x : v) allzero = allzero && x == 0;
    if (allzero) continue;
    auto m = saturate(vs, d);
    std::vector<std::vector<int>> basis_int;
    for (const auto& row : m.basis())
      basis_int.emplace_back(row.begin(), row.end());
    auto m2 = saturate(basis_int, d);
    CHECK(m.key() == m2.key());
  }
}

TEST_CASE("saturation correctness: box-scan oracle") {
  // every integer point of the real span inside a box belongs to the module
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> ui(-4, 4);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<int> v{ui(rng), ui(rng)};
    if (v[0] == 0 && v[1] == 0) v[0] = 1;
    auto m = saturate({v}, 2);
    for (int x = -12; x <= 12; ++x)
      for (int y = -12; y <= 12; ++y) {
        if (x == 0 && y == 0) continue;
        // does (x, y) lie on the real line through v?
        bool on_line = x * v[1] == y * v[0];
        std::vector<int> k{x, y};
        CHECK(m.contains(k) == on_line);
      }
  }
}

TEST_CASE("saturation correctness in dimension 3") {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> ui(-3, 3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<int>> vs{{ui(rng), ui(rng), ui(rng)},
                                     {ui(rng), ui(rng), ui(rng)}};
    bool allzero = true;
    for (const auto& v : vs)
      for (int x : v) allzero = allzero && x == 0;
    if (allzero) continue;
    auto m = saturate(vs, 3);
    // oracle: a point is in the saturation iff its projection residual
    // vanishes (real span membership) -- scan a box
    for (int x = -4; x <= 4; ++x)
      for (int y = -4; y <= 4; ++y)
        for (int z = -4; z <= 4; ++z) {
          std::vector<double> w{double(x), double(y), double(z)};
          auto pr = m.project(w);
          double res = 0.0;
          for (int j = 0; j < 3; ++j)
            res += (w[j] - pr[j]) * (w[j] - pr[j]);
          bool in_span = std::sqrt(res) < 1e-9;
          std::vector<int> k{x, y, z};
          CHECK(m.contains(k) == in_span);
        }
  }
}

TEST_CASE("projection: full lattice, axis module, orthogonality") {
  auto full = saturate({{1, 0}, {0, 1}}, 2);
  std::vector<double> a{3.0, 4.0};
  auto pa = full.project(a);
  CHECK(pa[0] == doctest::Approx(3.0));
  CHECK(pa[1] == doctest::Approx(4.0));

  auto axis = saturate({{1, 0}}, 2);
  auto pb = axis.project(a);
  CHECK(pb[0] == doctest::Approx(3.0));
  CHECK(pb[1] == doctest::Approx(0.0).epsilon(1e-12));

  // residual orthogonal to the basis
  auto skew = saturate({{2, 1}}, 2);
  auto pc = skew.project(a);
  double ip = (a[0] - pc[0]) * 2 + (a[1] - pc[1]) * 1;
  CHECK(std::fabs(ip) < 1e-12);
  // idempotence
  auto pc2 = skew.project(pc);
  CHECK(pc2[0] == doctest::Approx(pc[0]));
  CHECK(pc2[1] == doctest::Approx(pc[1]));
}

TEST_CASE("enumerate_ball") {
  CHECK(enumerate_ball(2, 0.5).empty());
  auto ks = enumerate_ball(2, 1.5);
  // one representative per +-pair: (0,1), (1,-1), (1,0), (1,1)
  REQUIRE(ks.size() == 4);
  std::set<std::vector<int>> got(ks.begin(), ks.end());
  CHECK(got.count({0, 1}));
  CHECK(got.count({1, 0}));
  CHECK(got.count({1, 1}));
  CHECK(got.count({1, -1}));
  // lexicographic order
  CHECK(std::is_sorted(ks.begin(), ks.end()));
  // brute-force count cross-check at a bigger radius
  auto big = enumerate_ball(2, 7.3);
  long brute = 0;
  for (int x = -8; x <= 8; ++x)
    for (int y = -8; y <= 8; ++y) {
      if (x == 0 && y == 0) continue;
      if (x * x + y * y <= 7.3 * 7.3) ++brute;
    }
  CHECK(static_cast<long>(big.size()) * 2 == brute);
  CHECK_THROWS(enumerate_ball(2, 100.0));  // beyond the desk-scale ceiling
}

TEST_CASE("giorgilli bound: hand cases") {
  // s = 1: u = (1,0), w = (alpha, 0), bound = alpha with equality
  auto r = giorgilli_bound({{1.0, 0.0}}, std::vector<double>{0.3, 0.0}, 0.3,
                           1.0);
  CHECK(r.holds);
  CHECK(r.bound == doctest::Approx(0.3));
  // s = 2 orthonormal, both inner products = alpha: ||w|| = alpha sqrt(2)
  auto r2 = giorgilli_bound({{1.0, 0.0}, {0.0, 1.0}},
                            std::vector<double>{0.4, 0.4}, 0.4, 1.0);
  CHECK(r2.holds);
  CHECK(r2.w_norm == doctest::Approx(0.4 * std::sqrt(2.0)));
  CHECK(r2.bound == doctest::Approx(2 * 0.4));
}

TEST_CASE("giorgilli bound: error paths") {
  CHECK_THROWS(giorgilli_bound({{1.0, 0.0}, {2.0, 0.0}},
                               std::vector<double>{1.0, 0.0}, 10.0, 3.0));
  // w outside the span
  CHECK_THROWS(giorgilli_bound({{1.0, 0.0, 0.0}},
                               std::vector<double>{1.0, 1.0, 0.0}, 10.0, 2.0));
}

TEST_CASE("giorgilli bound: randomized verification") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> uc(-5.0, 5.0);
  std::uniform_int_distribution<int> ud(1, 4);
  int done = 0;
  while (done < 10000) {
    int d = ud(rng);
    std::uniform_int_distribution<int> us(1, d);
    int s = us(rng);
    std::vector<std::vector<double>> us_vecs;
    for (int i = 0; i < s; ++i) {
      std::vector<double> u(d);
      for (auto& x : u) x = uc(rng);
      us_vecs.push_back(std::move(u));
    }
    double nbound = 0.0;
    for (const auto& u : us_vecs) {
      double n = 0.0;
      for (double x : u) n += x * x;
      nbound = std::max(nbound, std::sqrt(n));
    }
    std::vector<double> w(d, 0.0);
    for (const auto& u : us_vecs) {
      double c = uc(rng);
      for (int j = 0; j < d; ++j) w[j] += c * u[j];
    }
    double alpha = 0.0;
    for (const auto& u : us_vecs) {
      double ip = 0.0;
      for (int j = 0; j < d; ++j) ip += u[j] * w[j];
      alpha = std::max(alpha, std::fabs(ip));
    }
    if (alpha == 0.0 || nbound == 0.0) continue;
    GiorgilliResult res;
    try {
      res = giorgilli_bound(us_vecs, w, alpha, nbound);
    } catch (const nek::ConfigError&) {
      continue;  // dependent draw
    }
    CHECK(res.holds);
    ++done;
  }
}

TEST_CASE("module equality via canonical keys") {
  auto m1 = saturate({{2, 4}}, 2);
  auto m2 = saturate({{1, 2}}, 2);
  auto m3 = saturate({{-3, -6}}, 2);
  CHECK(m1 == m2);
  CHECK(m2 == m3);
  auto m4 = saturate({{1, 3}}, 2);
  CHECK(!(m1 == m4));
}

TEST_CASE("saturate rejects empty and zero input") {
  CHECK_THROWS(saturate({}, 2));
  CHECK_THROWS(saturate({{0, 0}}, 2));
}
