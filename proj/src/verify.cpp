#include "nek/verify.hpp"

#include <cmath>
#include <random>

#include "nek/cohomology.hpp"
#include "nek/harness.hpp"
#include "nek/lie.hpp"
#include "nek/probes.hpp"

namespace nek::run {

using sym::Cx;
using sym::PhasePoint;
using sym::SymbolFunction;

namespace {

double norm_of(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return std::sqrt(s);
}

CheckResult splitting_partition(const cfg::RunConfig& cfg) {
  std::mt19937_64 rng(cfg::derive_seed(cfg.seed, 1));
  // coefficients kept gentle so symbol values stay O(10^2) and the absolute
  // 1e-12 tolerance is meaningful
  probes::SymbolSpec spec;
  spec.d = 2;
  spec.max_poly_degree = 1;
  spec.jac_exponent_hi = 0.5;
  double worst = 0.0;
  for (int i = 0; i < 6; ++i) {
    auto f = probes::random_symbol(rng, spec);
    auto sp = coho::split(f, cfg.cutoffs);
    for (const auto& p : probes::random_points(rng, 400, 2, -20.0, 20.0)) {
      if (norm_of(p.actions) < 1e-6) continue;
      Cx whole = f.evaluate_cx(p);
      Cx parts = sp.nonresonant.evaluate_cx(p) + sp.resonant.evaluate_cx(p) +
                 sp.smoothing.evaluate_cx(p);
      worst = std::max(worst, std::abs(whole - parts));
    }
  }
  return {"splitting_partition", worst <= 1e-12, worst, 1e-12, ""};
}

CheckResult cohomology_identity(const cfg::RunConfig& cfg) {
  std::mt19937_64 rng(cfg::derive_seed(cfg.seed, 2));
  probes::SymbolSpec spec;
  spec.d = 2;
  auto h0 = SymbolFunction::h0(2);
  double worst = 0.0;
  for (int i = 0; i < 4; ++i) {
    auto f = probes::random_symbol(rng, spec);
    auto sp = coho::split(f, cfg.cutoffs);
    auto g = coho::solve_cohomological(f, cfg.cutoffs);
    auto lhs = sym::poisson_bracket_or_throw(h0, g, g.kmax());
    for (const auto& p : probes::random_shell_points(
             rng, 500, 2, cfg.zone.radius, 100.0 * cfg.zone.radius)) {
      double l = lhs.evaluate(p);
      double r = sp.nonresonant.evaluate(p);
      worst = std::max(worst, std::fabs(l - r) / (1.0 + std::fabs(r)));
    }
  }
  return {"cohomology_identity", worst <= 1e-10, worst, 1e-10, ""};
}

CheckResult lie_canonicity(const cfg::RunConfig& cfg) {
  std::mt19937_64 rng(cfg::derive_seed(cfg.seed, 3));
  auto em = dyn::em_system(dyn::em_plane_wave(2), cfg.symbols.kmax_budget);
  auto g = coho::solve_cohomological(em.perturbation, cfg.cutoffs);
  lie::GeneratorFlow flow(g);
  lie::FlowOptions fo;
  fo.tol = 1e-10;
  auto map = lie::flow_phase_map(flow, fo);
  std::vector<std::vector<double>> pts;
  for (const auto& p : probes::random_shell_points(rng, 4, 2, 8.0, 64.0)) {
    std::vector<double> z(4);
    for (int j = 0; j < 2; ++j) {
      z[j] = p.actions[j];
      z[2 + j] = p.angles[j];
    }
    pts.push_back(std::move(z));
  }
  double defect = lie::symplectic_defect(map, 2, pts, 0.4, 1e-5);
  return {"lie_canonicity", defect <= 1e-8, defect, 1e-8, ""};
}

CheckResult full_rank_empty(const cfg::RunConfig& cfg) {
  std::mt19937_64 rng(cfg::derive_seed(cfg.seed, 4));
  geo::ZoneGeometry geom(cfg.zone);
  const auto& p = geom.params();
  long hits = 0;
  const int trials = 10000;
  auto full = lat::saturate({{1, 0}, {0, 1}}, 2);
  for (const auto& pt : probes::random_shell_points(rng, trials, 2, p.radius,
                                                    100.0 * p.radius))
    if (geom.in_zone(pt.actions, full, 2).has_value()) ++hits;
  return {"full_rank_zone_empty", hits == 0, static_cast<double>(hits), 0.0,
          std::to_string(trials) + " trials"};
}

CheckResult giorgilli(const cfg::RunConfig& cfg) {
  std::mt19937_64 rng(cfg::derive_seed(cfg.seed, 5));
  std::uniform_int_distribution<int> ud(1, 4);
  std::uniform_real_distribution<double> uc(-5.0, 5.0);
  long violations = 0;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    int d = ud(rng);
    std::uniform_int_distribution<int> us(1, d);
    int s = us(rng);
    std::vector<std::vector<double>> us_vecs;
    double nbound = 0.0;
    for (int i = 0; i < s; ++i) {
      std::vector<double> u(d);
      for (auto& x : u) x = uc(rng);
      us_vecs.push_back(std::move(u));
    }
    // skip degenerate draws
    std::vector<std::vector<double>> copy = us_vecs;
    bool dep = false;
    {
      int rank = 0;
      const int rows = s, cols = d;
      for (int c = 0; c < cols && rank < rows; ++c) {
        int piv = -1;
        double best = 1e-7;
        for (int i = rank; i < rows; ++i)
          if (std::fabs(copy[i][c]) > best) {
            best = std::fabs(copy[i][c]);
            piv = i;
          }
        if (piv < 0) continue;
        std::swap(copy[piv], copy[rank]);
        for (int i = rank + 1; i < rows; ++i) {
          double f = copy[i][c] / copy[rank][c];
          for (int j = c; j < cols; ++j) copy[i][j] -= f * copy[rank][j];
        }
        ++rank;
      }
      dep = rank < s;
    }
    if (dep) continue;
    for (const auto& u : us_vecs) nbound = std::max(nbound, norm_of(u));
    // random w in the span
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
    if (alpha == 0.0) continue;
    auto res = lat::giorgilli_bound(us_vecs, w, alpha, nbound);
    if (!res.holds) ++violations;
  }
  return {"giorgilli_inequality", violations == 0,
          static_cast<double>(violations), 0.0,
          std::to_string(trials) + " trials"};
}

CheckResult classify_uniqueness(const cfg::RunConfig& cfg) {
  std::mt19937_64 rng(cfg::derive_seed(cfg.seed, 6));
  geo::ZoneGeometry geom(cfg.zone);
  const auto& p = geom.params();
  long unique = 0, none = 0, multi = 0, boundary = 0;
  const int trials = 1000;
  for (const auto& pt : probes::random_shell_points(rng, trials, p.d, p.radius,
                                                    100.0 * p.radius)) {
    auto res = geom.classify(pt.actions);
    switch (res.status) {
      case geo::ClassifyStatus::Ok:
        ++unique;
        break;
      case geo::ClassifyStatus::Boundary:
        ++boundary;
        break;
      case geo::ClassifyStatus::Ambiguous:
        ++multi;
        break;
      case geo::ClassifyStatus::Unclassified:
        ++none;
        break;
    }
  }
  double rate =
      static_cast<double>(unique) / std::max<long>(1, trials - boundary);
  bool pass = none == 0 && rate >= 0.999;
  return {"classify_uniqueness", pass, rate, 0.999,
          "none=" + std::to_string(none) + " multi=" + std::to_string(multi) +
              " boundary=" + std::to_string(boundary)};
}

CheckResult envelope_identity(const cfg::RunConfig& cfg) {
  std::mt19937_64 rng(cfg::derive_seed(cfg.seed, 7));
  std::uniform_real_distribution<double> ur(0.1, 10.0);
  std::uniform_real_distribution<double> un(1.0, 8.0);
  std::uniform_real_distribution<double> ut(-6.0, 6.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    Envelope env{ur(rng), un(rng), ur(rng)};
    double t = std::pow(10.0, ut(rng));
    double lhs = env.eval(t);
    double rhs = env.eval_scaled(t);
    worst = std::max(worst, std::fabs(lhs - rhs) / std::max(1.0, lhs));
  }
  return {"envelope_identity", worst <= 1e-12, worst, 1e-12, ""};
}

}  // namespace

std::vector<CheckResult> verify_suite(const cfg::RunConfig& config) {
  std::vector<CheckResult> out;
  out.push_back(splitting_partition(config));
  out.push_back(cohomology_identity(config));
  out.push_back(lie_canonicity(config));
  out.push_back(full_rank_empty(config));
  out.push_back(giorgilli(config));
  out.push_back(classify_uniqueness(config));
  out.push_back(envelope_identity(config));
  return out;
}

}  // namespace nek::run
