#include "nek/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <thread>

#include "nek/errors.hpp"

namespace nek::geo {

namespace {

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

double dot(std::span<const double> a, std::span<const int> k) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * k[i];
  return s;
}

// rank of a small set of double vectors
int rank_of(const std::vector<std::vector<double>>& vs) {
  std::vector<std::vector<double>> m = vs;
  int rank = 0;
  const int rows = static_cast<int>(m.size());
  if (rows == 0) return 0;
  const int cols = static_cast<int>(m[0].size());
  for (int c = 0; c < cols && rank < rows; ++c) {
    int piv = -1;
    double best = 1e-9;
    for (int i = rank; i < rows; ++i)
      if (std::fabs(m[i][c]) > best) {
        best = std::fabs(m[i][c]);
        piv = i;
      }
    if (piv < 0) continue;
    std::swap(m[piv], m[rank]);
    for (int i = rank + 1; i < rows; ++i) {
      double f = m[i][c] / m[rank][c];
      for (int j = c; j < cols; ++j) m[i][j] -= f * m[rank][j];
    }
    ++rank;
  }
  return rank;
}

bool independent_with(const std::vector<std::vector<int>>& chosen,
                      std::span<const int> k) {
  std::vector<std::vector<double>> vs;
  for (const auto& v : chosen) vs.emplace_back(v.begin(), v.end());
  vs.emplace_back(k.begin(), k.end());
  return rank_of(vs) == static_cast<int>(vs.size());
}

}  // namespace

ZoneParams ZoneParams::defaults(int d) {
  ZoneParams p;
  p.d = d;
  p.validate();
  return p;
}

double ZoneParams::delta_s(int s) const {
  if (s < 0 || s > d) throw ConfigError("delta_s: level out of range");
  return delta + 0.5 * s * (s - 1) * mu;
}

double ZoneParams::full_rank_margin(double r) const {
  return d * std::pow(ds.back(), d) * cs.back() *
         std::pow(r, delta_s(d) + mu * d - 1.0);
}

bool ZoneParams::full_rank_radius_ok() const {
  return full_rank_margin(radius) < 1.0;
}

void ZoneParams::validate() {
  if (d < 1 || d > 4)
    throw ConfigError("zone params: dimension must be in 1..4");
  if (!(delta > 2.0 / 3.0))
    throw ConfigError("delta must exceed 2/3 (got " + std::to_string(delta) +
                      ")");
  if (!(delta < 1.0)) throw ConfigError("delta must be below 1");
  if (!(mu > 0.0)) throw ConfigError("mu must be positive");
  if (!(0.5 * d * (d + 1) * mu < 1.0 - delta))
    throw ConfigError("mu too large: need d(d+1)/2 * mu < 1 - delta");
  if (cs.empty())
    for (int j = 0; j < d; ++j) cs.push_back(std::pow(4.0, j));
  if (ds.empty())
    for (int j = 0; j < d; ++j) ds.push_back(std::pow(2.0, j));
  if (static_cast<int>(cs.size()) != d || static_cast<int>(ds.size()) != d)
    throw ConfigError("zone params: need d level constants C and D");
  if (cs[0] != 1.0 || ds[0] != 1.0)
    throw ConfigError("zone params: C_1 and D_1 must equal 1");
  for (int j = 1; j < d; ++j)
    if (!(cs[j] > cs[j - 1]) || !(ds[j] > ds[j - 1]))
      throw ConfigError("zone params: C and D must be strictly increasing");
  if (!(plane_step_div > 0) || !(plane_radius_factor > 0))
    throw ConfigError("zone params: plane search factors must be positive");
  if (!(boundary_eps >= 0))
    throw ConfigError("zone params: boundary_eps must be >= 0");
  if (radius == 0.0) {
    double r = 2.0;
    while (full_rank_margin(r) >= 1.0) {
      r *= 2.0;
      if (r > 1e300) throw ConfigError("zone params: calibration diverged");
    }
    radius = r;
  } else if (radius < 0.0) {
    throw ConfigError("zone params: negative radius");
  }
}

ZoneGeometry::ZoneGeometry(ZoneParams p) : p_(std::move(p)) { p_.validate(); }

const std::vector<std::vector<int>>& ZoneGeometry::ball(double bound) const {
  long key = static_cast<long>(std::ceil(std::max(0.0, bound)));
  std::lock_guard<std::mutex> lock(ball_mutex_);
  auto it = ball_cache_.find(key);
  if (it == ball_cache_.end())
    it = ball_cache_.emplace(key, lat::enumerate_ball(p_.d, double(key))).first;
  return it->second;
}

std::vector<std::vector<int>> ZoneGeometry::enumerate_candidates(
    std::span<const double> a, int level, double slack) const {
  if (level < 1 || level > p_.d)
    throw ConfigError("enumerate_candidates: level out of range");
  const double bound =
      p_.ds[level - 1] * std::pow(norm(a), p_.mu) * (1.0 + slack);
  std::vector<std::vector<int>> out;
  for (const auto& k : ball(bound))
    if (knorm(k) <= bound) out.push_back(k);
  return out;
}

std::vector<std::vector<int>> ZoneGeometry::resonant_candidates(
    std::span<const double> a, int level, double slack) const {
  std::vector<std::vector<int>> out;
  const double bound =
      p_.ds[level - 1] * std::pow(norm(a), p_.mu) * (1.0 + slack);
  for (const auto& k : ball(bound))
    if (knorm(k) <= bound && level_resonant(a, k, level, slack))
      out.push_back(k);
  return out;
}

bool ZoneGeometry::has_rank_above(std::span<const double> a, int s,
                                  double slack) const {
  const int target = s + 1;
  if (target > p_.d) return false;
  if (norm(a) < p_.radius * (1.0 - slack)) return false;
  // per-level primitive resonant lists; levels nest so list j is a subset
  // of list j+1
  std::vector<std::vector<std::vector<int>>> lists(target);
  for (int j = 0; j < target; ++j) {
    auto raw = resonant_candidates(a, j + 1, slack);
    for (auto& k : raw) {
      int g = 0;
      for (int x : k) g = std::gcd(g, std::abs(x));
      if (g > 1)
        for (auto& x : k) x /= g;
      if (std::find(lists[j].begin(), lists[j].end(), k) == lists[j].end())
        lists[j].push_back(std::move(k));
    }
    if (lists[j].empty()) return false;  // level j+1 has no witness at all
  }
  // quick necessary condition: the pooled top-level list must have rank
  // at least target
  {
    std::vector<std::vector<double>> vs;
    for (const auto& k : lists[target - 1])
      vs.emplace_back(k.begin(), k.end());
    if (rank_of(vs) < target) return false;
  }
  std::vector<std::vector<int>> chosen;
  std::function<bool(int)> dfs = [&](int level) -> bool {
    if (level == target) return true;
    for (const auto& k : lists[level]) {
      if (!independent_with(chosen, k)) continue;
      chosen.push_back(k);
      if (dfs(level + 1)) return true;
      chosen.pop_back();
    }
    return false;
  };
  return dfs(0);
}

bool ZoneGeometry::level_resonant(std::span<const double> a,
                                  std::span<const int> k, int level,
                                  double slack) const {
  if (level < 1 || level > p_.d)
    throw ConfigError("level_resonant: level out of range");
  const double na = norm(a);
  const double nk = knorm(k);
  if (nk == 0.0) throw ConfigError("level_resonant: k must be nonzero");
  const double f = 1.0 + slack;
  return std::fabs(dot(a, k)) <=
             p_.cs[level - 1] * nk * std::pow(na, p_.delta_s(level)) * f &&
         nk <= p_.ds[level - 1] * std::pow(na, p_.mu) * f;
}

bool ZoneGeometry::in_zone0(std::span<const double> a, double slack) const {
  const double na = norm(a);
  if (na < p_.radius * (1.0 + slack)) return true;
  for (const auto& k : enumerate_candidates(a, 1, slack))
    if (level_resonant(a, k, 1, slack)) return false;
  return true;
}

std::optional<std::vector<std::vector<int>>> ZoneGeometry::in_zone(
    std::span<const double> a, const lat::LatticeModule& m, int s,
    double slack) const {
  if (s < 1 || s > p_.d) throw ConfigError("in_zone: rank out of range");
  if (m.rank() < s) return std::nullopt;
  if (norm(a) < p_.radius * (1.0 - slack)) return std::nullopt;
  auto cands = resonant_candidates(a, s, slack);
  std::vector<std::vector<int>> in_m;
  for (auto& k : cands)
    if (m.contains(k)) in_m.push_back(std::move(k));
  // level-ordered witness search with backtracking; level conditions nest,
  // so the j-th slot only needs vectors resonant at level j
  std::vector<std::vector<int>> chosen;
  std::function<bool(int)> search = [&](int level) -> bool {
    if (level > s) return true;
    for (const auto& k : in_m) {
      if (!level_resonant(a, k, level, slack)) continue;
      if (!independent_with(chosen, k)) continue;
      chosen.push_back(k);
      if (search(level + 1)) return true;
      chosen.pop_back();
    }
    return false;
  };
  if (!search(1)) return std::nullopt;
  return chosen;
}

std::vector<lat::LatticeModule> ZoneGeometry::candidate_modules(
    std::span<const double> a, int s, double slack) const {
  std::vector<lat::LatticeModule> out;
  if (s == 0) {
    out.push_back(lat::LatticeModule::trivial(p_.d));
    return out;
  }
  // only vectors resonant at the weakest (s-th) level can appear in a
  // witness tuple, which keeps the subset enumeration desk-scale
  auto cands = resonant_candidates(a, s, slack);
  // reduce to primitive representatives (saturation ignores content)
  {
    std::vector<std::vector<int>> prim;
    for (auto& k : cands) {
      int g = 0;
      for (int x : k) g = std::gcd(g, std::abs(x));
      if (g > 1)
        for (auto& x : k) x /= g;
      if (std::find(prim.begin(), prim.end(), k) == prim.end())
        prim.push_back(std::move(k));
    }
    cands = std::move(prim);
  }
  std::vector<std::string> seen;
  // all s-subsets of candidate vectors, pruned to stay independent
  std::function<void(int, int, std::vector<std::vector<int>>&)> rec =
      [&](int start, int level, std::vector<std::vector<int>>& picked) {
        if (level == s) {
          auto m = lat::saturate(picked, p_.d);
          if (std::find(seen.begin(), seen.end(), m.key()) != seen.end())
            return;
          seen.push_back(m.key());
          out.push_back(std::move(m));
          return;
        }
        for (int i = start; i < static_cast<int>(cands.size()); ++i) {
          if (!independent_with(picked, cands[i])) continue;
          picked.push_back(cands[i]);
          rec(i + 1, level + 1, picked);
          picked.pop_back();
        }
      };
  std::vector<std::vector<int>> picked;
  rec(0, 0, picked);
  return out;
}

struct ZoneGeometry::Ctx {
  std::map<std::string, bool> block_memo;            // key: M.key|s|slack-sign
  std::map<std::string, SearchAnswer> ext_memo;
  bool budget_limited = false;
  int depth = 0;
};

namespace {
std::string memo_key(const lat::LatticeModule& m, int s, double slack) {
  return m.key() + "|" + std::to_string(s) + "|" + std::to_string(slack);
}
}  // namespace

bool ZoneGeometry::in_block(std::span<const double> a,
                            const lat::LatticeModule& m, int s,
                            double slack) const {
  Ctx ctx;
  return in_block_ctx(a, m, s, slack, ctx);
}

bool ZoneGeometry::in_block_ctx(std::span<const double> a,
                                const lat::LatticeModule& m, int s,
                                double slack, Ctx& ctx) const {
  const std::string key = memo_key(m, s, slack);
  auto it = ctx.block_memo.find(key);
  if (it != ctx.block_memo.end()) return it->second;
  bool result;
  if (s == 0) {
    // the zero block is the nonresonant zone: a level-1 witness would place
    // the point in some rank-1 zone and recursively in some block
    result = in_zone0(a, slack);
  } else {
    // membership in some block of rank > s is exactly the existence of an
    // independent level-wise resonant tuple of size s + 1
    result = in_zone(a, m, s, slack).has_value() &&
             !has_rank_above(a, s, slack);
  }
  ctx.block_memo.emplace(key, result);
  return result;
}

SearchAnswer ZoneGeometry::in_extended_block(std::span<const double> a,
                                             const lat::LatticeModule& m,
                                             int s, double slack) const {
  Ctx ctx;
  return in_ext_ctx(a, m, s, slack, ctx);
}

SearchAnswer ZoneGeometry::in_ext_ctx(std::span<const double> a,
                                      const lat::LatticeModule& m, int s,
                                      double slack, Ctx& ctx) const {
  const std::string key = memo_key(m, s, slack);
  auto it = ctx.ext_memo.find(key);
  if (it != ctx.ext_memo.end()) return it->second;

  SearchAnswer result = SearchAnswer::No;
  bool plane_hit = false;
  bool budget_hit = false;

  if (s == 0) {
    plane_hit = in_block_ctx(a, m, 0, slack, ctx);
  } else if (in_zone(a, m, s, slack).has_value()) {
    if (in_block_ctx(a, m, s, slack, ctx)) {
      plane_hit = true;  // a block is inside its own extension
    } else {
      // coarse-to-fine grid search of the fast-drift plane a + M_R for a
      // block point; finest step ~ ||a||^delta / plane_step_div
      const double na = norm(a);
      const double rho = p_.plane_radius_factor * p_.cs[std::min(s, p_.d - 1)] *
                         std::pow(na, p_.delta_s(std::min(s + 1, p_.d)));
      const double h_fine = std::pow(na, p_.delta) / p_.plane_step_div;
      std::vector<std::vector<double>> basis;
      for (const auto& row : m.basis()) {
        std::vector<double> v(row.begin(), row.end());
        for (const auto& b : basis) {
          double ip = 0.0;
          for (int j = 0; j < p_.d; ++j) ip += v[j] * b[j];
          for (int j = 0; j < p_.d; ++j) v[j] -= ip * b[j];
        }
        double n = norm(v);
        if (n > 1e-9) {
          for (auto& x : v) x /= n;
          basis.push_back(std::move(v));
        }
      }
      const long n_fine = 2 * static_cast<long>(std::ceil(rho / h_fine)) + 1;
      long spent = 0;
      std::vector<double> sample(p_.d);
      for (long n_axis = 9; !plane_hit; n_axis = 4 * (n_axis - 1) + 1) {
        n_axis = std::min(n_axis, n_fine);
        long total = 1;
        for (int i = 0; i < s; ++i) total *= n_axis;
        if (spent + total > p_.plane_budget) {
          budget_hit = true;
          break;
        }
        spent += total;
        const long half = n_axis / 2;
        const double step = rho / static_cast<double>(half);
        std::vector<long> idx(s, -half);
        for (;;) {
          bool all_zero = true;
          for (long v : idx) all_zero = all_zero && v == 0;
          if (!all_zero) {
            for (int j = 0; j < p_.d; ++j) sample[j] = a[j];
            for (int i = 0; i < s; ++i)
              for (int j = 0; j < p_.d; ++j)
                sample[j] += static_cast<double>(idx[i]) * step * basis[i][j];
            Ctx sub;  // plane samples get their own small context
            if (in_block_ctx(sample, m, s, slack, sub)) {
              plane_hit = true;
              break;
            }
          }
          int i = s - 1;
          while (i >= 0 && idx[i] == half) {
            idx[i] = -half;
            --i;
          }
          if (i < 0) break;
          ++idx[i];
        }
        if (n_axis == n_fine) break;  // finest level exhausted
      }
    }
  }

  if (plane_hit) {
    result = SearchAnswer::Yes;
    // subtract lower-dimensional extended blocks
    for (int s2 = 0; s2 < s && result == SearchAnswer::Yes; ++s2) {
      for (const auto& m2 : candidate_modules(a, s2, slack)) {
        SearchAnswer sub = in_ext_ctx(a, m2, s2, slack, ctx);
        if (sub == SearchAnswer::Yes) {
          result = SearchAnswer::No;
          break;
        }
        if (sub == SearchAnswer::Budget) budget_hit = true;
      }
    }
  }
  if (result == SearchAnswer::No && budget_hit) result = SearchAnswer::Budget;
  if (budget_hit) ctx.budget_limited = true;
  ctx.ext_memo.emplace(key, result);
  return result;
}

std::vector<ZoneLabel> ZoneGeometry::label_sweep(std::span<const double> a,
                                                 double slack, bool& budget,
                                                 Ctx& ctx) const {
  std::vector<ZoneLabel> labels;
  for (int s = 0; s < p_.d; ++s) {
    for (const auto& m : candidate_modules(a, s, slack)) {
      SearchAnswer ans = in_ext_ctx(a, m, s, slack, ctx);
      if (ans == SearchAnswer::Budget) budget = true;
      if (ans != SearchAnswer::Yes) continue;
      ZoneLabel lbl;
      lbl.s = s;
      lbl.module = m;
      if (s >= 1) {
        auto w = in_zone(a, m, s, slack);
        if (w) lbl.witnesses = *w;
      }
      labels.push_back(std::move(lbl));
    }
  }
  return labels;
}

ClassifyResult ZoneGeometry::classify(std::span<const double> a) const {
  const double eps = p_.boundary_eps;
  bool budget = false;
  Ctx ctx_lo, ctx_hi;
  auto lo = label_sweep(a, -eps, budget, ctx_lo);
  auto hi = label_sweep(a, +eps, budget, ctx_hi);

  ClassifyResult res;
  res.budget_limited = budget;
  auto same = [&] {
    if (lo.size() != hi.size()) return false;
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (!(lo[i] == hi[i])) return false;
    return true;
  }();
  if (!same) {
    res.status = ClassifyStatus::Boundary;
    res.labels = hi;
    res.diagnostic = "label set changes under +-boundary_eps slack";
    return res;
  }
  res.labels = hi;
  if (hi.empty()) {
    res.status = ClassifyStatus::Unclassified;
    res.diagnostic = budget ? "no label found (plane-search budget hit)"
                            : "no extended block contains the point";
    return res;
  }
  if (hi.size() > 1) {
    res.status = ClassifyStatus::Ambiguous;
    res.diagnostic = "multiple extended blocks claim the point";
    return res;
  }
  res.status = ClassifyStatus::Ok;
  res.label = hi.front();
  return res;
}

ZoneGeometry::PlaneCheck ZoneGeometry::plane_diameter_check(
    std::span<const double> a, const lat::LatticeModule& m, int s) const {
  PlaneCheck out;
  const double na = norm(a);
  out.bound = p_.cs[std::min(s, p_.d - 1)] *
              std::pow(na, p_.delta_s(std::min(s + 1, p_.d)));
  auto proj = m.project(a);
  out.projection_norm = norm(proj);
  out.projection_bound = s == 0
                             ? 0.0
                             : s * std::pow(p_.ds[s - 1], s) * p_.cs[s - 1] *
                                   std::pow(na, p_.delta_s(s) + s * p_.mu);
  if (s == 0) {
    out.measured_extent = 0.0;
    out.holds = true;
    return out;
  }
  if (!in_zone(a, m, s)) {
    out.holds = true;  // empty plane through a nonmember
    return out;
  }
  // walk the plane grid, record the farthest sample still inside the zone
  std::vector<std::vector<double>> basis;
  for (const auto& row : m.basis()) {
    std::vector<double> v(row.begin(), row.end());
    for (const auto& b : basis) {
      double ip = 0.0;
      for (int j = 0; j < p_.d; ++j) ip += v[j] * b[j];
      for (int j = 0; j < p_.d; ++j) v[j] -= ip * b[j];
    }
    double n = norm(v);
    if (n > 1e-9) {
      for (auto& x : v) x /= n;
      basis.push_back(std::move(v));
    }
  }
  const double rho = p_.plane_radius_factor * out.bound;
  const double h = std::pow(na, p_.delta) / p_.plane_step_div;
  long n_axis = 2 * static_cast<long>(std::ceil(rho / h)) + 1;
  long total = 1;
  for (int i = 0; i < s; ++i) total *= n_axis;
  if (total > p_.plane_budget) {
    out.budget_limited = true;
    n_axis = static_cast<long>(
        std::floor(std::pow(static_cast<double>(p_.plane_budget), 1.0 / s)));
    if (n_axis % 2 == 0) --n_axis;
  }
  const long half = n_axis / 2;
  const double step = out.budget_limited ? rho / half : h;
  std::vector<long> idx(s, -half);
  std::vector<double> sample(p_.d);
  for (;;) {
    for (int j = 0; j < p_.d; ++j) sample[j] = a[j];
    double off2 = 0.0;
    for (int i = 0; i < s; ++i) {
      for (int j = 0; j < p_.d; ++j)
        sample[j] += static_cast<double>(idx[i]) * step * basis[i][j];
      off2 += std::pow(static_cast<double>(idx[i]) * step, 2);
    }
    if (in_zone(sample, m, s).has_value())
      out.measured_extent = std::max(out.measured_extent, std::sqrt(off2));
    int i = s - 1;
    while (i >= 0 && idx[i] == half) {
      idx[i] = -half;
      --i;
    }
    if (i < 0) break;
    ++idx[i];
  }
  out.holds = out.measured_extent <= out.bound * (1.0 + 1e-9);
  return out;
}

ZoneGeometry::SeparationReport ZoneGeometry::separation_check(
    std::span<const double> a, const ZoneLabel& label, double K, int trials,
    std::uint64_t seed) const {
  SeparationReport rep;
  if (label.s == 0) return rep;  // vacuous at s = 0
  const double na = norm(a);
  const double rad = K * std::pow(na, p_.delta_s(label.s + 1));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> ur(0.0, 1.0);
  std::vector<double> ap(p_.d);
  for (int t = 0; t < trials; ++t) {
    std::vector<double> u(p_.d);
    double n = 0.0;
    do {
      for (auto& x : u) x = gauss(rng);
      n = norm(u);
    } while (n < 1e-12);
    double r = rad * std::pow(ur(rng), 1.0 / p_.d);
    for (int j = 0; j < p_.d; ++j) ap[j] = a[j] + r * u[j] / n;
    ++rep.trials;
    // any zone membership of rank <= s for a module not inside M?
    bool violated = false;
    for (int s2 = 1; s2 <= label.s && !violated; ++s2) {
      for (const auto& m2 : candidate_modules(ap, s2)) {
        if (label.module.contains_module(m2)) continue;
        if (in_zone(ap, m2, s2).has_value()) {
          violated = true;
          break;
        }
      }
    }
    if (violated) ++rep.violations;
  }
  return rep;
}

Raster zone_map_raster(const ZoneGeometry& geom, double x0, double x1,
                       double y0, double y1, int nx, int ny, int threads) {
  if (geom.params().d != 2)
    throw ConfigError("zone_map_raster: requires d == 2");
  if (nx < 1 || ny < 1) throw ConfigError("zone_map_raster: empty grid");
  Raster r;
  r.x0 = x0;
  r.x1 = x1;
  r.y0 = y0;
  r.y1 = y1;
  r.nx = nx;
  r.ny = ny;
  r.cells.resize(static_cast<std::size_t>(nx) * ny);
  const double dx = (x1 - x0) / nx, dy = (y1 - y0) / ny;
  auto work = [&](int row_begin, int row_end) {
    for (int iy = row_begin; iy < row_end; ++iy) {
      for (int ix = 0; ix < nx; ++ix) {
        const double pt[2] = {x0 + (ix + 0.5) * dx, y0 + (iy + 0.5) * dy};
        RasterCell cell;
        auto res = geom.classify(std::span<const double>(pt, 2));
        if (res.status == ClassifyStatus::Ok) {
          cell.s = res.label.s;
          cell.module_key = res.label.module.key();
        } else if (res.status == ClassifyStatus::Boundary) {
          cell.boundary = true;
        }
        r.cells[static_cast<std::size_t>(iy) * nx + ix] = std::move(cell);
      }
    }
  };
  if (threads <= 1 || ny == 1) {
    work(0, ny);
  } else {
    int n = std::min(threads, ny);
    std::vector<std::thread> pool;
    int chunk = (ny + n - 1) / n;
    for (int i = 0; i < n; ++i) {
      int b = i * chunk, e = std::min(ny, b + chunk);
      if (b >= e) break;
      pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }
  return r;
}

}  // namespace nek::geo
