#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nek/lattice.hpp"

namespace nek::geo {

// Geometry parameter pack.  The level constants C_j, D_j are strictly
// increasing from 1; R is the inner radius below which every point counts as
// nonresonant.  radius == 0 requests calibration: the smallest power of two
// with d * D_d^d * C_d * R^{delta_d + mu d - 1} < 1, which empties the
// full-rank zone.
struct ZoneParams {
  int d = 2;
  double delta = 0.75;
  double mu = 0.02;
  std::vector<double> cs;  // C_1..C_d; empty -> 4^{j-1}
  std::vector<double> ds;  // D_1..D_d; empty -> 2^{j-1}
  double radius = 0.0;
  double plane_step_div = 32.0;
  double plane_radius_factor = 2.0;
  long plane_budget = 300000;
  double boundary_eps = 1e-6;

  static ZoneParams defaults(int d);
  void validate();  // fills defaults, calibrates radius when 0
  double delta_s(int s) const;
  double full_rank_margin(double r) const;  // d D_d^d C_d r^{delta_d+mu d-1}
  bool full_rank_radius_ok() const;  // radius empties the full-rank zone
};

struct ZoneLabel {
  int s = 0;
  lat::LatticeModule module;
  std::vector<std::vector<int>> witnesses;

  bool operator==(const ZoneLabel& o) const {
    return s == o.s && module == o.module;
  }
};

enum class ClassifyStatus { Ok, Boundary, Ambiguous, Unclassified };

struct ClassifyResult {
  ClassifyStatus status = ClassifyStatus::Unclassified;
  ZoneLabel label;
  std::vector<ZoneLabel> labels;  // everything found, for diagnostics
  bool budget_limited = false;
  std::string diagnostic;
};

// Three-valued answer for searches that may exhaust their budget.
enum class SearchAnswer { No, Yes, Budget };

// Membership predicates for the nested resonance partition.  All methods are
// const and thread-safe; per-call memoisation is internal.
class ZoneGeometry {
public:
  explicit ZoneGeometry(ZoneParams p);
  const ZoneParams& params() const { return p_; }

  // All k != 0 with ||k|| <= D_level ||a||^mu, one per +-pair, lex order.
  std::vector<std::vector<int>> enumerate_candidates(std::span<const double> a,
                                                     int level,
                                                     double slack = 0.0) const;

  // |a.k| <= C_j ||k|| ||a||^{delta_j} and ||k|| <= D_j ||a||^mu, with the
  // relative slack widening (slack > 0) or narrowing (slack < 0) both tests.
  bool level_resonant(std::span<const double> a, std::span<const int> k,
                      int level, double slack = 0.0) const;

  bool in_zone0(std::span<const double> a, double slack = 0.0) const;
  std::optional<std::vector<std::vector<int>>> in_zone(
      std::span<const double> a, const lat::LatticeModule& m, int s,
      double slack = 0.0) const;
  bool in_block(std::span<const double> a, const lat::LatticeModule& m, int s,
                double slack = 0.0) const;
  SearchAnswer in_extended_block(std::span<const double> a,
                                 const lat::LatticeModule& m, int s,
                                 double slack = 0.0) const;

  // Unique extended-block label; Boundary when the +-eps passes disagree.
  ClassifyResult classify(std::span<const double> a) const;

  // Candidate modules of the given rank assembled from enumerated vectors.
  std::vector<lat::LatticeModule> candidate_modules(std::span<const double> a,
                                                    int s,
                                                    double slack = 0.0) const;

  struct PlaneCheck {
    double measured_extent = 0.0;   // largest block-point distance found
    double bound = 0.0;             // C_{s+1} ||a||^{delta_{s+1}}
    double projection_norm = 0.0;   // ||Pi_M a||
    double projection_bound = 0.0;  // s D_s^s C_s ||a||^{delta_s + s mu}
    bool holds = false;
    bool budget_limited = false;
  };
  PlaneCheck plane_diameter_check(std::span<const double> a,
                                  const lat::LatticeModule& m, int s) const;

  struct SeparationReport {
    long trials = 0;
    long violations = 0;
    bool budget_limited = false;
  };
  // For a with label (s, M): sample a' with ||a'-a|| <= K ||a||^{delta_{s+1}}
  // and count memberships in zones of modules not contained in M.
  SeparationReport separation_check(std::span<const double> a,
                                    const ZoneLabel& label, double K,
                                    int trials, std::uint64_t seed) const;

private:
  ZoneParams p_;
  struct Ctx;
  mutable std::mutex ball_mutex_;
  mutable std::map<long, std::vector<std::vector<int>>> ball_cache_;
  const std::vector<std::vector<int>>& ball(double bound) const;
  std::vector<std::vector<int>> resonant_candidates(std::span<const double> a,
                                                    int level,
                                                    double slack) const;
  // Does an independent tuple (k_1..k_{s+1}) with level-j resonance exist?
  // Equivalent to membership in some resonant block of rank > s.
  bool has_rank_above(std::span<const double> a, int s, double slack) const;
  bool in_block_ctx(std::span<const double> a, const lat::LatticeModule& m,
                    int s, double slack, Ctx& ctx) const;
  SearchAnswer in_ext_ctx(std::span<const double> a,
                          const lat::LatticeModule& m, int s, double slack,
                          Ctx& ctx) const;
  std::vector<ZoneLabel> label_sweep(std::span<const double> a, double slack,
                                     bool& budget, Ctx& ctx) const;
};

struct RasterCell {
  int s = -1;  // -1: boundary band or failure
  std::string module_key;
  bool boundary = false;
};

struct Raster {
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  int nx = 0, ny = 0;
  std::vector<RasterCell> cells;  // row-major, y outer
  const RasterCell& at(int ix, int iy) const { return cells[iy * nx + ix]; }
};

// Per-pixel classification of a 2-d box (requires params.d == 2); pixels are
// cell centres.  Deterministic; parallelises over rows.
Raster zone_map_raster(const ZoneGeometry& geom, double x0, double x1,
                       double y0, double y1, int nx, int ny, int threads = 1);

}  // namespace nek::geo
