#pragma once

#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nek/expr.hpp"

namespace nek::sym {

using Mode = std::vector<int>;  // Fourier index k, length d

// Point of the phase space R^d x T^d at a time; angles live in [0, 2pi).
struct PhasePoint {
  std::vector<double> actions;
  std::vector<double> angles;
  double time = 0.0;

  int dim() const { return static_cast<int>(actions.size()); }
  void wrap_angles();
};

PhasePoint make_point(std::vector<double> actions, std::vector<double> angles,
                      double time = 0.0);

// Smooth function on angles x actions x time stored as a truncated Fourier
// series in the angles; each coefficient is an expression DAG in (a, t).
// Immutable once built (set_coeff is for construction), so evaluation and all
// derived operations are safe to run concurrently.
class SymbolFunction {
public:
  SymbolFunction(int d, int kmax, bool real_flag);

  int dim() const { return d_; }
  int kmax() const { return kmax_; }
  bool is_real() const { return real_; }
  const std::map<Mode, ExprPtr>& coeffs() const { return coeffs_; }
  std::size_t mode_count() const { return coeffs_.size(); }
  bool empty() const { return coeffs_.empty(); }

  void set_coeff(const Mode& k, ExprPtr c);
  // For real symbols: sets coefficient at k and the conjugate at -k.
  void set_real_pair(const Mode& k, const ExprPtr& c);
  ExprPtr coeff(const Mode& k) const;  // nullptr when absent

  Cx evaluate_cx(const PhasePoint& p) const;
  // Real evaluation; for real-flagged symbols the imaginary part must vanish
  // to rounding and is checked.
  double evaluate(const PhasePoint& p) const;

  SymbolFunction derive_angle(int j) const;
  SymbolFunction derive_action(int j) const;
  SymbolFunction derive_time() const;
  SymbolFunction scaled(Cx factor) const;
  SymbolFunction with_kmax(int kmax) const;  // re-truncate / widen
  SymbolFunction compact() const;  // shrink kmax to the stored modes

  static SymbolFunction zero(int d, bool real_flag = true);
  static SymbolFunction h0(int d);  // ||a||^2 / 2 as a k=0 symbol

private:
  int d_, kmax_;
  bool real_;
  std::map<Mode, ExprPtr> coeffs_;
};

SymbolFunction add(const SymbolFunction& f, const SymbolFunction& g);
SymbolFunction sub(const SymbolFunction& f, const SymbolFunction& g);

// Angle-side convolution results carry a truncation flag: modes beyond
// out_kmax are dropped and flagged, the caller decides whether that is fatal.
struct ConvolveResult {
  SymbolFunction value;
  bool truncated = false;
};

ConvolveResult multiply(const SymbolFunction& f, const SymbolFunction& g,
                        int out_kmax);
ConvolveResult poisson_bracket(const SymbolFunction& f,
                               const SymbolFunction& g, int out_kmax);
SymbolFunction poisson_bracket_or_throw(const SymbolFunction& f,
                                        const SymbolFunction& g, int out_kmax);

// Compiled form for bulk evaluation; one tape shared by all coefficients.
class CompiledSymbol {
public:
  explicit CompiledSymbol(const SymbolFunction& f);
  Cx evaluate_cx(std::span<const double> actions,
                 std::span<const double> angles, double time,
                 std::vector<Cx>& regs) const;
  double evaluate(std::span<const double> actions,
                  std::span<const double> angles, double time,
                  std::vector<Cx>& regs) const;
  std::size_t tape_size() const { return tape_.size(); }
  int dim() const { return d_; }

private:
  Tape tape_;
  std::vector<std::pair<Mode, int>> roots_;
  int d_;
  bool real_;
};

struct SeminormEstimate {
  double order_m = 0.0;
  double delta = 0.0;
  int n1 = 0, n2 = 0;
  double value = 0.0;
  std::string sample_desc;
};

// Sampled version of the symbol seminorm: max over the action grid, the
// stored modes and all multi-indices |alpha| = n1 of
//   |d^alpha_a f_k(a)| * |k|^n2 * <a>^{-(m - delta n1)}.
// By construction a lower bound for the true supremum.
SeminormEstimate estimate_seminorm(const SymbolFunction& f, double m,
                                   double delta, int n1, int n2,
                                   std::span<const std::vector<double>> grid);

struct FitOptions {
  int directions = 48;      // random unit directions per radius
  int angle_samples = 24;   // random torus angles per direction
  std::vector<double> times{0.0};
  std::uint64_t seed = 0x9e3779b97f4a7c15ull;
  // Extra directions aimed at the transition layers |a.k| ~ c ||a||^layer_expo
  // of the given modes; defaults to the symbol's own modes.
  std::optional<std::vector<Mode>> focus_modes;
  double layer_expo = 0.75;
};

inline constexpr double kOrderFitDegenerate =
    -std::numeric_limits<double>::infinity();

// Least-squares slope of log sup_{||a||=r, phi, t} |f| against log r.
// Radii: at least 4 values spanning a factor >= 8.  Returns the degenerate
// sentinel when f vanishes on all samples.
double fit_order(const SymbolFunction& f, std::span<const double> radii,
                 const FitOptions& opts = {});

// Shared helper: ordinary least-squares slope of y against x.
double ls_slope(std::span<const double> x, std::span<const double> y);

}  // namespace nek::sym
