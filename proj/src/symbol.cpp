#include "nek/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "nek/errors.hpp"

namespace nek::sym {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

Mode negated(const Mode& k) {
  Mode m(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) m[i] = -k[i];
  return m;
}

bool is_zero_mode(const Mode& k) {
  return std::all_of(k.begin(), k.end(), [](int x) { return x == 0; });
}

}  // namespace

void PhasePoint::wrap_angles() {
  for (double& phi : angles) {
    phi = std::fmod(phi, kTwoPi);
    if (phi < 0.0) phi += kTwoPi;
  }
}

PhasePoint make_point(std::vector<double> actions, std::vector<double> angles,
                      double time) {
  if (actions.size() != angles.size())
    throw ConfigError("phase point: actions/angles dimension mismatch");
  PhasePoint p{std::move(actions), std::move(angles), time};
  p.wrap_angles();
  return p;
}

SymbolFunction::SymbolFunction(int d, int kmax, bool real_flag)
    : d_(d), kmax_(kmax), real_(real_flag) {
  if (d < 1) throw ConfigError("symbol: dimension must be >= 1");
  if (kmax < 0) throw ConfigError("symbol: negative truncation radius");
}

void SymbolFunction::set_coeff(const Mode& k, ExprPtr c) {
  if (static_cast<int>(k.size()) != d_)
    throw ConfigError("symbol: mode dimension mismatch");
  for (int kj : k)
    if (std::abs(kj) > kmax_)
      throw ConfigError("symbol: mode beyond truncation radius");
  if (!c || c->is_zero()) {
    coeffs_.erase(k);
    return;
  }
  coeffs_[k] = std::move(c);
}

void SymbolFunction::set_real_pair(const Mode& k, const ExprPtr& c) {
  if (!real_) throw ConfigError("set_real_pair requires a real-flagged symbol");
  set_coeff(k, c);
  if (!is_zero_mode(k)) set_coeff(negated(k), conjugate(c));
}

ExprPtr SymbolFunction::coeff(const Mode& k) const {
  auto it = coeffs_.find(k);
  return it == coeffs_.end() ? nullptr : it->second;
}

Cx SymbolFunction::evaluate_cx(const PhasePoint& p) const {
  if (p.dim() != d_)
    throw ConfigError("symbol evaluation: dimension mismatch");
  EvalPoint ep{std::span<const double>(p.actions), p.time};
  Cx sum{0.0, 0.0};
  for (const auto& [k, c] : coeffs_) {
    double karg = 0.0;
    for (int j = 0; j < d_; ++j) karg += k[j] * p.angles[j];
    sum += nek::sym::evaluate(c, ep) * Cx{std::cos(karg), std::sin(karg)};
  }
  return sum;
}

double SymbolFunction::evaluate(const PhasePoint& p) const {
  Cx v = evaluate_cx(p);
  if (real_) {
    double scale = std::abs(v);
    if (scale > 0.0 && std::fabs(v.imag()) > 1e-10 * std::max(scale, 1.0))
      throw NumericalError(
          "real-flagged symbol produced a significant imaginary part");
  }
  return v.real();
}

SymbolFunction SymbolFunction::derive_angle(int j) const {
  if (j < 0 || j >= d_) throw ConfigError("derive_angle: index out of range");
  SymbolFunction out(d_, kmax_, real_);
  for (const auto& [k, c] : coeffs_) {
    if (k[j] == 0) continue;
    out.set_coeff(k, ex_mul(ex_const(Cx{0.0, static_cast<double>(k[j])}), c));
  }
  return out;
}

SymbolFunction SymbolFunction::derive_action(int j) const {
  if (j < 0 || j >= d_) throw ConfigError("derive_action: index out of range");
  SymbolFunction out(d_, kmax_, real_);
  for (const auto& [k, c] : coeffs_) out.set_coeff(k, derive(c, j));
  return out;
}

SymbolFunction SymbolFunction::derive_time() const {
  SymbolFunction out(d_, kmax_, real_);
  for (const auto& [k, c] : coeffs_) out.set_coeff(k, derive(c, kTimeVar));
  return out;
}

SymbolFunction SymbolFunction::scaled(Cx factor) const {
  bool real = real_ && factor.imag() == 0.0;
  SymbolFunction out(d_, kmax_, real);
  for (const auto& [k, c] : coeffs_)
    out.set_coeff(k, ex_mul(ex_const(factor), c));
  return out;
}

SymbolFunction SymbolFunction::with_kmax(int kmax) const {
  SymbolFunction out(d_, kmax, real_);
  for (const auto& [k, c] : coeffs_) {
    bool fits = true;
    for (int kj : k)
      if (std::abs(kj) > kmax) fits = false;
    if (fits) out.set_coeff(k, c);
  }
  return out;
}

SymbolFunction SymbolFunction::compact() const {
  int actual = 0;
  for (const auto& [k, c] : coeffs_)
    for (int kj : k) actual = std::max(actual, std::abs(kj));
  return with_kmax(actual);
}

SymbolFunction SymbolFunction::zero(int d, bool real_flag) {
  return SymbolFunction(d, 0, real_flag);
}

SymbolFunction SymbolFunction::h0(int d) {
  SymbolFunction out(d, 0, true);
  std::vector<ExprPtr> sq;
  for (int j = 0; j < d; ++j) sq.push_back(ex_pow(ex_action(j), 2.0));
  out.set_coeff(Mode(d, 0), ex_mul(ex_const(0.5), ex_add(std::move(sq))));
  return out;
}

SymbolFunction add(const SymbolFunction& f, const SymbolFunction& g) {
  if (f.dim() != g.dim()) throw ConfigError("symbol add: dimension mismatch");
  SymbolFunction out(f.dim(), std::max(f.kmax(), g.kmax()),
                     f.is_real() && g.is_real());
  for (const auto& [k, c] : f.coeffs()) out.set_coeff(k, c);
  for (const auto& [k, c] : g.coeffs()) {
    auto existing = out.coeff(k);
    out.set_coeff(k, existing ? ex_add(existing, c) : c);
  }
  return out.compact();
}

SymbolFunction sub(const SymbolFunction& f, const SymbolFunction& g) {
  return add(f, g.scaled(Cx{-1.0, 0.0}));
}

namespace {

// Shared convolution core: out_k += combine(f_k1, g_k2) over k1 + k2 = k.
ConvolveResult convolve(
    const SymbolFunction& f, const SymbolFunction& g, int out_kmax,
    const std::function<ExprPtr(const Mode&, const ExprPtr&, const Mode&,
                                const ExprPtr&)>& combine,
    bool real_out) {
  const int d = f.dim();
  std::map<Mode, std::vector<ExprPtr>> terms;
  bool truncated = false;
  for (const auto& [k1, c1] : f.coeffs()) {
    for (const auto& [k2, c2] : g.coeffs()) {
      Mode k(d);
      bool fits = true;
      for (int j = 0; j < d; ++j) {
        k[j] = k1[j] + k2[j];
        if (std::abs(k[j]) > out_kmax) fits = false;
      }
      if (!fits) {
        truncated = true;
        continue;
      }
      ExprPtr t = combine(k1, c1, k2, c2);
      if (t && !t->is_zero()) terms[k].push_back(std::move(t));
    }
  }
  SymbolFunction out(d, out_kmax, real_out);
  for (auto& [k, list] : terms) out.set_coeff(k, ex_add(std::move(list)));
  return {out.compact(), truncated};
}

}  // namespace

ConvolveResult multiply(const SymbolFunction& f, const SymbolFunction& g,
                        int out_kmax) {
  if (f.dim() != g.dim())
    throw ConfigError("symbol multiply: dimension mismatch");
  return convolve(
      f, g, out_kmax,
      [](const Mode&, const ExprPtr& c1, const Mode&, const ExprPtr& c2) {
        return ex_mul(c1, c2);
      },
      f.is_real() && g.is_real());
}

ConvolveResult poisson_bracket(const SymbolFunction& f,
                               const SymbolFunction& g, int out_kmax) {
  if (f.dim() != g.dim())
    throw ConfigError("poisson bracket: dimension mismatch");
  const int d = f.dim();
  // Coefficient-level combine:
  //   sum_j (i k1_j f_k1)(d_a_j g_k2) - (i k1_j g_k1)(d_a_j f_k2)
  // assembled as one convolution per orientation so {f, f} cancels exactly.
  std::vector<std::map<Mode, ExprPtr>> dg(d), df(d);
  for (int j = 0; j < d; ++j) {
    for (const auto& [k, c] : g.coeffs()) dg[j][k] = derive(c, j);
    for (const auto& [k, c] : f.coeffs()) df[j][k] = derive(c, j);
  }
  std::map<Mode, std::vector<ExprPtr>> terms;
  bool truncated = false;
  auto accumulate = [&](const SymbolFunction& A,
                        const std::vector<std::map<Mode, ExprPtr>>& dB,
                        double sign) {
    for (const auto& [k1, c1] : A.coeffs()) {
      for (int j = 0; j < d; ++j) {
        if (k1[j] == 0) continue;
        ExprPtr dphi =
            ex_mul(ex_const(Cx{0.0, sign * static_cast<double>(k1[j])}), c1);
        for (const auto& [k2, c2] : dB[j]) {
          if (c2->is_zero()) continue;
          Mode k(d);
          bool fits = true;
          for (int jj = 0; jj < d; ++jj) {
            k[jj] = k1[jj] + k2[jj];
            if (std::abs(k[jj]) > out_kmax) fits = false;
          }
          if (!fits) {
            truncated = true;
            continue;
          }
          ExprPtr t = ex_mul(dphi, c2);
          if (!t->is_zero()) terms[k].push_back(std::move(t));
        }
      }
    }
  };
  accumulate(f, dg, 1.0);   // + (d_phi f)(d_a g)
  accumulate(g, df, -1.0);  // - (d_phi g)(d_a f)
  SymbolFunction out(d, out_kmax, f.is_real() && g.is_real());
  for (auto& [k, list] : terms) out.set_coeff(k, ex_add(std::move(list)));
  return {out.compact(), truncated};
}

SymbolFunction poisson_bracket_or_throw(const SymbolFunction& f,
                                        const SymbolFunction& g,
                                        int out_kmax) {
  auto r = poisson_bracket(f, g, out_kmax);
  if (r.truncated)
    throw BudgetError("poisson bracket: convolution exceeds output k_max");
  return std::move(r.value);
}

CompiledSymbol::CompiledSymbol(const SymbolFunction& f)
    : d_(f.dim()), real_(f.is_real()) {
  for (const auto& [k, c] : f.coeffs()) roots_.emplace_back(k, tape_.add_root(c));
}

Cx CompiledSymbol::evaluate_cx(std::span<const double> actions,
                               std::span<const double> angles, double time,
                               std::vector<Cx>& regs) const {
  tape_.run(actions, time, regs);
  Cx sum{0.0, 0.0};
  for (const auto& [k, slot] : roots_) {
    double karg = 0.0;
    for (int j = 0; j < d_; ++j) karg += k[j] * angles[j];
    sum += regs[slot] * Cx{std::cos(karg), std::sin(karg)};
  }
  return sum;
}

double CompiledSymbol::evaluate(std::span<const double> actions,
                                std::span<const double> angles, double time,
                                std::vector<Cx>& regs) const {
  return evaluate_cx(actions, angles, time, regs).real();
}

SeminormEstimate estimate_seminorm(const SymbolFunction& f, double m,
                                   double delta, int n1, int n2,
                                   std::span<const std::vector<double>> grid) {
  if (grid.empty()) throw ConfigError("estimate_seminorm: empty grid");
  if (n1 < 0 || n1 > 2)
    throw ConfigError("estimate_seminorm: n1 must be 0, 1 or 2");
  if (n2 < 0) throw ConfigError("estimate_seminorm: negative n2");
  const int d = f.dim();

  // All derivative symbols D^alpha f with |alpha| = n1.
  std::vector<SymbolFunction> derivs;
  if (n1 == 0) {
    derivs.push_back(f);
  } else if (n1 == 1) {
    for (int j = 0; j < d; ++j) derivs.push_back(f.derive_action(j));
  } else {
    for (int j = 0; j < d; ++j) {
      SymbolFunction dj = f.derive_action(j);
      for (int l = j; l < d; ++l) derivs.push_back(dj.derive_action(l));
    }
  }

  double best = 0.0;
  const double t = 0.0;
  for (const auto& df : derivs) {
    for (const auto& [k, c] : df.coeffs()) {
      double knorm = 0.0;
      for (int kj : k) knorm += static_cast<double>(kj) * kj;
      knorm = std::sqrt(knorm);
      double kfac = (n2 == 0) ? 1.0 : std::pow(knorm, n2);
      if (kfac == 0.0) continue;
      for (const auto& a : grid) {
        if (static_cast<int>(a.size()) != d)
          throw ConfigError("estimate_seminorm: grid point dimension mismatch");
        EvalPoint ep{std::span<const double>(a), t};
        double mag = std::abs(evaluate(c, ep));
        double jac = std::sqrt(1.0 + [&] {
          double s = 0.0;
          for (double x : a) s += x * x;
          return s;
        }());
        double weight = std::pow(jac, -(m - delta * n1));
        best = std::max(best, mag * kfac * weight);
      }
    }
  }
  SeminormEstimate est;
  est.order_m = m;
  est.delta = delta;
  est.n1 = n1;
  est.n2 = n2;
  est.value = best;
  est.sample_desc = std::to_string(grid.size()) + " action points, t=0, " +
                    std::to_string(f.mode_count()) + " modes";
  return est;
}

double ls_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ConfigError("ls_slope: need at least two samples");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw ConfigError("ls_slope: degenerate abscissae");
  return sxy / sxx;
}

double fit_order(const SymbolFunction& f, std::span<const double> radii,
                 const FitOptions& opts) {
  if (radii.size() < 4)
    throw ConfigError("fit_order: need at least 4 radii");
  auto [lo, hi] = std::minmax_element(radii.begin(), radii.end());
  if (*lo <= 0.0 || *hi / *lo < 8.0)
    throw ConfigError("fit_order: radii must span at least a factor 8");
  const int d = f.dim();
  CompiledSymbol cs(f);
  std::vector<Cx> regs;

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> uphi(0.0, kTwoPi);

  // Direction set: random plus transition-layer directions per focus mode.
  std::vector<std::vector<double>> dirs;
  for (int i = 0; i < opts.directions; ++i) {
    std::vector<double> u(d);
    double n = 0.0;
    do {
      for (auto& x : u) x = gauss(rng);
      n = norm2(u);
    } while (n < 1e-12);
    for (auto& x : u) x /= n;
    dirs.push_back(std::move(u));
  }

  std::vector<Mode> focus;
  if (opts.focus_modes) {
    focus = *opts.focus_modes;
  } else {
    for (const auto& [k, c] : f.coeffs())
      if (!is_zero_mode(k)) focus.push_back(k);
  }

  std::vector<std::vector<double>> phis;
  for (int i = 0; i < opts.angle_samples; ++i) {
    std::vector<double> phi(d);
    for (auto& x : phi) x = uphi(rng);
    phis.push_back(std::move(phi));
  }
  phis.push_back(std::vector<double>(d, 0.0));

  const double layer_offsets[] = {0.0, 0.45, -0.45, 0.6, -0.6, 0.75,
                                  -0.75, 0.9, -0.9, 1.1, -1.1};

  std::vector<double> lx, ly;
  for (double r : radii) {
    double sup = 0.0;
    auto probe = [&](std::span<const double> a) {
      for (const auto& phi : phis)
        for (double t : opts.times)
          sup = std::max(sup, std::abs(cs.evaluate_cx(a, phi, t, regs)));
    };
    for (const auto& u : dirs) {
      std::vector<double> a(d);
      for (int j = 0; j < d; ++j) a[j] = r * u[j];
      probe(a);
    }
    // Layer-aimed directions: a with a.k = c * r^layer_expo * ||k||.
    for (const auto& k : focus) {
      std::vector<double> khat(d);
      double kn = 0.0;
      for (int j = 0; j < d; ++j) kn += static_cast<double>(k[j]) * k[j];
      kn = std::sqrt(kn);
      if (kn == 0.0) continue;
      for (int j = 0; j < d; ++j) khat[j] = k[j] / kn;
      // a perpendicular seed
      std::vector<double> v(d);
      double vn = 0.0;
      for (int attempt = 0; attempt < 16 && vn < 1e-9; ++attempt) {
        for (auto& x : v) x = gauss(rng);
        double dot = 0.0;
        for (int j = 0; j < d; ++j) dot += v[j] * khat[j];
        for (int j = 0; j < d; ++j) v[j] -= dot * khat[j];
        vn = norm2(v);
      }
      if (vn < 1e-9) continue;
      for (auto& x : v) x /= vn;
      for (double c : layer_offsets) {
        double alpha = c * std::pow(r, opts.layer_expo);
        if (std::fabs(alpha) >= r) continue;
        double beta = std::sqrt(r * r - alpha * alpha);
        std::vector<double> a(d);
        for (int j = 0; j < d; ++j) a[j] = alpha * khat[j] + beta * v[j];
        probe(a);
      }
    }
    if (sup > 0.0) {
      lx.push_back(std::log(r));
      ly.push_back(std::log(sup));
    }
  }
  if (lx.size() < 2) return kOrderFitDegenerate;
  return ls_slope(lx, ly);
}

}  // namespace nek::sym
