#include "nek/bump.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace nek::cut {
namespace {

constexpr int kJetLen = kBumpMaxDerivative + 1;
using Jet = std::array<double, kJetLen>;  // value and derivatives at a point

// Q polynomials of B^{(n)}(u) = B(u) * Q_n(1/u):
//   Q_0 = 1,  Q_{n+1}(v) = v^2 (Q_n(v) - Q_n'(v)).
const std::vector<std::vector<double>>& q_polys() {
  static const std::vector<std::vector<double>> polys = [] {
    std::vector<std::vector<double>> qs;
    qs.push_back({1.0});
    for (int n = 0; n + 1 < kJetLen; ++n) {
      const auto& q = qs.back();
      std::vector<double> next(q.size() + 2, 0.0);
      for (std::size_t i = 0; i < q.size(); ++i) {
        next[i + 2] += q[i];                                   // v^2 Q_n
        if (i >= 1) next[i + 1] -= static_cast<double>(i) * q[i];  // -v^2 Q_n'
      }
      qs.push_back(std::move(next));
    }
    return qs;
  }();
  return polys;
}

// Jet of B(u) = exp(-1/u) at u, derivatives 0..n.
Jet b_jet(double u, int n) {
  Jet out{};
  if (u <= 0.0) return out;
  const double v = 1.0 / u;
  // exp(-v) decays beyond any power; past v ~ 400 every derivative in range
  // underflows double precision.
  if (v > 400.0) return out;
  const double b = std::exp(-v);
  const auto& qs = q_polys();
  for (int j = 0; j <= n; ++j) {
    double q = 0.0;
    for (auto it = qs[j].rbegin(); it != qs[j].rend(); ++it) q = q * v + *it;
    out[j] = b * q;
  }
  return out;
}

Jet jet_add(const Jet& a, const Jet& b, int n) {
  Jet out{};
  for (int j = 0; j <= n; ++j) out[j] = a[j] + b[j];
  return out;
}

// Division of truncated Taylor jets (in derivative form: convert through
// factorials).
Jet jet_div(const Jet& num, const Jet& den, int n) {
  std::array<double, kJetLen> fact{};
  fact[0] = 1.0;
  for (int j = 1; j <= n; ++j) fact[j] = fact[j - 1] * j;
  Jet a{}, b{}, c{};
  for (int j = 0; j <= n; ++j) {
    a[j] = num[j] / fact[j];
    b[j] = den[j] / fact[j];
  }
  for (int j = 0; j <= n; ++j) {
    double s = a[j];
    for (int i = 0; i < j; ++i) s -= c[i] * b[j - i];
    c[j] = s / b[0];
  }
  Jet out{};
  for (int j = 0; j <= n; ++j) out[j] = c[j] * fact[j];
  return out;
}

// Jet of s(u) = B(u) / (B(u) + B(1-u)), derivatives 0..n.
Jet s_jet(double u, int n) {
  Jet b1 = b_jet(u, n);
  Jet b2m = b_jet(1.0 - u, n);  // derivatives of B at 1-u
  Jet b2{};                     // derivatives of u -> B(1-u)
  double sign = 1.0;
  for (int j = 0; j <= n; ++j) {
    b2[j] = sign * b2m[j];
    sign = -sign;
  }
  if (b1[0] == 0.0 && b2[0] == 0.0) {
    // u <= 0 with 1-u <= 0 cannot happen; treat as the flat-zero side.
    return Jet{};
  }
  return jet_div(b1, jet_add(b1, b2, n), n);
}

}  // namespace

double bump(double x) { return bump_derivative(0, x); }

double bump_derivative(int order, double x) {
  if (order < 0 || order > kBumpMaxDerivative)
    throw std::domain_error("bump_derivative: order out of range");
  const double ax = std::fabs(x);
  if (ax <= 0.5) return order == 0 ? 1.0 : 0.0;
  if (ax >= 1.0) return 0.0;
  const double u = 2.0 - 2.0 * ax;          // in (0, 1)
  const double chain = x > 0 ? -2.0 : 2.0;  // d u / d x
  Jet s = s_jet(u, order);
  return s[order] * std::pow(chain, order);
}

}  // namespace nek::cut
