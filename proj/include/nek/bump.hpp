#pragma once

namespace nek::cut {

// Canonical smooth bump: symmetric, identically 1 on [-1/2, 1/2], identically
// 0 outside (-1, 1), C-infinity, monotone on [1/2, 1].  On the transition it
// is s(2 - 2|x|) with s(u) = B(u)/(B(u) + B(1-u)) and B(u) = exp(-1/u) (u>0).
double bump(double x);

// Exact n-th derivative of the bump, computed with truncated-jet arithmetic
// on the closed forms for B's derivatives.  Supported for n <= 12.
double bump_derivative(int order, double x);

constexpr int kBumpMaxDerivative = 12;

}  // namespace nek::cut
