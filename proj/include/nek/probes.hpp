#pragma once

#include <random>

#include "nek/symbol.hpp"

namespace nek::probes {

// Random real symbol: up to max_modes conjugate mode pairs (plus optionally a
// zero mode), coefficients of the form c * a_j^p * <a>^q * e^{i w t}.
struct SymbolSpec {
  int d = 2;
  int kmax = 4;
  int max_modes = 4;       // pairs, not counting k = 0
  bool with_zero_mode = true;
  bool time_dependent = true;
  double max_poly_degree = 2;
  double jac_exponent_lo = -1.0;
  double jac_exponent_hi = 1.0;
};

sym::SymbolFunction random_symbol(std::mt19937_64& rng, const SymbolSpec& spec);

// Uniform phase points with actions in [lo, hi]^d, angles in the torus,
// time in [0, 2 pi).
std::vector<sym::PhasePoint> random_points(std::mt19937_64& rng, int n, int d,
                                           double lo, double hi);

// Points with ||a|| log-uniform in [r_lo, r_hi] and random directions.
std::vector<sym::PhasePoint> random_shell_points(std::mt19937_64& rng, int n,
                                                 int d, double r_lo,
                                                 double r_hi);

// Central finite-difference Poisson bracket at a point (the independent
// oracle for the convolution bracket).
double fd_poisson_bracket(const sym::SymbolFunction& f,
                          const sym::SymbolFunction& g,
                          const sym::PhasePoint& p, double h = 1e-5);

}  // namespace nek::probes
