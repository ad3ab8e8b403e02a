#pragma once

#include <functional>
#include <optional>
#include <span>

#include "nek/symbol.hpp"

namespace nek::lie {

struct FlowOptions {
  double tol = 1e-10;      // local error tolerance of the embedded RK pair
  double h_init = 0.05;
  double h_min = 1e-14;
  long max_steps = 2000000;
};

// Hamiltonian flow of a generator g in the auxiliary time tau:
//   d phi / d tau = dg/da,   d a / d tau = -dg/dphi,
// with the physical time frozen as a parameter.  Integration is carried in
// displacement coordinates (delta_a, delta_phi) relative to the start point,
// which keeps small displacements accurate at large ||a||.
class GeneratorFlow {
public:
  explicit GeneratorFlow(const sym::SymbolFunction& g);

  int dim() const { return d_; }
  const sym::SymbolFunction& generator() const { return g_; }

  struct Result {
    sym::PhasePoint point;           // end point, angles wrapped
    std::vector<double> delta_a;     // action displacement
    std::vector<double> delta_phi;   // unwrapped angle displacement
    long steps = 0;
  };

  Result flow(const sym::PhasePoint& start, double tau,
              const FlowOptions& opts = {}) const;

  // Accepted step sizes of an adaptive run; replaying them gives a map that
  // is smooth in the initial data, which the finite-difference Jacobian
  // audits need.
  std::vector<double> accepted_steps(const sym::PhasePoint& start, double tau,
                                     const FlowOptions& opts = {}) const;
  Result flow_replay(const sym::PhasePoint& start,
                     std::span<const double> steps) const;

  // Psi_g(p) = int_0^1 dg/dt(flow_tau(p)) dtau by adaptive Gauss-Kronrod 15
  // panels whose nodes re-use a progressive flow pass.
  double psi(const sym::PhasePoint& start, const FlowOptions& opts = {},
             double quad_tol = 1e-10) const;

private:
  sym::SymbolFunction g_;
  int d_;
  std::vector<sym::CompiledSymbol> dg_da_, dg_dphi_;
  std::optional<sym::CompiledSymbol> dg_dt_;
  struct State;
  void rhs(const State& s, double t, std::vector<double>& out) const;
  bool dp5_step(State& s, double t, double& h, double tol,
                bool fixed) const;
};

// Forward/inverse time-1 Lie transform plus the time-dependence correction.
struct LieTransform {
  const GeneratorFlow& gen;
  FlowOptions opts;

  sym::PhasePoint forward(const sym::PhasePoint& p) const {
    return gen.flow(p, 1.0, opts).point;
  }
  sym::PhasePoint inverse(const sym::PhasePoint& p) const {
    return gen.flow(p, -1.0, opts).point;
  }
  double psi(const sym::PhasePoint& p) const { return gen.psi(p, opts); }
};

struct Pushforward {
  std::vector<sym::SymbolFunction> terms;  // f_0 .. f_L, f_l = {f_{l-1}, g}
  sym::SymbolFunction sum;                 // sum_l f_l / l!
  bool truncated = false;
};

Pushforward pushforward_taylor(const sym::SymbolFunction& f,
                               const sym::SymbolFunction& g, int terms,
                               int kmax_budget);

// max over points of |f(flow_1(p)) - sum(p)|
double pushforward_probe_max(const Pushforward& pf,
                             const sym::SymbolFunction& f,
                             const GeneratorFlow& flow,
                             std::span<const sym::PhasePoint> points,
                             const FlowOptions& opts = {});

// Fitted radial order of the probe |f o flow - sum| over dyadic radii.
double pushforward_probe_order(const Pushforward& pf,
                               const sym::SymbolFunction& f,
                               const GeneratorFlow& flow,
                               std::span<const double> radii, int directions,
                               std::uint64_t seed, const FlowOptions& opts = {});

// A phase-space map as a plain function on stacked (a, phi) coordinates,
// angle components unwrapped.
using PhaseMap =
    std::function<std::vector<double>(const std::vector<double>&, double)>;

// max over points of the max-norm of J^T Omega J - Omega, with J the central
// finite-difference Jacobian of the map (per-coordinate step h_rel scaled by
// the coordinate magnitude).
double symplectic_defect(const PhaseMap& map, int d,
                         std::span<const std::vector<double>> points,
                         double time, double h_rel = 1e-5);

// Smooth phase map of the tau=1 flow, replaying the base point's accepted
// step sequence for every evaluation.
PhaseMap flow_phase_map(const GeneratorFlow& flow, const FlowOptions& opts);

struct DisplacementFit {
  double slope = 0.0;      // may be the degenerate -inf sentinel
  double max_disp = 0.0;
};

// log-log fit of the action displacement of the time-1 flow against ||a||.
DisplacementFit displacement_exponent(const GeneratorFlow& flow,
                                      std::span<const double> radii,
                                      int directions, std::uint64_t seed,
                                      const FlowOptions& opts = {});

// Evaluator of the conjugated Hamiltonian H' = H(flow_g(p)) - Psi_g(p); H is
// h0 (optional) plus the listed symbol parts.
class ConjugatedHamiltonian {
public:
  ConjugatedHamiltonian(std::vector<sym::SymbolFunction> parts,
                        bool include_h0, const GeneratorFlow& gen,
                        FlowOptions opts = {}, double quad_tol = 1e-10);
  double operator()(const sym::PhasePoint& p) const;

private:
  std::vector<sym::CompiledSymbol> parts_;
  bool include_h0_;
  const GeneratorFlow& gen_;
  FlowOptions opts_;
  double quad_tol_;
};

}  // namespace nek::lie
