#pragma once

#include <memory>
#include <vector>

#include "nek/cohomology.hpp"
#include "nek/lie.hpp"
#include "nek/symbol.hpp"

namespace nek::dyn {

// H = ||a||^2/2 (optional) + P(a, phi, t).
struct HamiltonianSystem {
  int d = 2;
  sym::SymbolFunction perturbation = sym::SymbolFunction::zero(2);
  bool include_h0 = true;
};

// Time-dependent electromagnetic data on the torus: vector potential
// components and a scalar potential, all action-independent.
struct EMField {
  std::vector<sym::SymbolFunction> vector_potential;  // A_1..A_d
  sym::SymbolFunction scalar_potential = sym::SymbolFunction::zero(2);
};

// P = -a.A + ||A||^2/2 + V, assembled by angle-side convolution.
HamiltonianSystem em_system(const EMField& field, int kmax_budget = 32);

// The standard example A = (cos(phi_1 - t), 0, ...), V = 0.
EMField em_plane_wave(int d);

struct IntegratorOptions {
  double dt = 0.01;
  double tol_fp = 1e-12;      // relative fixed-point tolerance
  int max_fp_iter = 64;
  int max_halvings = 8;       // automatic dt halvings on convergence trouble
  int spike_threshold = 48;   // consecutive-iteration spike that halves dt
  long decimate = 1;          // record every n-th step
  long budget_steps = 500000000;
  bool audit_symplectic = false;
  int audit_count = 8;        // audits spread over the run
  double audit_h = 3e-5;
};

struct TrajectorySample {
  double t = 0.0;
  std::vector<double> actions;
  std::vector<double> angles;
  double sup_norm = 0.0;  // running sup of ||a|| up to this sample
  double energy = 0.0;
  double drift_rate = 0.0;  // ||da/dt|| at the sample
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  double running_sup = 0.0;
  double max_drift_rate = 0.0;

  struct Audit {
    long steps = 0;
    long total_fp_iters = 0;
    int max_fp_iters = 0;
    double max_residual = 0.0;
    int halvings = 0;
    double final_dt = 0.0;
    double max_symplectic_defect = 0.0;
  } audit;
};

// Implicit-midpoint integration (time frozen at the step midpoint) with
// fixed-point inner iteration.  Angles are wrapped after each step; the
// running sup is updated densely at every step.
Trajectory integrate(const HamiltonianSystem& system,
                     const sym::PhasePoint& start, double t_end,
                     const IntegratorOptions& opts);

// Map a point to normal-form coordinates (forward generator flows in order)
// and back (reversed inverse flows).
sym::PhasePoint to_normal_form(const coho::NormalFormResult& nf,
                               const sym::PhasePoint& p,
                               const lie::FlowOptions& opts = {});
sym::PhasePoint from_normal_form(const coho::NormalFormResult& nf,
                                 const sym::PhasePoint& p,
                                 const lie::FlowOptions& opts = {});

// Fast compiled evaluator of the Hamiltonian vector field; shared by the
// integrator and by field-level probes.
class SystemEvaluator {
public:
  explicit SystemEvaluator(const HamiltonianSystem& system);
  int dim() const { return d_; }

  // adot_j = -dP/dphi_j ; phidot_j = a_j [if h0] + dP/da_j
  void field(std::span<const double> actions, std::span<const double> angles,
             double t, std::span<double> adot, std::span<double> phidot) const;
  double energy(std::span<const double> actions,
                std::span<const double> angles, double t) const;

private:
  int d_;
  bool include_h0_;
  sym::Tape tape_;
  struct TermRef {
    int mode_index;
    int slot;
  };
  std::vector<std::vector<int>> modes_;       // union mode list
  std::vector<std::vector<TermRef>> grads_;   // 2d gradient symbols
  std::vector<TermRef> energy_terms_;
  std::vector<int> axis_kmax_;
  mutable struct Scratch {
    std::vector<sym::Cx> regs;
    std::vector<std::vector<sym::Cx>> powers;  // per axis, slot for each k
  } scratch_;
  void compute_powers(std::span<const double> angles) const;
  sym::Cx mode_phase(int mode_index) const;
};

}  // namespace nek::dyn
