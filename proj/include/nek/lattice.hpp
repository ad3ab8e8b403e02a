#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace nek::lat {

using IntVec = std::vector<std::int64_t>;
using IntMat = std::vector<IntVec>;

// Canonical row Hermite normal form of the integer row span: pivots positive,
// pivot columns strictly increasing, entries above each pivot reduced into
// [0, pivot).  Unique per row lattice, so it doubles as an equality key.
IntMat hermite_normal_form(IntMat rows);

// Saturated subgroup of Z^d: the lattice points of the real span of its
// basis.  Basis rows are kept in canonical Hermite form.
class LatticeModule {
public:
  LatticeModule() = default;  // trivial module, rank 0 (dimension set later)
  static LatticeModule trivial(int d);

  int dim() const { return d_; }
  int rank() const { return s_; }
  const IntMat& basis() const { return basis_; }
  const std::vector<std::vector<double>>& projector() const {
    return projector_;
  }
  const std::string& key() const { return key_; }  // canonical equality key

  bool operator==(const LatticeModule& other) const {
    return d_ == other.d_ && key_ == other.key_;
  }

  // Integer membership k in M (equals real-span membership by saturation).
  bool contains(std::span<const int> k) const;
  // Is every basis vector of other inside this module?
  bool contains_module(const LatticeModule& other) const;

  // Orthogonal projection of a onto the real span.
  std::vector<double> project(std::span<const double> a) const;

  friend LatticeModule saturate(const std::vector<std::vector<int>>& vectors,
                                int d);

private:
  int d_ = 0, s_ = 0;
  IntMat basis_;
  std::vector<std::vector<double>> projector_;
  std::string key_;
  void finalize();
};

// Smallest saturated module containing the given vectors (divides out the
// elementary-divisor content via a unimodular diagonalization).  Idempotent.
LatticeModule saturate(const std::vector<std::vector<int>>& vectors, int d);

// All k != 0 with euclidean ||k|| <= bound, one representative per +-pair
// (first nonzero component positive), in lexicographic order.  The hard
// ceiling ||k|| <= 64 keeps zone searches bounded.
std::vector<std::vector<int>> enumerate_ball(int d, double bound);
inline constexpr double kEnumerationCap = 64.0;

struct GiorgilliResult {
  double bound = 0.0;
  double w_norm = 0.0;
  bool holds = false;
};

// Volume inequality: for independent u_1..u_s with ||u_j|| <= nbound and
// |<w, u_j>| <= alpha, w in their span, ||w|| <= s nbound^{s-1} alpha / Vol.
GiorgilliResult giorgilli_bound(const std::vector<std::vector<double>>& us,
                                std::span<const double> w, double alpha,
                                double nbound);

}  // namespace nek::lat
