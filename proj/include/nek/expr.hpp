#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace nek::sym {

using Cx = std::complex<double>;

// Variable identifier: 0..d-1 are action coordinates a_1..a_d, kTimeVar is t.
inline constexpr int kTimeVar = -1;

enum class ExprKind : std::uint8_t {
  Const,      // complex constant
  ActionVar,  // a_j
  TimeVar,    // t
  Add,        // n-ary sum
  Mul,        // n-ary product; an exactly-zero factor absorbs the product
  Pow,        // base ^ real exponent
  Exp,        // exp
  Bump,       // n-th derivative of the canonical bump, of a real argument
  ActionNorm,     // ||a||
  ActionBracket,  // <a> = sqrt(1 + ||a||^2)
};

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Immutable expression node.  Multiplication is absorbing: if any factor
// evaluates to exactly 0, the product is 0 without consulting the others.
// This gives the 1/(a.k) cutoff quotients their removable singularities.
class Expr {
public:
  ExprKind kind;
  Cx cval{0.0, 0.0};           // Const payload
  int index = 0;               // ActionVar coordinate, or Bump derivative order
  double expo = 1.0;           // Pow exponent
  std::vector<ExprPtr> kids;

  bool is_const() const { return kind == ExprKind::Const; }
  bool is_zero() const { return is_const() && cval == Cx{0.0, 0.0}; }
  bool is_one() const { return is_const() && cval == Cx{1.0, 0.0}; }
};

// Simplifying factories: constants folded, zero/one identities applied.
ExprPtr ex_const(Cx v);
ExprPtr ex_const(double v);
ExprPtr ex_action(int j);
ExprPtr ex_time();
ExprPtr ex_add(std::vector<ExprPtr> terms);
ExprPtr ex_add(ExprPtr a, ExprPtr b);
ExprPtr ex_sub(ExprPtr a, ExprPtr b);
ExprPtr ex_mul(std::vector<ExprPtr> factors);
ExprPtr ex_mul(ExprPtr a, ExprPtr b);
ExprPtr ex_neg(ExprPtr a);
ExprPtr ex_pow(ExprPtr base, double exponent);
ExprPtr ex_exp(ExprPtr x);
ExprPtr ex_bump(ExprPtr x, int order = 0);
ExprPtr ex_norm();
ExprPtr ex_jac();

struct EvalPoint {
  std::span<const double> actions;
  double time = 0.0;
};

// One-off DAG evaluation with per-call memoisation (shared nodes evaluated
// once).  For bulk sampling use Tape below.
Cx evaluate(const ExprPtr& e, const EvalPoint& p);

// Exact partial derivative with respect to variable `var` (action index or
// kTimeVar), produced as a new DAG via forward-mode rules.
ExprPtr derive(const ExprPtr& e, int var);

// Complex conjugate of the expression as a function of the (real) variables.
ExprPtr conjugate(const ExprPtr& e);

// Does the expression reference the action variables (directly or through
// ||a|| / <a>)?
bool depends_on_actions(const ExprPtr& e);

// Prefix-notation printer/parser; the grammar is documented in
// docs/formats.md and must stay in sync with symbol JSON files.
std::string to_prefix(const ExprPtr& e);
ExprPtr parse_prefix(const std::string& text, int dim);

// Flat instruction tape compiled from one or more DAG roots with structural
// (pointer) common-subexpression elimination.  run() is allocation-free given
// a reusable register vector.
class Tape {
public:
  int add_root(const ExprPtr& root);  // returns the root's register slot
  void run(std::span<const double> actions, double time,
           std::vector<Cx>& regs) const;
  std::size_t size() const { return code_.size(); }

private:
  struct Instr {
    ExprKind op;
    std::int32_t a = -1, b = -1;
    Cx cval{0.0, 0.0};
    double expo = 1.0;
    std::int32_t aux = 0;  // ActionVar coordinate / Bump order
  };
  int compile(const Expr* e);
  std::vector<Instr> code_;
  std::unordered_map<const Expr*, int> slots_;
  std::vector<ExprPtr> pinned_;  // keeps compiled DAGs alive
};

}  // namespace nek::sym
