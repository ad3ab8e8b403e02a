#include "nek/expr.hpp"

#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "nek/bump.hpp"
#include "nek/errors.hpp"

namespace nek::sym {
namespace {

ExprPtr make(ExprKind k) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  return e;
}

bool nearly_integer(double x) { return x == std::floor(x); }

}  // namespace

ExprPtr ex_const(Cx v) {
  auto e = make(ExprKind::Const);
  std::const_pointer_cast<Expr>(e)->cval = v;
  return e;
}

ExprPtr ex_const(double v) { return ex_const(Cx{v, 0.0}); }

ExprPtr ex_action(int j) {
  if (j < 0) throw std::invalid_argument("ex_action: negative index");
  auto e = make(ExprKind::ActionVar);
  std::const_pointer_cast<Expr>(e)->index = j;
  return e;
}

ExprPtr ex_time() { return make(ExprKind::TimeVar); }

ExprPtr ex_add(std::vector<ExprPtr> terms) {
  std::vector<ExprPtr> kids;
  Cx c{0.0, 0.0};
  for (auto& t : terms) {
    if (!t) throw std::invalid_argument("ex_add: null operand");
    if (t->kind == ExprKind::Add) {
      for (auto& k : t->kids) {
        if (k->is_const())
          c += k->cval;
        else
          kids.push_back(k);
      }
    } else if (t->is_const()) {
      c += t->cval;
    } else {
      kids.push_back(std::move(t));
    }
  }
  if (c != Cx{0.0, 0.0}) kids.push_back(ex_const(c));
  if (kids.empty()) return ex_const(0.0);
  if (kids.size() == 1) return kids.front();
  auto e = make(ExprKind::Add);
  std::const_pointer_cast<Expr>(e)->kids = std::move(kids);
  return e;
}

ExprPtr ex_add(ExprPtr a, ExprPtr b) {
  return ex_add(std::vector<ExprPtr>{std::move(a), std::move(b)});
}

ExprPtr ex_sub(ExprPtr a, ExprPtr b) {
  return ex_add(std::move(a), ex_neg(std::move(b)));
}

ExprPtr ex_mul(std::vector<ExprPtr> factors) {
  std::vector<ExprPtr> kids;
  Cx c{1.0, 0.0};
  for (auto& f : factors) {
    if (!f) throw std::invalid_argument("ex_mul: null operand");
    if (f->is_zero()) return ex_const(0.0);
    if (f->kind == ExprKind::Mul) {
      for (auto& k : f->kids) {
        if (k->is_const())
          c *= k->cval;
        else
          kids.push_back(k);
      }
    } else if (f->is_const()) {
      c *= f->cval;
    } else {
      kids.push_back(std::move(f));
    }
  }
  if (c == Cx{0.0, 0.0}) return ex_const(0.0);
  if (c != Cx{1.0, 0.0}) kids.push_back(ex_const(c));
  if (kids.empty()) return ex_const(1.0);
  if (kids.size() == 1) return kids.front();
  auto e = make(ExprKind::Mul);
  std::const_pointer_cast<Expr>(e)->kids = std::move(kids);
  return e;
}

ExprPtr ex_mul(ExprPtr a, ExprPtr b) {
  return ex_mul(std::vector<ExprPtr>{std::move(a), std::move(b)});
}

ExprPtr ex_neg(ExprPtr a) { return ex_mul(ex_const(-1.0), std::move(a)); }

ExprPtr ex_pow(ExprPtr base, double exponent) {
  if (!base) throw std::invalid_argument("ex_pow: null base");
  if (exponent == 0.0) return ex_const(1.0);
  if (exponent == 1.0) return base;
  if (base->is_const()) return ex_const(std::pow(base->cval, exponent));
  auto e = make(ExprKind::Pow);
  auto* m = std::const_pointer_cast<Expr>(e).get();
  m->kids = {std::move(base)};
  m->expo = exponent;
  return e;
}

ExprPtr ex_exp(ExprPtr x) {
  if (!x) throw std::invalid_argument("ex_exp: null operand");
  if (x->is_const()) return ex_const(std::exp(x->cval));
  auto e = make(ExprKind::Exp);
  std::const_pointer_cast<Expr>(e)->kids = {std::move(x)};
  return e;
}

ExprPtr ex_bump(ExprPtr x, int order) {
  if (!x) throw std::invalid_argument("ex_bump: null operand");
  if (order < 0 || order > cut::kBumpMaxDerivative)
    throw std::invalid_argument("ex_bump: derivative order out of range");
  if (x->is_const())
    return ex_const(cut::bump_derivative(order, x->cval.real()));
  auto e = make(ExprKind::Bump);
  auto* m = std::const_pointer_cast<Expr>(e).get();
  m->kids = {std::move(x)};
  m->index = order;
  return e;
}

ExprPtr ex_norm() { return make(ExprKind::ActionNorm); }
ExprPtr ex_jac() { return make(ExprKind::ActionBracket); }

namespace {

Cx eval_node(const Expr* e, const EvalPoint& p,
             std::unordered_map<const Expr*, Cx>& memo) {
  auto it = memo.find(e);
  if (it != memo.end()) return it->second;
  Cx v;
  switch (e->kind) {
    case ExprKind::Const:
      v = e->cval;
      break;
    case ExprKind::ActionVar:
      if (e->index >= static_cast<int>(p.actions.size()))
        throw NumericalError("expression refers to action index beyond dimension");
      v = Cx{p.actions[e->index], 0.0};
      break;
    case ExprKind::TimeVar:
      v = Cx{p.time, 0.0};
      break;
    case ExprKind::Add: {
      v = Cx{0.0, 0.0};
      for (const auto& k : e->kids) v += eval_node(k.get(), p, memo);
      break;
    }
    case ExprKind::Mul: {
      v = Cx{1.0, 0.0};
      for (const auto& k : e->kids) {
        Cx f = eval_node(k.get(), p, memo);
        if (f == Cx{0.0, 0.0}) {
          v = Cx{0.0, 0.0};
          break;
        }
        v *= f;
      }
      break;
    }
    case ExprKind::Pow:
      v = std::pow(eval_node(e->kids[0].get(), p, memo), e->expo);
      break;
    case ExprKind::Exp:
      v = std::exp(eval_node(e->kids[0].get(), p, memo));
      break;
    case ExprKind::Bump:
      v = Cx{cut::bump_derivative(
                 e->index, eval_node(e->kids[0].get(), p, memo).real()),
             0.0};
      break;
    case ExprKind::ActionNorm: {
      double s = 0.0;
      for (double a : p.actions) s += a * a;
      v = Cx{std::sqrt(s), 0.0};
      break;
    }
    case ExprKind::ActionBracket: {
      double s = 1.0;
      for (double a : p.actions) s += a * a;
      v = Cx{std::sqrt(s), 0.0};
      break;
    }
  }
  memo.emplace(e, v);
  return v;
}

}  // namespace

Cx evaluate(const ExprPtr& e, const EvalPoint& p) {
  std::unordered_map<const Expr*, Cx> memo;
  return eval_node(e.get(), p, memo);
}

namespace {

ExprPtr derive_node(const ExprPtr& e, int var,
                    std::unordered_map<const Expr*, ExprPtr>& memo) {
  auto it = memo.find(e.get());
  if (it != memo.end()) return it->second;
  ExprPtr d;
  switch (e->kind) {
    case ExprKind::Const:
      d = ex_const(0.0);
      break;
    case ExprKind::ActionVar:
      d = ex_const(e->index == var ? 1.0 : 0.0);
      break;
    case ExprKind::TimeVar:
      d = ex_const(var == kTimeVar ? 1.0 : 0.0);
      break;
    case ExprKind::Add: {
      std::vector<ExprPtr> terms;
      terms.reserve(e->kids.size());
      for (const auto& k : e->kids) terms.push_back(derive_node(k, var, memo));
      d = ex_add(std::move(terms));
      break;
    }
    case ExprKind::Mul: {
      std::vector<ExprPtr> terms;
      for (std::size_t i = 0; i < e->kids.size(); ++i) {
        std::vector<ExprPtr> factors;
        factors.push_back(derive_node(e->kids[i], var, memo));
        for (std::size_t j = 0; j < e->kids.size(); ++j)
          if (j != i) factors.push_back(e->kids[j]);
        terms.push_back(ex_mul(std::move(factors)));
      }
      d = ex_add(std::move(terms));
      break;
    }
    case ExprKind::Pow:
      d = ex_mul({ex_const(e->expo), ex_pow(e->kids[0], e->expo - 1.0),
                  derive_node(e->kids[0], var, memo)});
      break;
    case ExprKind::Exp: {
      ExprPtr self = std::const_pointer_cast<const Expr>(e);
      d = ex_mul(self, derive_node(e->kids[0], var, memo));
      break;
    }
    case ExprKind::Bump:
      d = ex_mul(ex_bump(e->kids[0], e->index + 1),
                 derive_node(e->kids[0], var, memo));
      break;
    case ExprKind::ActionNorm:
      d = (var == kTimeVar)
              ? ex_const(0.0)
              : ex_mul(ex_action(var), ex_pow(ex_norm(), -1.0));
      break;
    case ExprKind::ActionBracket:
      d = (var == kTimeVar)
              ? ex_const(0.0)
              : ex_mul(ex_action(var), ex_pow(ex_jac(), -1.0));
      break;
  }
  memo.emplace(e.get(), d);
  return d;
}

}  // namespace

ExprPtr derive(const ExprPtr& e, int var) {
  if (!e) throw std::invalid_argument("derive: null expression");
  std::unordered_map<const Expr*, ExprPtr> memo;
  return derive_node(e, var, memo);
}

namespace {

ExprPtr conj_node(const ExprPtr& e,
                  std::unordered_map<const Expr*, ExprPtr>& memo) {
  auto it = memo.find(e.get());
  if (it != memo.end()) return it->second;
  ExprPtr c;
  switch (e->kind) {
    case ExprKind::Const:
      c = ex_const(std::conj(e->cval));
      break;
    case ExprKind::ActionVar:
    case ExprKind::TimeVar:
    case ExprKind::ActionNorm:
    case ExprKind::ActionBracket:
      c = e;
      break;
    case ExprKind::Add: {
      std::vector<ExprPtr> kids;
      for (const auto& k : e->kids) kids.push_back(conj_node(k, memo));
      c = ex_add(std::move(kids));
      break;
    }
    case ExprKind::Mul: {
      std::vector<ExprPtr> kids;
      for (const auto& k : e->kids) kids.push_back(conj_node(k, memo));
      c = ex_mul(std::move(kids));
      break;
    }
    case ExprKind::Pow:
      c = ex_pow(conj_node(e->kids[0], memo), e->expo);
      break;
    case ExprKind::Exp:
      c = ex_exp(conj_node(e->kids[0], memo));
      break;
    case ExprKind::Bump:
      c = ex_bump(conj_node(e->kids[0], memo), e->index);
      break;
  }
  memo.emplace(e.get(), c);
  return c;
}

}  // namespace

ExprPtr conjugate(const ExprPtr& e) {
  if (!e) throw std::invalid_argument("conjugate: null expression");
  std::unordered_map<const Expr*, ExprPtr> memo;
  return conj_node(e, memo);
}

namespace {

bool deps_actions(const Expr* e, std::unordered_map<const Expr*, bool>& memo) {
  auto it = memo.find(e);
  if (it != memo.end()) return it->second;
  bool dep = false;
  switch (e->kind) {
    case ExprKind::ActionVar:
    case ExprKind::ActionNorm:
    case ExprKind::ActionBracket:
      dep = true;
      break;
    default:
      for (const auto& k : e->kids)
        if (deps_actions(k.get(), memo)) {
          dep = true;
          break;
        }
      break;
  }
  memo.emplace(e, dep);
  return dep;
}

}  // namespace

bool depends_on_actions(const ExprPtr& e) {
  std::unordered_map<const Expr*, bool> memo;
  return deps_actions(e.get(), memo);
}

namespace {

void print_node(const Expr* e, std::ostream& os) {
  switch (e->kind) {
    case ExprKind::Const: {
      std::ostringstream tmp;
      tmp.precision(17);
      if (e->cval.imag() == 0.0)
        tmp << e->cval.real();
      else
        tmp << "(const " << e->cval.real() << " " << e->cval.imag() << ")";
      os << tmp.str();
      break;
    }
    case ExprKind::ActionVar:
      os << "a" << (e->index + 1);
      break;
    case ExprKind::TimeVar:
      os << "t";
      break;
    case ExprKind::Add:
    case ExprKind::Mul:
      os << (e->kind == ExprKind::Add ? "(+" : "(*");
      for (const auto& k : e->kids) {
        os << " ";
        print_node(k.get(), os);
      }
      os << ")";
      break;
    case ExprKind::Pow: {
      std::ostringstream tmp;
      tmp.precision(17);
      tmp << e->expo;
      os << "(^ ";
      print_node(e->kids[0].get(), os);
      os << " " << tmp.str() << ")";
      break;
    }
    case ExprKind::Exp:
      os << "(exp ";
      print_node(e->kids[0].get(), os);
      os << ")";
      break;
    case ExprKind::Bump:
      if (e->index == 0) {
        os << "(bump ";
        print_node(e->kids[0].get(), os);
        os << ")";
      } else {
        os << "(bumpd " << e->index << " ";
        print_node(e->kids[0].get(), os);
        os << ")";
      }
      break;
    case ExprKind::ActionNorm:
      os << "norm";
      break;
    case ExprKind::ActionBracket:
      os << "jac";
      break;
  }
}

struct Lexer {
  const std::string& s;
  std::size_t pos = 0;
  std::string next() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
      ++pos;
    if (pos >= s.size()) return {};
    if (s[pos] == '(' || s[pos] == ')') return std::string(1, s[pos++]);
    std::size_t start = pos;
    while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos])) &&
           s[pos] != '(' && s[pos] != ')')
      ++pos;
    return s.substr(start, pos - start);
  }
};

bool parse_number(const std::string& tok, double& out) {
  if (tok.empty()) return false;
  char* end = nullptr;
  out = std::strtod(tok.c_str(), &end);
  return end == tok.c_str() + tok.size();
}

ExprPtr parse_expr(Lexer& lex, int dim);

ExprPtr parse_atom(const std::string& tok, int dim) {
  if (tok == "t") return ex_time();
  if (tok == "norm") return ex_norm();
  if (tok == "jac") return ex_jac();
  if (tok.size() >= 2 && tok[0] == 'a') {
    double idx;
    if (parse_number(tok.substr(1), idx) && nearly_integer(idx)) {
      int j = static_cast<int>(idx);
      if (j < 1 || j > dim)
        throw ConfigError("expression parse: action index out of range in '" +
                          tok + "'");
      return ex_action(j - 1);
    }
  }
  double v;
  if (parse_number(tok, v)) return ex_const(v);
  throw ConfigError("expression parse: unknown token '" + tok + "'");
}

ExprPtr parse_list(Lexer& lex, int dim) {
  std::string head = lex.next();
  if (head.empty()) throw ConfigError("expression parse: unexpected end");
  auto read_args = [&](std::size_t min_n) {
    std::vector<ExprPtr> args;
    for (;;) {
      std::size_t save = lex.pos;
      std::string tok = lex.next();
      if (tok == ")") break;
      if (tok.empty()) throw ConfigError("expression parse: missing ')'");
      lex.pos = save;
      args.push_back(parse_expr(lex, dim));
    }
    if (args.size() < min_n)
      throw ConfigError("expression parse: too few operands for '" + head +
                        "'");
    return args;
  };
  if (head == "+") return ex_add(read_args(1));
  if (head == "*") return ex_mul(read_args(1));
  if (head == "^") {
    auto args = read_args(2);
    if (args.size() != 2 || !args[1]->is_const())
      throw ConfigError("expression parse: '^' needs base and literal exponent");
    return ex_pow(args[0], args[1]->cval.real());
  }
  if (head == "exp") {
    auto args = read_args(1);
    if (args.size() != 1) throw ConfigError("expression parse: exp arity");
    return ex_exp(args[0]);
  }
  if (head == "bump") {
    auto args = read_args(1);
    if (args.size() != 1) throw ConfigError("expression parse: bump arity");
    return ex_bump(args[0], 0);
  }
  if (head == "bumpd") {
    auto args = read_args(2);
    if (args.size() != 2 || !args[0]->is_const())
      throw ConfigError("expression parse: bumpd needs literal order");
    return ex_bump(args[1], static_cast<int>(args[0]->cval.real()));
  }
  if (head == "const") {
    auto args = read_args(1);
    if (args.size() == 1) return args[0];
    if (args.size() == 2 && args[0]->is_const() && args[1]->is_const())
      return ex_const(Cx{args[0]->cval.real(), args[1]->cval.real()});
    throw ConfigError("expression parse: const arity");
  }
  if (head == "norm") {
    if (lex.next() != ")") throw ConfigError("expression parse: norm arity");
    return ex_norm();
  }
  if (head == "jac") {
    if (lex.next() != ")") throw ConfigError("expression parse: jac arity");
    return ex_jac();
  }
  throw ConfigError("expression parse: unknown operator '" + head + "'");
}

ExprPtr parse_expr(Lexer& lex, int dim) {
  std::string tok = lex.next();
  if (tok.empty()) throw ConfigError("expression parse: empty input");
  if (tok == "(") return parse_list(lex, dim);
  if (tok == ")") throw ConfigError("expression parse: unexpected ')'");
  return parse_atom(tok, dim);
}

}  // namespace

std::string to_prefix(const ExprPtr& e) {
  std::ostringstream os;
  print_node(e.get(), os);
  return os.str();
}

ExprPtr parse_prefix(const std::string& text, int dim) {
  Lexer lex{text};
  ExprPtr e = parse_expr(lex, dim);
  std::string rest = lex.next();
  if (!rest.empty())
    throw ConfigError("expression parse: trailing tokens near '" + rest + "'");
  return e;
}

int Tape::add_root(const ExprPtr& root) {
  if (!root) throw std::invalid_argument("Tape: null root");
  pinned_.push_back(root);
  return compile(root.get());
}

int Tape::compile(const Expr* e) {
  auto it = slots_.find(e);
  if (it != slots_.end()) return it->second;
  Instr ins;
  ins.op = e->kind;
  int slot = -1;
  switch (e->kind) {
    case ExprKind::Const:
      ins.cval = e->cval;
      break;
    case ExprKind::ActionVar:
    case ExprKind::Bump:
      ins.aux = e->index;
      break;
    case ExprKind::Pow:
      ins.expo = e->expo;
      break;
    default:
      break;
  }
  switch (e->kind) {
    case ExprKind::Add:
    case ExprKind::Mul: {
      int acc = compile(e->kids[0].get());
      for (std::size_t i = 1; i < e->kids.size(); ++i) {
        Instr chain;
        chain.op = e->kind;
        chain.a = acc;
        chain.b = compile(e->kids[i].get());
        code_.push_back(chain);
        acc = static_cast<int>(code_.size()) - 1;
      }
      slot = acc;
      break;
    }
    case ExprKind::Pow:
    case ExprKind::Exp:
    case ExprKind::Bump:
      ins.a = compile(e->kids[0].get());
      code_.push_back(ins);
      slot = static_cast<int>(code_.size()) - 1;
      break;
    default:
      code_.push_back(ins);
      slot = static_cast<int>(code_.size()) - 1;
      break;
  }
  slots_.emplace(e, slot);
  return slot;
}

void Tape::run(std::span<const double> actions, double time,
               std::vector<Cx>& regs) const {
  regs.resize(code_.size());
  for (std::size_t i = 0; i < code_.size(); ++i) {
    const Instr& ins = code_[i];
    switch (ins.op) {
      case ExprKind::Const:
        regs[i] = ins.cval;
        break;
      case ExprKind::ActionVar:
        regs[i] = Cx{actions[ins.aux], 0.0};
        break;
      case ExprKind::TimeVar:
        regs[i] = Cx{time, 0.0};
        break;
      case ExprKind::Add:
        regs[i] = regs[ins.a] + regs[ins.b];
        break;
      case ExprKind::Mul: {
        const Cx& x = regs[ins.a];
        const Cx& y = regs[ins.b];
        regs[i] = (x == Cx{0.0, 0.0} || y == Cx{0.0, 0.0}) ? Cx{0.0, 0.0}
                                                           : x * y;
        break;
      }
      case ExprKind::Pow: {
        const Cx& b = regs[ins.a];
        if (b.imag() == 0.0 && b.real() > 0.0)
          regs[i] = Cx{std::pow(b.real(), ins.expo), 0.0};
        else
          regs[i] = std::pow(b, ins.expo);
        break;
      }
      case ExprKind::Exp: {
        const Cx& x = regs[ins.a];
        if (x.imag() == 0.0)
          regs[i] = Cx{std::exp(x.real()), 0.0};
        else
          regs[i] = std::exp(x);
        break;
      }
      case ExprKind::Bump:
        regs[i] = Cx{cut::bump_derivative(ins.aux, regs[ins.a].real()), 0.0};
        break;
      case ExprKind::ActionNorm: {
        double s = 0.0;
        for (double a : actions) s += a * a;
        regs[i] = Cx{std::sqrt(s), 0.0};
        break;
      }
      case ExprKind::ActionBracket: {
        double s = 1.0;
        for (double a : actions) s += a * a;
        regs[i] = Cx{std::sqrt(s), 0.0};
        break;
      }
    }
  }
}

}  // namespace nek::sym
