#include "core/stl.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <set>

namespace stlmpc::stl {

namespace {

double clamp_rho(double v) { return std::clamp(v, -kRobustnessCap, kRobustnessCap); }

// Shortest decimal form that round-trips to the same double.
std::string format_number(double v) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

const char* cmp_str(Cmp c) {
  switch (c) {
    case Cmp::gt: return ">";
    case Cmp::ge: return ">=";
    case Cmp::lt: return "<";
    case Cmp::le: return "<=";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Tokenizer

enum class Tok {
  lparen, rparen, bang, amp, pipe,
  always, eventually, until, abs,
  ident, number,
  plus, minus, star, cmp,
  end,
};

struct Token {
  Tok kind;
  std::size_t pos;
  std::string text;  // ident
  double value = 0;  // number
  Cmp cmp = Cmp::ge;
};

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t pos = i;
    auto push = [&](Tok k) { out.push_back({k, pos, {}, 0, Cmp::ge}); };
    if (c == '(') { push(Tok::lparen); ++i; continue; }
    if (c == ')') { push(Tok::rparen); ++i; continue; }
    if (c == '!') { push(Tok::bang); ++i; continue; }
    if (c == '&') { push(Tok::amp); ++i; continue; }
    if (c == '|') { push(Tok::pipe); ++i; continue; }
    if (c == '+') { push(Tok::plus); ++i; continue; }
    if (c == '-') { push(Tok::minus); ++i; continue; }
    if (c == '*') { push(Tok::star); ++i; continue; }
    if (c == '>' || c == '<') {
      Cmp cm;
      if (i + 1 < n && text[i + 1] == '=') {
        cm = (c == '>') ? Cmp::ge : Cmp::le;
        i += 2;
      } else {
        cm = (c == '>') ? Cmp::gt : Cmp::lt;
        i += 1;
      }
      out.push_back({Tok::cmp, pos, {}, 0, cm});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
      const char* start = text.c_str() + i;
      char* endp = nullptr;
      const double v = std::strtod(start, &endp);
      if (endp == start) throw ParseError(pos, "bad number");
      i += static_cast<std::size_t>(endp - start);
      out.push_back({Tok::number, pos, {}, v, Cmp::ge});
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < n && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
      std::string word = text.substr(i, j - i);
      i = j;
      if (word == "G") { push(Tok::always); continue; }
      if (word == "F") { push(Tok::eventually); continue; }
      if (word == "U") { push(Tok::until); continue; }
      if (word == "abs") { push(Tok::abs); continue; }
      out.push_back({Tok::ident, pos, std::move(word), 0, Cmp::ge});
      continue;
    }
    throw ParseError(pos, std::string("unexpected character '") + c + "'");
  }
  out.push_back({Tok::end, n, {}, 0, Cmp::ge});
  return out;
}

// ---------------------------------------------------------------------------
// Recursive-descent parser. Parenthesized atoms are ambiguous between a
// formula and an arithmetic expression; the parser tries the formula route
// and rewinds on failure or when an arithmetic continuation follows.

class Parser {
 public:
  explicit Parser(const std::string& text) : toks_(tokenize(text)) {}

  FormulaPtr run() {
    FormulaPtr f = parse_or();
    expect(Tok::end, "end of input");
    return f;
  }

 private:
  const Token& peek() const { return toks_[i_]; }
  const Token& next() { return toks_[i_++]; }
  bool accept(Tok k) {
    if (peek().kind == k) { ++i_; return true; }
    return false;
  }
  void expect(Tok k, const char* what) {
    if (!accept(k)) throw ParseError(peek().pos, std::string("expected ") + what);
  }

  FormulaPtr parse_or() {
    FormulaPtr lhs = parse_and();
    while (accept(Tok::pipe)) lhs = make_binary(Formula::Kind::disjunction, lhs, parse_and());
    return lhs;
  }

  FormulaPtr parse_and() {
    FormulaPtr lhs = parse_until();
    while (accept(Tok::amp)) lhs = make_binary(Formula::Kind::conjunction, lhs, parse_until());
    return lhs;
  }

  FormulaPtr parse_until() {
    FormulaPtr lhs = parse_unary();
    if (accept(Tok::until)) return make_binary(Formula::Kind::until, lhs, parse_until());
    return lhs;
  }

  FormulaPtr parse_unary() {
    if (accept(Tok::bang)) return make_unary(Formula::Kind::negation, parse_unary());
    if (accept(Tok::always)) return make_unary(Formula::Kind::always, parse_unary());
    if (accept(Tok::eventually)) return make_unary(Formula::Kind::eventually, parse_unary());
    return parse_atom();
  }

  FormulaPtr parse_atom() {
    if (peek().kind == Tok::lparen) {
      const std::size_t mark = i_;
      ++i_;
      try {
        FormulaPtr f = parse_or();
        expect(Tok::rparen, "')'");
        const Tok after = peek().kind;
        if (after != Tok::cmp && after != Tok::plus && after != Tok::minus && after != Tok::star) {
          return f;
        }
      } catch (const ParseError&) {
        // fall through to the predicate route
      }
      i_ = mark;
    }
    return parse_predicate();
  }

  FormulaPtr parse_predicate() {
    ExprPtr lhs = parse_sum();
    if (peek().kind != Tok::cmp) throw ParseError(peek().pos, "expected comparison operator");
    const Cmp op = next().cmp;
    ExprPtr rhs = parse_sum();
    return make_pred(lhs, op, rhs);
  }

  ExprPtr parse_sum() {
    ExprPtr lhs = parse_term();
    for (;;) {
      if (accept(Tok::plus)) {
        lhs = expr_binary(Expr::Kind::add, lhs, parse_term());
      } else if (accept(Tok::minus)) {
        lhs = expr_binary(Expr::Kind::sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  ExprPtr parse_term() {
    ExprPtr lhs = parse_factor();
    while (accept(Tok::star)) lhs = expr_binary(Expr::Kind::mul, lhs, parse_factor());
    return lhs;
  }

  ExprPtr parse_factor() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::minus: {
        ++i_;
        if (peek().kind == Tok::number) return expr_const(-next().value);
        return expr_binary(Expr::Kind::mul, expr_const(-1.0), parse_factor());
      }
      case Tok::number:
        return expr_const(next().value);
      case Tok::ident:
        return expr_name(next().text);
      case Tok::abs: {
        ++i_;
        expect(Tok::lparen, "'(' after abs");
        ExprPtr inner = parse_sum();
        expect(Tok::rparen, "')'");
        return expr_abs(inner);
      }
      case Tok::lparen: {
        ++i_;
        ExprPtr inner = parse_sum();
        expect(Tok::rparen, "')'");
        return inner;
      }
      default:
        throw ParseError(t.pos, "expected signal expression");
    }
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
};

// ---------------------------------------------------------------------------
// Printing

bool expr_is_leaf(const Expr& e) {
  return e.kind == Expr::Kind::name || e.kind == Expr::Kind::constant || e.kind == Expr::Kind::abs;
}

std::string expr_str(const Expr& e);

std::string expr_wrap(const Expr& e) {
  return expr_is_leaf(e) ? expr_str(e) : "(" + expr_str(e) + ")";
}

std::string expr_str(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::name: return e.name;
    case Expr::Kind::constant: return format_number(e.value);
    case Expr::Kind::add: return expr_wrap(*e.lhs) + " + " + expr_wrap(*e.rhs);
    case Expr::Kind::sub: return expr_wrap(*e.lhs) + " - " + expr_wrap(*e.rhs);
    case Expr::Kind::mul: return expr_wrap(*e.lhs) + " * " + expr_wrap(*e.rhs);
    case Expr::Kind::abs: return "abs(" + expr_str(*e.lhs) + ")";
  }
  return "?";
}

std::string formula_wrap(const Formula& f) { return "(" + to_string(f) + ")"; }

}  // namespace

std::string to_string(const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::pred:
      return expr_str(*f.lhs_expr) + " " + cmp_str(f.cmp) + " " + expr_str(*f.rhs_expr);
    case Formula::Kind::negation: return "!" + formula_wrap(*f.left);
    case Formula::Kind::conjunction: return formula_wrap(*f.left) + " & " + formula_wrap(*f.right);
    case Formula::Kind::disjunction: return formula_wrap(*f.left) + " | " + formula_wrap(*f.right);
    case Formula::Kind::always: return "G " + formula_wrap(*f.left);
    case Formula::Kind::eventually: return "F " + formula_wrap(*f.left);
    case Formula::Kind::until: return formula_wrap(*f.left) + " U " + formula_wrap(*f.right);
  }
  return "?";
}

FormulaPtr parse(const std::string& text) { return Parser(text).run(); }

namespace {
void collect_names(const Expr& e, std::set<std::string>& out) {
  if (e.kind == Expr::Kind::name) out.insert(e.name);
  if (e.lhs) collect_names(*e.lhs, out);
  if (e.rhs) collect_names(*e.rhs, out);
}
void collect_names(const Formula& f, std::set<std::string>& out) {
  if (f.kind == Formula::Kind::pred) {
    collect_names(*f.lhs_expr, out);
    collect_names(*f.rhs_expr, out);
    return;
  }
  if (f.left) collect_names(*f.left, out);
  if (f.right) collect_names(*f.right, out);
}
}  // namespace

std::vector<std::string> referenced_names(const Formula& f) {
  std::set<std::string> s;
  collect_names(f, s);
  return {s.begin(), s.end()};
}

// ---------------------------------------------------------------------------
// Construction helpers

ExprPtr expr_name(std::string name) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::name;
  e->name = std::move(name);
  return e;
}
ExprPtr expr_const(double v) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::constant;
  e->value = v;
  return e;
}
ExprPtr expr_binary(Expr::Kind kind, ExprPtr lhs, ExprPtr rhs) {
  auto e = std::make_shared<Expr>();
  e->kind = kind;
  e->lhs = std::move(lhs);
  e->rhs = std::move(rhs);
  return e;
}
ExprPtr expr_abs(ExprPtr inner) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::abs;
  e->lhs = std::move(inner);
  return e;
}
FormulaPtr make_pred(ExprPtr lhs, Cmp cmp, ExprPtr rhs) {
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Kind::pred;
  f->lhs_expr = std::move(lhs);
  f->rhs_expr = std::move(rhs);
  f->cmp = cmp;
  return f;
}
FormulaPtr make_unary(Formula::Kind kind, FormulaPtr child) {
  auto f = std::make_shared<Formula>();
  f->kind = kind;
  f->left = std::move(child);
  return f;
}
FormulaPtr make_binary(Formula::Kind kind, FormulaPtr left, FormulaPtr right) {
  auto f = std::make_shared<Formula>();
  f->kind = kind;
  f->left = std::move(left);
  f->right = std::move(right);
  return f;
}

// ---------------------------------------------------------------------------
// BoundFormula

void BoundFormula::compile_expr(const Expr& e, const std::vector<std::string>& names,
                                std::vector<Node::ExprOp>& out) {
  switch (e.kind) {
    case Expr::Kind::name: {
      const auto it = std::find(names.begin(), names.end(), e.name);
      if (it == names.end()) {
        fail(ErrorCode::unknown_name, "unknown dimension name '" + e.name + "'");
      }
      out.push_back({e.kind, static_cast<int>(it - names.begin()), 0.0});
      return;
    }
    case Expr::Kind::constant:
      out.push_back({e.kind, -1, e.value});
      return;
    case Expr::Kind::abs:
      compile_expr(*e.lhs, names, out);
      out.push_back({e.kind, -1, 0.0});
      return;
    default:
      compile_expr(*e.lhs, names, out);
      compile_expr(*e.rhs, names, out);
      out.push_back({e.kind, -1, 0.0});
      return;
  }
}

double BoundFormula::eval_expr(const std::vector<Node::ExprOp>& prog, const Vec& sample) {
  std::array<double, 64> stack;
  std::size_t sp = 0;
  for (const auto& op : prog) {
    switch (op.kind) {
      case Expr::Kind::name: stack[sp++] = sample[static_cast<std::size_t>(op.dim)]; break;
      case Expr::Kind::constant: stack[sp++] = op.value; break;
      case Expr::Kind::abs: stack[sp - 1] = std::fabs(stack[sp - 1]); break;
      case Expr::Kind::add: --sp; stack[sp - 1] += stack[sp]; break;
      case Expr::Kind::sub: --sp; stack[sp - 1] -= stack[sp]; break;
      case Expr::Kind::mul: --sp; stack[sp - 1] *= stack[sp]; break;
    }
  }
  return stack[0];
}

int BoundFormula::compile(const Formula& f, const std::vector<std::string>& names) {
  Node node;
  node.kind = f.kind;
  if (f.kind == Formula::Kind::pred) {
    node.cmp = f.cmp;
    compile_expr(*f.lhs_expr, names, node.lhs_prog);
    compile_expr(*f.rhs_expr, names, node.rhs_prog);
    if (node.lhs_prog.size() > 60 || node.rhs_prog.size() > 60) {
      fail(ErrorCode::invalid_argument, "signal expression too deep");
    }
  } else {
    if (f.left) node.left = compile(*f.left, names);
    if (f.right) node.right = compile(*f.right, names);
  }
  nodes_.push_back(std::move(node));
  return static_cast<int>(nodes_.size() - 1);
}

BoundFormula::BoundFormula(const Formula& f, const std::vector<std::string>& names) {
  root_ = compile(f, names);
}

double BoundFormula::robustness(std::span<const Vec> samples, std::size_t t) const {
  const std::size_t T = samples.size();
  if (T == 0 || t >= T) {
    fail(ErrorCode::invalid_argument,
         "time index " + std::to_string(t) + " out of range for trace of length " + std::to_string(T));
  }
  if (scratch_.size() != nodes_.size()) scratch_.resize(nodes_.size());
  for (auto& row : scratch_) row.resize(T);

  for (std::size_t ni = 0; ni < nodes_.size(); ++ni) {
    const Node& node = nodes_[ni];
    std::vector<double>& out = scratch_[ni];
    switch (node.kind) {
      case Formula::Kind::pred: {
        const bool upper = (node.cmp == Cmp::lt || node.cmp == Cmp::le);
        for (std::size_t k = 0; k < T; ++k) {
          const double l = eval_expr(node.lhs_prog, samples[k]);
          const double r = eval_expr(node.rhs_prog, samples[k]);
          out[k] = clamp_rho(upper ? r - l : l - r);
        }
        break;
      }
      case Formula::Kind::negation: {
        const auto& a = scratch_[static_cast<std::size_t>(node.left)];
        for (std::size_t k = 0; k < T; ++k) out[k] = -a[k];
        break;
      }
      case Formula::Kind::conjunction: {
        const auto& a = scratch_[static_cast<std::size_t>(node.left)];
        const auto& b = scratch_[static_cast<std::size_t>(node.right)];
        for (std::size_t k = 0; k < T; ++k) out[k] = std::min(a[k], b[k]);
        break;
      }
      case Formula::Kind::disjunction: {
        const auto& a = scratch_[static_cast<std::size_t>(node.left)];
        const auto& b = scratch_[static_cast<std::size_t>(node.right)];
        for (std::size_t k = 0; k < T; ++k) out[k] = std::max(a[k], b[k]);
        break;
      }
      case Formula::Kind::always: {
        const auto& a = scratch_[static_cast<std::size_t>(node.left)];
        double acc = kRobustnessCap;
        for (std::size_t k = T; k-- > 0;) {
          acc = std::min(acc, a[k]);
          out[k] = acc;
        }
        break;
      }
      case Formula::Kind::eventually: {
        const auto& a = scratch_[static_cast<std::size_t>(node.left)];
        double acc = -kRobustnessCap;
        for (std::size_t k = T; k-- > 0;) {
          acc = std::max(acc, a[k]);
          out[k] = acc;
        }
        break;
      }
      case Formula::Kind::until: {
        // U[k] = max(rho2[k], min(rho1[k], U[k+1])); the k'=k candidate has an
        // empty inf over [k,k), treated as +cap.
        const auto& r1 = scratch_[static_cast<std::size_t>(node.left)];
        const auto& r2 = scratch_[static_cast<std::size_t>(node.right)];
        out[T - 1] = r2[T - 1];
        for (std::size_t k = T - 1; k-- > 0;) {
          out[k] = std::max(r2[k], std::min(r1[k], out[k + 1]));
        }
        break;
      }
    }
  }
  return scratch_[static_cast<std::size_t>(root_)][t];
}

double robustness(const Formula& f, const Trajectory& traj, std::size_t t) {
  BoundFormula bound(f, traj.names);
  return bound.robustness(traj.samples, t);
}

// ---------------------------------------------------------------------------
// Boolean evaluator (independent of the quantitative path)

namespace {

double sat_eval_expr(const Expr& e, const Vec& sample, const std::map<std::string, std::size_t>& idx) {
  switch (e.kind) {
    case Expr::Kind::name: {
      const auto it = idx.find(e.name);
      if (it == idx.end()) fail(ErrorCode::unknown_name, "unknown dimension name '" + e.name + "'");
      return sample[it->second];
    }
    case Expr::Kind::constant: return e.value;
    case Expr::Kind::add: return sat_eval_expr(*e.lhs, sample, idx) + sat_eval_expr(*e.rhs, sample, idx);
    case Expr::Kind::sub: return sat_eval_expr(*e.lhs, sample, idx) - sat_eval_expr(*e.rhs, sample, idx);
    case Expr::Kind::mul: return sat_eval_expr(*e.lhs, sample, idx) * sat_eval_expr(*e.rhs, sample, idx);
    case Expr::Kind::abs: return std::fabs(sat_eval_expr(*e.lhs, sample, idx));
  }
  return 0.0;
}

bool sat_rec(const Formula& f, const std::vector<Vec>& samples,
             const std::map<std::string, std::size_t>& idx, std::size_t t) {
  const std::size_t T = samples.size();
  switch (f.kind) {
    case Formula::Kind::pred: {
      const double l = sat_eval_expr(*f.lhs_expr, samples[t], idx);
      const double r = sat_eval_expr(*f.rhs_expr, samples[t], idx);
      switch (f.cmp) {
        case Cmp::gt: return l > r;
        case Cmp::ge: return l >= r;
        case Cmp::lt: return l < r;
        case Cmp::le: return l <= r;
      }
      return false;
    }
    case Formula::Kind::negation: return !sat_rec(*f.left, samples, idx, t);
    case Formula::Kind::conjunction:
      return sat_rec(*f.left, samples, idx, t) && sat_rec(*f.right, samples, idx, t);
    case Formula::Kind::disjunction:
      return sat_rec(*f.left, samples, idx, t) || sat_rec(*f.right, samples, idx, t);
    case Formula::Kind::always:
      for (std::size_t k = t; k < T; ++k) {
        if (!sat_rec(*f.left, samples, idx, k)) return false;
      }
      return true;
    case Formula::Kind::eventually:
      for (std::size_t k = t; k < T; ++k) {
        if (sat_rec(*f.left, samples, idx, k)) return true;
      }
      return false;
    case Formula::Kind::until:
      for (std::size_t k = t; k < T; ++k) {
        if (sat_rec(*f.right, samples, idx, k)) {
          bool held = true;
          for (std::size_t j = t; j < k; ++j) {
            if (!sat_rec(*f.left, samples, idx, j)) { held = false; break; }
          }
          if (held) return true;
        }
      }
      return false;
  }
  return false;
}

}  // namespace

bool satisfies(const Formula& f, const Trajectory& traj, std::size_t t) {
  if (traj.samples.empty() || t >= traj.samples.size()) {
    fail(ErrorCode::invalid_argument, "time index out of range");
  }
  std::map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < traj.names.size(); ++i) idx[traj.names[i]] = i;
  return sat_rec(f, traj.samples, idx, t);
}

}  // namespace stlmpc::stl
