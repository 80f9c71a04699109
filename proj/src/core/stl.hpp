#pragma once

#include <memory>
#include <string>
#include <vector>

#include "core/trace.hpp"

namespace stlmpc::stl {

// Robustness values are clamped to +/- this cap so the empty-range infimum
// in Until and derived encodings stay finite.
constexpr double kRobustnessCap = 1e9;

/// Arithmetic expression over named signal dimensions.
struct Expr {
  enum class Kind { name, constant, add, sub, mul, abs };

  Kind kind;
  std::string name;       // kind == name
  double value = 0.0;     // kind == constant
  std::shared_ptr<const Expr> lhs, rhs;
};

using ExprPtr = std::shared_ptr<const Expr>;

enum class Cmp { gt, ge, lt, le };

struct Formula {
  enum class Kind { pred, negation, conjunction, disjunction, always, eventually, until };

  Kind kind;
  // pred
  ExprPtr lhs_expr, rhs_expr;
  Cmp cmp = Cmp::ge;
  // everything else
  std::shared_ptr<const Formula> left, right;
};

using FormulaPtr = std::shared_ptr<const Formula>;

struct ParseError : Error {
  ParseError(std::size_t position, const std::string& msg)
      : Error(ErrorCode::parse, "parse error at position " + std::to_string(position) + ": " + msg),
        position(position) {}
  std::size_t position;
};

/// Parses the textual grammar: predicates `expr (>|>=|<|<=) expr` over
/// `name | number | + | - | * | abs(...)`, Boolean `! & |`, temporal
/// `G`, `F` and infix `U`. Precedence: ! and unary temporal bind tightest,
/// then U, then &, then |.
FormulaPtr parse(const std::string& text);

/// Canonical text form; parse(to_string(f)) reproduces the same tree.
std::string to_string(const Formula& f);

/// All signal dimension names referenced by predicates, sorted, deduplicated.
std::vector<std::string> referenced_names(const Formula& f);

// ---------------------------------------------------------------------------
// Evaluation

/// Formula compiled against a fixed dimension-name list so predicates read
/// samples by index. Throws unknown_name for dimensions the trace lacks.
class BoundFormula {
 public:
  BoundFormula(const Formula& f, const std::vector<std::string>& names);

  /// Quantitative robustness at time index t over a finite trace.
  double robustness(std::span<const Vec> samples, std::size_t t) const;

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Formula::Kind kind;
    Cmp cmp = Cmp::ge;
    int left = -1, right = -1;  // node indices
    // predicate expression, flattened
    struct ExprOp {
      Expr::Kind kind;
      int dim = -1;        // name
      double value = 0.0;  // constant
    };
    std::vector<ExprOp> lhs_prog, rhs_prog;  // postfix programs
  };

  int compile(const Formula& f, const std::vector<std::string>& names);
  static void compile_expr(const Expr& e, const std::vector<std::string>& names,
                           std::vector<Node::ExprOp>& out);
  static double eval_expr(const std::vector<Node::ExprOp>& prog, const Vec& sample);

  std::vector<Node> nodes_;
  int root_ = -1;
  mutable std::vector<std::vector<double>> scratch_;  // per-node value series
};

/// Robustness of f over traj's suffix starting at t (finite-trace semantics).
double robustness(const Formula& f, const Trajectory& traj, std::size_t t);

/// Independent recursive Boolean evaluator; honors strict comparisons.
bool satisfies(const Formula& f, const Trajectory& traj, std::size_t t);

// Construction helpers.
ExprPtr expr_name(std::string name);
ExprPtr expr_const(double v);
ExprPtr expr_binary(Expr::Kind kind, ExprPtr lhs, ExprPtr rhs);
ExprPtr expr_abs(ExprPtr inner);
FormulaPtr make_pred(ExprPtr lhs, Cmp cmp, ExprPtr rhs);
FormulaPtr make_unary(Formula::Kind kind, FormulaPtr child);
FormulaPtr make_binary(Formula::Kind kind, FormulaPtr left, FormulaPtr right);

}  // namespace stlmpc::stl
