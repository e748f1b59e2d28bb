#pragma once

#include <memory>
#include <span>
#include <string>

#include "sccp/errors.hpp"

namespace sccp {

// Variable and parameter values an expression is evaluated against.
// `vars` is indexed by variable id (store variables first, then state
// counters), `params` by parameter id.
struct EvalContext {
  std::span<const double> vars;
  std::span<const double> params;
};

enum class ExprOp { Literal, Var, Param, Add, Sub, Mul, Div, Neg, Min, Max, Pow };

struct ExprNode;
using ExprNodePtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  ExprOp op = ExprOp::Literal;
  double value = 0.0;  // Literal only
  int index = -1;      // Var / Param id
  std::string name;    // Var / Param display name
  ExprNodePtr lhs;     // unary operand lives in lhs
  ExprNodePtr rhs;
  int line = 0;
  int col = 0;
};

// Immutable arithmetic expression over store variables, counters and
// parameters. Shared subtrees are fine: nodes never mutate.
class Expr {
 public:
  Expr();  // literal 0

  static Expr literal(double v);
  static Expr var(int index, std::string name, int line = 0, int col = 0);
  static Expr param(int index, std::string name, int line = 0, int col = 0);
  static Expr unary(ExprOp op, Expr operand);
  static Expr binary(ExprOp op, Expr lhs, Expr rhs);
  static Expr from_node(ExprNodePtr n);

  const ExprNode& node() const { return *node_; }

  // Throws EvalError on division by zero or a non-finite result.
  double eval(const EvalContext& ctx) const;

  // True if any Var node occurs in the tree (Params are constants).
  bool depends_on_vars() const;

  // Structural equality; source positions are ignored.
  bool operator==(const Expr& other) const;
  bool operator!=(const Expr& other) const { return !(*this == other); }

 private:
  explicit Expr(ExprNodePtr n) : node_(std::move(n)) {}
  ExprNodePtr node_;
};

std::string to_string(const Expr& e);
std::string format_double_shortest(double v);

}  // namespace sccp
