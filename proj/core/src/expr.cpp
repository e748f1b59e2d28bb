#include "sccp/expr.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace sccp {

std::string to_string_node(const ExprNode& n);

namespace {

const ExprNodePtr& zero_node() {
  static const ExprNodePtr node = std::make_shared<ExprNode>();
  return node;
}

double eval_node(const ExprNode& n, const EvalContext& ctx) {
  switch (n.op) {
    case ExprOp::Literal:
      return n.value;
    case ExprOp::Var:
      return ctx.vars[static_cast<size_t>(n.index)];
    case ExprOp::Param:
      return ctx.params[static_cast<size_t>(n.index)];
    case ExprOp::Neg:
      return -eval_node(*n.lhs, ctx);
    case ExprOp::Add:
      return eval_node(*n.lhs, ctx) + eval_node(*n.rhs, ctx);
    case ExprOp::Sub:
      return eval_node(*n.lhs, ctx) - eval_node(*n.rhs, ctx);
    case ExprOp::Mul:
      return eval_node(*n.lhs, ctx) * eval_node(*n.rhs, ctx);
    case ExprOp::Div: {
      const double d = eval_node(*n.rhs, ctx);
      if (d == 0.0) throw EvalError("division by zero in '" + to_string_node(n) + "'");
      return eval_node(*n.lhs, ctx) / d;
    }
    case ExprOp::Min:
      return std::fmin(eval_node(*n.lhs, ctx), eval_node(*n.rhs, ctx));
    case ExprOp::Max:
      return std::fmax(eval_node(*n.lhs, ctx), eval_node(*n.rhs, ctx));
    case ExprOp::Pow:
      return std::pow(eval_node(*n.lhs, ctx), eval_node(*n.rhs, ctx));
  }
  throw EvalError("corrupt expression node");
}

}  // namespace

Expr::Expr() : node_(zero_node()) {}

Expr Expr::literal(double v) {
  auto n = std::make_shared<ExprNode>();
  n->op = ExprOp::Literal;
  n->value = v;
  return Expr(std::move(n));
}

Expr Expr::var(int index, std::string name, int line, int col) {
  auto n = std::make_shared<ExprNode>();
  n->op = ExprOp::Var;
  n->index = index;
  n->name = std::move(name);
  n->line = line;
  n->col = col;
  return Expr(std::move(n));
}

Expr Expr::param(int index, std::string name, int line, int col) {
  auto n = std::make_shared<ExprNode>();
  n->op = ExprOp::Param;
  n->index = index;
  n->name = std::move(name);
  n->line = line;
  n->col = col;
  return Expr(std::move(n));
}

Expr Expr::unary(ExprOp op, Expr operand) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->lhs = operand.node_;
  return Expr(std::move(n));
}

Expr Expr::binary(ExprOp op, Expr lhs, Expr rhs) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->lhs = lhs.node_;
  n->rhs = rhs.node_;
  return Expr(std::move(n));
}

Expr Expr::from_node(ExprNodePtr n) { return Expr(std::move(n)); }

double Expr::eval(const EvalContext& ctx) const {
  const double v = eval_node(*node_, ctx);
  if (!std::isfinite(v)) throw EvalError("non-finite result evaluating '" + to_string(*this) + "'");
  return v;
}

namespace {

bool node_depends_on_vars(const ExprNode& n) {
  if (n.op == ExprOp::Var) return true;
  if (n.lhs && node_depends_on_vars(*n.lhs)) return true;
  if (n.rhs && node_depends_on_vars(*n.rhs)) return true;
  return false;
}

bool node_equal(const ExprNode& a, const ExprNode& b) {
  if (a.op != b.op) return false;
  switch (a.op) {
    case ExprOp::Literal:
      return a.value == b.value;
    case ExprOp::Var:
    case ExprOp::Param:
      return a.index == b.index && a.name == b.name;
    default:
      break;
  }
  if (static_cast<bool>(a.lhs) != static_cast<bool>(b.lhs)) return false;
  if (static_cast<bool>(a.rhs) != static_cast<bool>(b.rhs)) return false;
  if (a.lhs && !node_equal(*a.lhs, *b.lhs)) return false;
  if (a.rhs && !node_equal(*a.rhs, *b.rhs)) return false;
  return true;
}

}  // namespace

bool Expr::depends_on_vars() const { return node_depends_on_vars(*node_); }

bool Expr::operator==(const Expr& other) const { return node_equal(*node_, *other.node_); }

// --- printing ---------------------------------------------------------

// Shortest decimal form that re-reads to the same double.
std::string format_double_shortest(double v) {
  char buf[64];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

namespace {

int precedence(ExprOp op) {
  switch (op) {
    case ExprOp::Add:
    case ExprOp::Sub:
      return 1;
    case ExprOp::Mul:
    case ExprOp::Div:
      return 2;
    case ExprOp::Neg:
      return 3;
    case ExprOp::Pow:
      return 4;
    default:
      return 5;  // atoms and call-like forms
  }
}

void print_node(const ExprNode& n, std::string& out);

void print_child(const ExprNode& child, int parent_prec, bool tight_side, std::string& out) {
  // tight_side: the operand position where equal precedence still needs
  // parentheses (right side of -, /, left side of ^).
  const int child_prec = precedence(child.op);
  const bool parens = child_prec < parent_prec || (child_prec == parent_prec && tight_side);
  if (parens) out += '(';
  print_node(child, out);
  if (parens) out += ')';
}

void print_node(const ExprNode& n, std::string& out) {
  switch (n.op) {
    case ExprOp::Literal:
      if (n.value < 0) {
        out += '(';
        out += format_double_shortest(n.value);
        out += ')';
      } else {
        out += format_double_shortest(n.value);
      }
      return;
    case ExprOp::Var:
    case ExprOp::Param:
      out += n.name;
      return;
    case ExprOp::Neg:
      out += '-';
      print_child(*n.lhs, precedence(ExprOp::Neg), true, out);
      return;
    case ExprOp::Add:
      print_child(*n.lhs, 1, false, out);
      out += " + ";
      print_child(*n.rhs, 1, true, out);
      return;
    case ExprOp::Sub:
      print_child(*n.lhs, 1, false, out);
      out += " - ";
      print_child(*n.rhs, 1, true, out);
      return;
    case ExprOp::Mul:
      print_child(*n.lhs, 2, false, out);
      out += '*';
      print_child(*n.rhs, 2, true, out);
      return;
    case ExprOp::Div:
      print_child(*n.lhs, 2, false, out);
      out += '/';
      print_child(*n.rhs, 2, true, out);
      return;
    case ExprOp::Pow:
      print_child(*n.lhs, 4, true, out);
      out += '^';
      print_child(*n.rhs, 4, false, out);
      return;
    case ExprOp::Min:
    case ExprOp::Max:
      out += n.op == ExprOp::Min ? "min(" : "max(";
      print_node(*n.lhs, out);
      out += ", ";
      print_node(*n.rhs, out);
      out += ')';
      return;
  }
}

}  // namespace

std::string to_string_node(const ExprNode& n) {
  std::string out;
  print_node(n, out);
  return out;
}

std::string to_string(const Expr& e) { return to_string_node(e.node()); }

}  // namespace sccp
