#include "sccp/program.hpp"

#include <algorithm>

namespace sccp {

namespace {

const GuardNodePtr& true_node() {
  static const GuardNodePtr node = std::make_shared<GuardNode>();
  return node;
}

}  // namespace

Guard::Guard() : node_(true_node()) {}

Guard Guard::truth() { return Guard(); }

Guard Guard::cmp(CmpOp op, Expr lhs, Expr rhs) {
  auto n = std::make_shared<GuardNode>();
  n->kind = GuardNode::Kind::Cmp;
  n->cmp = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return Guard(std::move(n));
}

Guard Guard::g_and(Guard x, Guard y) {
  auto n = std::make_shared<GuardNode>();
  n->kind = GuardNode::Kind::And;
  n->a = x.node_;
  n->b = y.node_;
  return Guard(std::move(n));
}

Guard Guard::g_or(Guard x, Guard y) {
  auto n = std::make_shared<GuardNode>();
  n->kind = GuardNode::Kind::Or;
  n->a = x.node_;
  n->b = y.node_;
  return Guard(std::move(n));
}

Guard Guard::g_not(Guard x) {
  auto n = std::make_shared<GuardNode>();
  n->kind = GuardNode::Kind::Not;
  n->a = x.node_;
  return Guard(std::move(n));
}

Guard Guard::from_node(GuardNodePtr n) { return Guard(std::move(n)); }

namespace {

bool eval_guard_node(const GuardNode& n, const EvalContext& ctx) {
  switch (n.kind) {
    case GuardNode::Kind::True:
      return true;
    case GuardNode::Kind::Cmp: {
      const double l = n.lhs.eval(ctx);
      const double r = n.rhs.eval(ctx);
      switch (n.cmp) {
        case CmpOp::Lt: return l < r;
        case CmpOp::Le: return l <= r;
        case CmpOp::Gt: return l > r;
        case CmpOp::Ge: return l >= r;
        case CmpOp::Eq: return l == r;
        case CmpOp::Ne: return l != r;
      }
      return false;
    }
    case GuardNode::Kind::And:
      return eval_guard_node(*n.a, ctx) && eval_guard_node(*n.b, ctx);
    case GuardNode::Kind::Or:
      return eval_guard_node(*n.a, ctx) || eval_guard_node(*n.b, ctx);
    case GuardNode::Kind::Not:
      return !eval_guard_node(*n.a, ctx);
  }
  return false;
}

bool guard_nodes_equal(const GuardNode& x, const GuardNode& y) {
  if (x.kind != y.kind) return false;
  switch (x.kind) {
    case GuardNode::Kind::True:
      return true;
    case GuardNode::Kind::Cmp:
      return x.cmp == y.cmp && x.lhs == y.lhs && x.rhs == y.rhs;
    case GuardNode::Kind::Not:
      return guard_nodes_equal(*x.a, *y.a);
    default:
      return guard_nodes_equal(*x.a, *y.a) && guard_nodes_equal(*x.b, *y.b);
  }
}

}  // namespace

bool Guard::eval(const EvalContext& ctx) const { return eval_guard_node(*node_, ctx); }

bool Guard::operator==(const Guard& other) const {
  return guard_nodes_equal(*node_, *other.node_);
}

bool Update::assigns_var(int var) const {
  return std::any_of(assigns.begin(), assigns.end(),
                     [var](const Assignment& a) { return a.var == var; });
}

int SccpProgram::var_index(std::string_view name) const {
  for (size_t i = 0; i < store_vars.size(); ++i)
    if (store_vars[i] == name) return static_cast<int>(i);
  return -1;
}

int SccpProgram::param_index(std::string_view name) const {
  for (size_t i = 0; i < param_names.size(); ++i)
    if (param_names[i] == name) return static_cast<int>(i);
  return -1;
}

int SccpProgram::agent_index(std::string_view name) const {
  for (size_t i = 0; i < agents.size(); ++i)
    if (agents[i].name == name) return static_cast<int>(i);
  return -1;
}

double eval_expr(const Expr& e, const EvalContext& ctx) { return e.eval(ctx); }

bool eval_guard(const Guard& g, const EvalContext& ctx) { return g.eval(ctx); }

std::vector<double> apply_update(const Update& u, std::span<const double> env,
                                 std::span<const double> params) {
  std::vector<double> out(env.begin(), env.end());
  if (u.assigns.empty()) return out;
  EvalContext ctx{env, params};
  // All right-hand sides see the pre-state.
  std::vector<double> staged(u.assigns.size());
  for (size_t i = 0; i < u.assigns.size(); ++i) staged[i] = u.assigns[i].rhs.eval(ctx);
  for (size_t i = 0; i < u.assigns.size(); ++i)
    out[static_cast<size_t>(u.assigns[i].var)] = staged[i];
  return out;
}

// --- printing ---------------------------------------------------------

namespace {

int guard_precedence(GuardNode::Kind k) {
  switch (k) {
    case GuardNode::Kind::Or: return 1;
    case GuardNode::Kind::And: return 2;
    case GuardNode::Kind::Not: return 3;
    default: return 4;
  }
}

void print_guard_node(const GuardNode& n, std::string& out) {
  auto child = [&out](const GuardNode& c, int parent_prec) {
    const bool parens = guard_precedence(c.kind) < parent_prec;
    if (parens) out += '(';
    print_guard_node(c, out);
    if (parens) out += ')';
  };
  switch (n.kind) {
    case GuardNode::Kind::True:
      out += "true";
      return;
    case GuardNode::Kind::Cmp: {
      out += to_string(n.lhs);
      switch (n.cmp) {
        case CmpOp::Lt: out += " < "; break;
        case CmpOp::Le: out += " <= "; break;
        case CmpOp::Gt: out += " > "; break;
        case CmpOp::Ge: out += " >= "; break;
        case CmpOp::Eq: out += " == "; break;
        case CmpOp::Ne: out += " != "; break;
      }
      out += to_string(n.rhs);
      return;
    }
    case GuardNode::Kind::And:
      child(*n.a, 2);
      out += " && ";
      child(*n.b, 2);
      return;
    case GuardNode::Kind::Or:
      child(*n.a, 1);
      out += " || ";
      child(*n.b, 1);
      return;
    case GuardNode::Kind::Not:
      out += "!(";
      print_guard_node(*n.a, out);
      out += ')';
      return;
  }
}

}  // namespace

std::string to_string(const Guard& g) {
  std::string out;
  print_guard_node(g.node(), out);
  return out;
}

std::string to_string(const Update& u) {
  if (u.is_identity()) return "true";
  std::string out;
  for (size_t i = 0; i < u.assigns.size(); ++i) {
    if (i) out += " && ";
    out += u.assigns[i].var_name;
    out += "' = ";
    out += to_string(u.assigns[i].rhs);
  }
  return out;
}

std::string to_string(const Action& a) {
  std::string out = "[";
  out += to_string(a.guard);
  out += " -> ";
  out += to_string(a.update);
  out += "]{";
  out += to_string(a.rate);
  out += "}.";
  out += a.target_name;
  return out;
}

std::string print_program(const SccpProgram& p) {
  std::string out = "sccp v1\n";
  for (size_t i = 0; i < p.param_names.size(); ++i) {
    out += "param " + p.param_names[i] + " = " + format_double_shortest(p.param_values[i]) + "\n";
  }
  for (size_t i = 0; i < p.store_vars.size(); ++i) {
    out += "var " + p.store_vars[i] + " = " + format_double_shortest(p.init[i]) + "\n";
  }
  for (const AgentDef& agent : p.agents) {
    out += agent.name + " = ";
    for (size_t i = 0; i < agent.actions.size(); ++i) {
      if (i) out += " + ";
      out += to_string(agent.actions[i]);
    }
    out += "\n";
  }
  out += "system";
  for (size_t i = 0; i < p.network.size(); ++i) {
    out += i == 0 ? " " : " || ";
    out += p.agents[static_cast<size_t>(p.network[i])].name;
  }
  out += "\n";
  return out;
}

namespace {

bool actions_equal(const Action& a, const Action& b) {
  return a.guard == b.guard && a.update == b.update && a.rate == b.rate &&
         a.target == b.target && a.target_name == b.target_name;
}

}  // namespace

bool programs_equal(const SccpProgram& a, const SccpProgram& b) {
  if (a.store_vars != b.store_vars || a.init != b.init) return false;
  if (a.param_names != b.param_names || a.param_values != b.param_values) return false;
  if (a.network != b.network) return false;
  if (a.agents.size() != b.agents.size()) return false;
  for (size_t i = 0; i < a.agents.size(); ++i) {
    if (a.agents[i].name != b.agents[i].name) return false;
    if (a.agents[i].actions.size() != b.agents[i].actions.size()) return false;
    for (size_t j = 0; j < a.agents[i].actions.size(); ++j)
      if (!actions_equal(a.agents[i].actions[j], b.agents[i].actions[j])) return false;
  }
  return true;
}

}  // namespace sccp
