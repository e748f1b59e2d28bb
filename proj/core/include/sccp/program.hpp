#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sccp/expr.hpp"

namespace sccp {

enum class CmpOp { Lt, Le, Gt, Ge, Eq, Ne };

struct GuardNode;
using GuardNodePtr = std::shared_ptr<const GuardNode>;

struct GuardNode {
  enum class Kind { True, Cmp, And, Or, Not };
  Kind kind = Kind::True;
  CmpOp cmp = CmpOp::Lt;
  Expr lhs, rhs;  // Cmp
  GuardNodePtr a, b;
};

// Quantifier-free boolean formula with comparison atoms over expressions.
class Guard {
 public:
  Guard();  // the constant true

  static Guard truth();
  static Guard cmp(CmpOp op, Expr lhs, Expr rhs);
  static Guard g_and(Guard x, Guard y);
  static Guard g_or(Guard x, Guard y);
  static Guard g_not(Guard x);
  static Guard from_node(GuardNodePtr n);

  const GuardNode& node() const { return *node_; }
  bool is_const_true() const { return node_->kind == GuardNode::Kind::True; }

  bool eval(const EvalContext& ctx) const;
  bool operator==(const Guard& other) const;
  bool operator!=(const Guard& other) const { return !(*this == other); }

 private:
  explicit Guard(GuardNodePtr n) : node_(std::move(n)) {}
  GuardNodePtr node_;
};

struct Assignment {
  int var = -1;
  std::string var_name;
  Expr rhs;

  bool operator==(const Assignment& o) const {
    return var == o.var && var_name == o.var_name && rhs == o.rhs;
  }
};

// Simultaneous assignment: all right-hand sides are evaluated in the
// pre-state. Unmentioned variables are unchanged; the empty map is the
// identity update.
struct Update {
  std::vector<Assignment> assigns;

  bool is_identity() const { return assigns.empty(); }
  bool assigns_var(int var) const;
  bool operator==(const Update& o) const { return assigns == o.assigns; }
};

struct Action {
  Guard guard;
  Update update;
  Expr rate;
  int target = -1;  // index into SccpProgram::agents
  std::string target_name;
  int line = 0;
  int col = 0;
};

struct AgentDef {
  std::string name;
  std::vector<Action> actions;  // the summands of the definition
  int line = 0;
};

// A parsed and name-resolved model.
struct SccpProgram {
  std::vector<std::string> store_vars;
  std::vector<double> init;  // aligned with store_vars
  std::vector<std::string> param_names;
  std::vector<double> param_values;
  std::vector<AgentDef> agents;  // declaration order
  std::vector<int> network;      // agent indices in system-line order

  int var_index(std::string_view name) const;
  int param_index(std::string_view name) const;
  int agent_index(std::string_view name) const;
};

double eval_expr(const Expr& e, const EvalContext& ctx);
bool eval_guard(const Guard& g, const EvalContext& ctx);
std::vector<double> apply_update(const Update& u, std::span<const double> env,
                                 std::span<const double> params);

std::string to_string(const Guard& g);
std::string to_string(const Update& u);
std::string to_string(const Action& a);
std::string print_program(const SccpProgram& p);

bool programs_equal(const SccpProgram& a, const SccpProgram& b);

}  // namespace sccp
