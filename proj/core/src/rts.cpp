#include "sccp/rts.hpp"

#include <algorithm>

namespace sccp {

int Rts::state_index(std::string_view name) const {
  for (size_t i = 0; i < states.size(); ++i)
    if (states[i] == name) return static_cast<int>(i);
  return -1;
}

std::vector<int> derivative_set(const SccpProgram& program, int root_agent) {
  std::vector<char> in_set(program.agents.size(), 0);
  std::vector<int> stack{root_agent};
  in_set[static_cast<size_t>(root_agent)] = 1;
  while (!stack.empty()) {
    const int a = stack.back();
    stack.pop_back();
    for (const Action& act : program.agents[static_cast<size_t>(a)].actions) {
      if (act.target >= 0 && !in_set[static_cast<size_t>(act.target)]) {
        in_set[static_cast<size_t>(act.target)] = 1;
        stack.push_back(act.target);
      }
    }
  }
  std::vector<int> result;
  for (size_t i = 0; i < in_set.size(); ++i)
    if (in_set[i]) result.push_back(static_cast<int>(i));
  return result;
}

std::optional<Diagnostic> check_simple(const SccpProgram& program) {
  std::vector<int> owner(program.agents.size(), -1);
  for (const int comp : program.network) {
    for (const int a : derivative_set(program, comp)) {
      if (owner[static_cast<size_t>(a)] >= 0) {
        const std::string& state = program.agents[static_cast<size_t>(a)].name;
        const std::string& first =
            program.agents[static_cast<size_t>(owner[static_cast<size_t>(a)])].name;
        const std::string& second = program.agents[static_cast<size_t>(comp)].name;
        return Diagnostic{Diagnostic::Kind::Semantic,
                          program.agents[static_cast<size_t>(a)].line, 0,
                          "program is not simple: agent state '" + state +
                              "' is reachable from both network components '" + first +
                              "' and '" + second + "'"};
      }
      owner[static_cast<size_t>(a)] = comp;
    }
  }
  return std::nullopt;
}

Rts build_rts(const SccpProgram& program, int root_agent) {
  Rts rts;
  rts.agent = root_agent;
  rts.component = program.agents[static_cast<size_t>(root_agent)].name;
  rts.state_agents = derivative_set(program, root_agent);
  for (size_t i = 0; i < rts.state_agents.size(); ++i) {
    if (rts.state_agents[i] == root_agent) rts.root_state = static_cast<int>(i);
    rts.states.push_back(program.agents[static_cast<size_t>(rts.state_agents[i])].name);
  }

  auto state_of_agent = [&rts](int agent) {
    for (size_t i = 0; i < rts.state_agents.size(); ++i)
      if (rts.state_agents[i] == agent) return static_cast<int>(i);
    return -1;
  };

  int id = 0;
  for (size_t s = 0; s < rts.state_agents.size(); ++s) {
    const AgentDef& def = program.agents[static_cast<size_t>(rts.state_agents[s])];
    for (const Action& act : def.actions) {
      RtsEdge e;
      e.id = id++;
      e.exit_state = static_cast<int>(s);
      e.enter_state = state_of_agent(act.target);
      e.guard = act.guard;
      e.update = act.update;
      e.rate = act.rate;
      rts.edges.push_back(std::move(e));
    }
  }
  return rts;
}

ExtendedProgram extend(const SccpProgram& program, std::vector<Rts> rts_list) {
  ExtendedProgram ext;
  ext.base = program;
  ext.vars = program.store_vars;
  ext.init = program.init;
  ext.n_store = static_cast<int>(program.store_vars.size());

  // Allocate counters, component by component in network order.
  for (Rts& rts : rts_list) {
    ComponentRts comp;
    comp.counter_base = static_cast<int>(ext.vars.size());
    for (const std::string& state : rts.states) {
      const std::string counter = "P_" + state;
      if (program.var_index(counter) >= 0 || program.param_index(counter) >= 0)
        throw CompileError("state counter '" + counter +
                           "' collides with a declared variable or parameter");
      ext.vars.push_back(counter);
      ext.init.push_back(0.0);
    }
    // The root state of the component starts occupied.
    ext.init[static_cast<size_t>(comp.counter_base + rts.root_state)] = 1.0;
    comp.rts = std::move(rts);
    ext.components.push_back(std::move(comp));
  }

  // Augment edges: counter increments in updates (self-loops cancel), and
  // the exit-state occupancy as a rate factor.
  for (ComponentRts& comp : ext.components) {
    for (RtsEdge& e : comp.rts.edges) {
      const int p_exit = comp.counter_var(e.exit_state);
      const int p_enter = comp.counter_var(e.enter_state);
      if (e.exit_state != e.enter_state) {
        const std::string exit_name = ext.vars[static_cast<size_t>(p_exit)];
        const std::string enter_name = ext.vars[static_cast<size_t>(p_enter)];
        e.update.assigns.push_back(
            {p_exit, exit_name,
             Expr::binary(ExprOp::Sub, Expr::var(p_exit, exit_name), Expr::literal(1.0))});
        e.update.assigns.push_back(
            {p_enter, enter_name,
             Expr::binary(ExprOp::Add, Expr::var(p_enter, enter_name), Expr::literal(1.0))});
      }
      e.rate = Expr::binary(ExprOp::Mul, e.rate,
                            Expr::var(p_exit, ext.vars[static_cast<size_t>(p_exit)]));
    }
  }
  return ext;
}

ExtendedProgram extend_program(const SccpProgram& program) {
  if (auto diag = check_simple(program)) throw CompileError(format(*diag));
  std::vector<Rts> rts_list;
  rts_list.reserve(program.network.size());
  for (const int comp : program.network) rts_list.push_back(build_rts(program, comp));
  return extend(program, std::move(rts_list));
}

namespace {

// Matches rhs == Var(var) + h, Var(var) - h, h + Var(var), or Var(var).
// h must not reference store variables or counters.
std::optional<double> increment_of(int var, const Expr& rhs, std::span<const double> params) {
  const ExprNode& n = rhs.node();
  auto const_value = [&params](const Expr& e) -> std::optional<double> {
    if (e.depends_on_vars()) return std::nullopt;
    return e.eval(EvalContext{{}, params});
  };
  if (n.op == ExprOp::Var && n.index == var) return 0.0;
  if (n.op == ExprOp::Add || n.op == ExprOp::Sub) {
    const Expr lhs = Expr::from_node(n.lhs);
    const Expr rhs2 = Expr::from_node(n.rhs);
    const ExprNode& l = lhs.node();
    const ExprNode& r = rhs2.node();
    if (l.op == ExprOp::Var && l.index == var) {
      if (auto h = const_value(rhs2)) return n.op == ExprOp::Add ? *h : -*h;
    }
    if (n.op == ExprOp::Add && r.op == ExprOp::Var && r.index == var) {
      if (auto h = const_value(lhs)) return *h;
    }
  }
  return std::nullopt;
}

}  // namespace

std::vector<double> stoichiometry(const RtsEdge& edge, int n_vars,
                                  std::span<const double> params) {
  std::vector<double> nu(static_cast<size_t>(n_vars), 0.0);
  for (const Assignment& a : edge.update.assigns) {
    const auto h = increment_of(a.var, a.rhs, params);
    if (!h)
      throw NotIncrementForm("assignment " + a.var_name + "' = " + to_string(a.rhs) +
                             " on edge e" + std::to_string(edge.id) +
                             " is not a constant increment");
    nu[static_cast<size_t>(a.var)] = *h;
  }
  return nu;
}

std::string dump_rts(const ComponentRts& comp, const ExtendedProgram& ext) {
  std::string out = "component " + comp.rts.component + "\n";
  out += "  states:";
  for (const std::string& s : comp.rts.states) out += " " + s;
  out += "\n";
  for (const RtsEdge& e : comp.rts.edges) {
    out += "  e" + std::to_string(e.id) + ": " +
           comp.rts.states[static_cast<size_t>(e.exit_state)] + " -> " +
           comp.rts.states[static_cast<size_t>(e.enter_state)] + " [" + to_string(e.guard) +
           "] {" + to_string(e.rate) + "} /" + to_string(e.update) + "/\n";
  }
  (void)ext;
  return out;
}

}  // namespace sccp
