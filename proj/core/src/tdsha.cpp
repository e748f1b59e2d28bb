#include "sccp/tdsha.hpp"

#include <algorithm>
#include <cmath>

namespace sccp {

namespace {

// --- rate differentiability (syntactic, conservative) ------------------

bool is_const_integer(const Expr& e, std::span<const double> params, double* out) {
  if (e.depends_on_vars()) return false;
  double v;
  try {
    v = e.eval(EvalContext{{}, params});
  } catch (const EvalError&) {
    return false;
  }
  if (v != std::floor(v)) return false;
  *out = v;
  return true;
}

bool differentiable(const ExprNode& n, std::span<const double> params, std::string* why) {
  switch (n.op) {
    case ExprOp::Min:
    case ExprOp::Max:
      *why = "rate uses min/max";
      return false;
    case ExprOp::Pow: {
      double exp_val = 0;
      if (!is_const_integer(Expr::from_node(n.rhs), params, &exp_val) || exp_val < 0) {
        *why = "rate uses a non-integer or negative power";
        return false;
      }
      return differentiable(*n.lhs, params, why);
    }
    default:
      if (n.lhs && !differentiable(*n.lhs, params, why)) return false;
      if (n.rhs && !differentiable(*n.rhs, params, why)) return false;
      return true;
  }
}

// Multiplicative factors of an expression; divisions contribute their
// numerator's factors.
void collect_factors(const ExprNode& n, std::vector<const ExprNode*>& out) {
  switch (n.op) {
    case ExprOp::Mul:
      collect_factors(*n.lhs, out);
      collect_factors(*n.rhs, out);
      return;
    case ExprOp::Div:
    case ExprOp::Neg:
      collect_factors(*n.lhs, out);
      return;
    default:
      out.push_back(&n);
  }
}

// Recognize a guard atom of the shape X > c / X >= c (or mirrored), with
// X a variable and c variable-free.
struct ThresholdAtom {
  int var = -1;
  std::string var_name;
  double threshold = 0.0;
};

std::optional<ThresholdAtom> threshold_atom(const GuardNode& g, std::span<const double> params) {
  if (g.kind != GuardNode::Kind::Cmp) return std::nullopt;
  const ExprNode& l = g.lhs.node();
  const ExprNode& r = g.rhs.node();
  auto value_of = [&params](const Expr& e) -> std::optional<double> {
    if (e.depends_on_vars()) return std::nullopt;
    try {
      return e.eval(EvalContext{{}, params});
    } catch (const EvalError&) {
      return std::nullopt;
    }
  };
  if ((g.cmp == CmpOp::Gt || g.cmp == CmpOp::Ge) && l.op == ExprOp::Var) {
    if (auto c = value_of(g.rhs)) return ThresholdAtom{l.index, l.name, *c};
  }
  if ((g.cmp == CmpOp::Lt || g.cmp == CmpOp::Le) && r.op == ExprOp::Var) {
    if (auto c = value_of(g.lhs)) return ThresholdAtom{r.index, r.name, *c};
  }
  return std::nullopt;
}

// Does the rate carry a factor (var - threshold), or plain var when the
// threshold is zero?
bool has_vanishing_factor(const Expr& rate, const ThresholdAtom& atom,
                          std::span<const double> params) {
  std::vector<const ExprNode*> factors;
  collect_factors(rate.node(), factors);
  for (const ExprNode* f : factors) {
    if (atom.threshold == 0.0 && f->op == ExprOp::Var && f->index == atom.var) return true;
    if (f->op == ExprOp::Sub && f->lhs->op == ExprOp::Var && f->lhs->index == atom.var) {
      const Expr c = Expr::from_node(f->rhs);
      if (!c.depends_on_vars()) {
        try {
          if (c.eval(EvalContext{{}, params}) == atom.threshold) return true;
        } catch (const EvalError&) {
        }
      }
    }
  }
  return false;
}

}  // namespace

ApproxVerdict is_continuously_approximable(const RtsEdge& edge, const ExtendedProgram& ext) {
  const std::span<const double> params = ext.base.param_values;
  // (a) constant-increment update
  try {
    stoichiometry(edge, static_cast<int>(ext.vars.size()), params);
  } catch (const NotIncrementForm& e) {
    return {false, e.what()};
  }
  // (b) differentiable rate
  std::string why;
  if (!differentiable(edge.rate.node(), params, &why)) return {false, why};
  // (c) rate vanishes outside the guard
  const GuardNode& g = edge.guard.node();
  if (g.kind == GuardNode::Kind::True)
    return {true, "increment update, differentiable rate, trivial guard"};
  if (auto atom = threshold_atom(g, params)) {
    if (has_vanishing_factor(edge.rate, *atom, params))
      return {true, "increment update, differentiable rate, rate vanishes on guard boundary " +
                        atom->var_name + " = " + format_double_shortest(atom->threshold)};
    return {false, "rate does not provably vanish outside guard " + to_string(edge.guard)};
  }
  return {false, "guard " + to_string(edge.guard) + " is too complex for the vanishing check"};
}

std::vector<std::vector<int>> quotient(const Rts& rts, const Kappa& kappa) {
  if (kappa.size() != rts.edges.size())
    throw InconsistentKappa("kappa for component '" + rts.component + "' has " +
                            std::to_string(kappa.size()) + " entries, expected " +
                            std::to_string(rts.edges.size()));
  std::vector<int> parent(rts.states.size());
  for (size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
  auto find = [&parent](int x) {
    while (parent[static_cast<size_t>(x)] != x) {
      parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
      x = parent[static_cast<size_t>(x)];
    }
    return x;
  };
  for (const RtsEdge& e : rts.edges) {
    if (!kappa[static_cast<size_t>(e.id)]) continue;
    const int a = find(e.exit_state);
    const int b = find(e.enter_state);
    if (a != b) parent[static_cast<size_t>(std::max(a, b))] = std::min(a, b);
  }
  std::vector<std::vector<int>> classes;
  std::vector<int> class_of(rts.states.size(), -1);
  for (size_t s = 0; s < rts.states.size(); ++s) {
    const int root = find(static_cast<int>(s));
    if (class_of[static_cast<size_t>(root)] < 0) {
      class_of[static_cast<size_t>(root)] = static_cast<int>(classes.size());
      classes.emplace_back();
    }
    classes[static_cast<size_t>(class_of[static_cast<size_t>(root)])].push_back(
        static_cast<int>(s));
  }
  return classes;
}

Kappa bottom_kappa(const Rts& rts) { return Kappa(rts.edges.size(), 0); }

Kappa top_kappa(const ComponentRts& comp, const ExtendedProgram& ext) {
  Kappa k(comp.rts.edges.size(), 0);
  for (const RtsEdge& e : comp.rts.edges)
    k[static_cast<size_t>(e.id)] = is_continuously_approximable(e, ext).ok ? 1 : 0;
  return k;
}

bool kappa_leq(const Kappa& k1, const Kappa& k2) {
  if (k1.size() != k2.size())
    throw CompileError("kappa vectors have different shapes (" + std::to_string(k1.size()) +
                       " vs " + std::to_string(k2.size()) + ")");
  for (size_t i = 0; i < k1.size(); ++i)
    if (k1[i] && !k2[i]) return false;
  return true;
}

bool kappa_family_leq(const KappaFamily& k1, const KappaFamily& k2) {
  if (k1.size() != k2.size())
    throw CompileError("kappa families have different component counts");
  for (size_t i = 0; i < k1.size(); ++i)
    if (!kappa_leq(k1[i], k2[i])) return false;
  return true;
}

namespace {

std::string class_name(const Rts& rts, const std::vector<int>& cls) {
  std::string out = "{";
  for (size_t i = 0; i < cls.size(); ++i) {
    if (i) out += ",";
    out += rts.states[static_cast<size_t>(cls[i])];
  }
  out += "}";
  return out;
}

void validate_kappa(const ExtendedProgram& ext, int component, const Kappa& kappa) {
  const ComponentRts& comp = ext.components[static_cast<size_t>(component)];
  if (kappa.size() != comp.rts.edges.size())
    throw InconsistentKappa("kappa for component '" + comp.rts.component + "' has " +
                            std::to_string(kappa.size()) + " entries, expected " +
                            std::to_string(comp.rts.edges.size()));
  for (const RtsEdge& e : comp.rts.edges) {
    if (!kappa[static_cast<size_t>(e.id)]) continue;
    const ApproxVerdict v = is_continuously_approximable(e, ext);
    if (!v.ok)
      throw InconsistentKappa("kappa marks edge " + comp.rts.component + ".e" +
                              std::to_string(e.id) + " continuous, but it is not continuously "
                              "approximable: " + v.reason);
  }
}

}  // namespace

// Reset of a stochastic jump: the original store update plus the hard
// reassignment of this component's counters (1 on the entered state, 0
// elsewhere).
Update stochastic_reset(const ExtendedProgram& ext, int component, const RtsEdge& edge) {
  const ComponentRts& comp = ext.components[static_cast<size_t>(component)];
  Update reset;
  for (const Assignment& a : edge.update.assigns)
    if (a.var < ext.n_store) reset.assigns.push_back(a);
  for (size_t s = 0; s < comp.rts.states.size(); ++s) {
    const int var = comp.counter_var(static_cast<int>(s));
    reset.assigns.push_back(
        {var, ext.vars[static_cast<size_t>(var)],
         Expr::literal(static_cast<int>(s) == edge.enter_state ? 1.0 : 0.0)});
  }
  return reset;
}

Tdsha compile_component(const ExtendedProgram& ext, int component, const Kappa& kappa) {
  validate_kappa(ext, component, kappa);
  const ComponentRts& comp = ext.components[static_cast<size_t>(component)];
  const Rts& rts = comp.rts;

  Tdsha t;
  t.vars = ext.vars;
  t.n_store = ext.n_store;
  t.param_names = ext.base.param_names;
  t.params = ext.base.param_values;
  t.comps.push_back({rts.component, rts.states, comp.counter_base});
  t.init = ext.init;

  const auto classes = quotient(rts, kappa);
  std::vector<int> class_of(rts.states.size(), -1);
  for (size_t c = 0; c < classes.size(); ++c) {
    for (const int s : classes[c]) class_of[static_cast<size_t>(s)] = static_cast<int>(c);
    Mode m;
    m.classes.push_back(classes[c]);
    m.name = class_name(rts, classes[c]);
    t.modes.push_back(std::move(m));
  }
  t.init_mode = class_of[static_cast<size_t>(rts.root_state)];

  for (const RtsEdge& e : rts.edges) {
    const std::string name = rts.component + ".e" + std::to_string(e.id);
    if (kappa[static_cast<size_t>(e.id)]) {
      ContTransition flow;
      flow.mode = class_of[static_cast<size_t>(e.exit_state)];
      flow.stoich = stoichiometry(e, static_cast<int>(ext.vars.size()), t.params);
      flow.rate = e.rate;
      flow.name = name;
      t.flows.push_back(std::move(flow));
    } else {
      StochTransition st;
      st.exit_mode = class_of[static_cast<size_t>(e.exit_state)];
      st.enter_mode = class_of[static_cast<size_t>(e.enter_state)];
      st.guard = e.guard;
      st.reset = stochastic_reset(ext, component, e);
      st.rate = e.rate;
      st.name = name;
      st.detail = rts.states[static_cast<size_t>(e.exit_state)] + "->" +
                  rts.states[static_cast<size_t>(e.enter_state)];
      t.stoch.push_back(std::move(st));
    }
  }
  return t;
}

Tdsha product(const Tdsha& t1, const Tdsha& t2) {
  if (t1.vars != t2.vars)
    throw CompileError("product of automata over different variable lists");
  if (t1.init != t2.init)
    throw CompileError("product of automata with different initial valuations");

  Tdsha t;
  t.vars = t1.vars;
  t.n_store = t1.n_store;
  t.param_names = t1.param_names;
  t.params = t1.params;
  t.comps = t1.comps;
  t.comps.insert(t.comps.end(), t2.comps.begin(), t2.comps.end());
  t.init = t1.init;

  const size_t n2 = t2.modes.size();
  auto pair_index = [n2](int m1, int m2) {
    return static_cast<int>(static_cast<size_t>(m1) * n2 + static_cast<size_t>(m2));
  };
  for (const Mode& m1 : t1.modes) {
    for (const Mode& m2 : t2.modes) {
      Mode m;
      m.classes = m1.classes;
      m.classes.insert(m.classes.end(), m2.classes.begin(), m2.classes.end());
      m.name = m1.name.empty() ? m2.name
                               : (m2.name.empty() ? m1.name : m1.name + "x" + m2.name);
      t.modes.push_back(std::move(m));
    }
  }
  t.init_mode = pair_index(t1.init_mode, t2.init_mode);

  for (const ContTransition& f : t1.flows)
    for (size_t m2 = 0; m2 < t2.modes.size(); ++m2) {
      ContTransition g = f;
      g.mode = pair_index(f.mode, static_cast<int>(m2));
      t.flows.push_back(std::move(g));
    }
  for (const ContTransition& f : t2.flows)
    for (size_t m1 = 0; m1 < t1.modes.size(); ++m1) {
      ContTransition g = f;
      g.mode = pair_index(static_cast<int>(m1), f.mode);
      t.flows.push_back(std::move(g));
    }
  for (const StochTransition& s : t1.stoch)
    for (size_t m2 = 0; m2 < t2.modes.size(); ++m2) {
      StochTransition g = s;
      g.exit_mode = pair_index(s.exit_mode, static_cast<int>(m2));
      g.enter_mode = pair_index(s.enter_mode, static_cast<int>(m2));
      t.stoch.push_back(std::move(g));
    }
  for (const StochTransition& s : t2.stoch)
    for (size_t m1 = 0; m1 < t1.modes.size(); ++m1) {
      StochTransition g = s;
      g.exit_mode = pair_index(static_cast<int>(m1), s.exit_mode);
      g.enter_mode = pair_index(static_cast<int>(m1), s.enter_mode);
      t.stoch.push_back(std::move(g));
    }
  int group_offset = 0;
  for (const InstTransition& d : t1.inst) group_offset = std::max(group_offset, d.group + 1);
  for (const InstTransition& d : t1.inst)
    for (size_t m2 = 0; m2 < t2.modes.size(); ++m2) {
      InstTransition g = d;
      g.exit_mode = pair_index(d.exit_mode, static_cast<int>(m2));
      g.enter_mode = pair_index(d.enter_mode, static_cast<int>(m2));
      t.inst.push_back(std::move(g));
    }
  for (const InstTransition& d : t2.inst)
    for (size_t m1 = 0; m1 < t1.modes.size(); ++m1) {
      InstTransition g = d;
      g.group += group_offset;
      g.exit_mode = pair_index(static_cast<int>(m1), d.exit_mode);
      g.enter_mode = pair_index(static_cast<int>(m1), d.enter_mode);
      t.inst.push_back(std::move(g));
    }
  return t;
}

Tdsha compile_program(const ExtendedProgram& ext, const KappaFamily& kappas) {
  if (kappas.size() != ext.components.size())
    throw InconsistentKappa("kappa family has " + std::to_string(kappas.size()) +
                            " components, program has " +
                            std::to_string(ext.components.size()));
  if (ext.components.empty()) {
    Tdsha t;
    t.vars = ext.vars;
    t.n_store = ext.n_store;
    t.param_names = ext.base.param_names;
    t.params = ext.base.param_values;
    t.modes.push_back(Mode{});
    t.init_mode = 0;
    t.init = ext.init;
    return t;
  }
  Tdsha t = compile_component(ext, 0, kappas[0]);
  for (size_t c = 1; c < ext.components.size(); ++c)
    t = product(t, compile_component(ext, static_cast<int>(c), kappas[c]));
  return t;
}

std::vector<double> vector_field(const Tdsha& t, int mode, std::span<const double> y,
                                 uint64_t* clamped) {
  std::vector<double> drift(t.vars.size(), 0.0);
  const EvalContext ctx = t.context(y);
  for (const ContTransition& f : t.flows) {
    if (f.mode != mode) continue;
    double r = f.rate.eval(ctx);
    if (r < 0) {
      r = 0;
      if (clamped) ++*clamped;
    }
    if (r == 0) continue;
    for (size_t i = 0; i < drift.size(); ++i) drift[i] += f.stoich[i] * r;
  }
  return drift;
}

KappaFamily bottom_kappa_family(const ExtendedProgram& ext) {
  KappaFamily family;
  for (const ComponentRts& c : ext.components) family.push_back(bottom_kappa(c.rts));
  return family;
}

KappaFamily top_kappa_family(const ExtendedProgram& ext) {
  KappaFamily family;
  for (const ComponentRts& c : ext.components) family.push_back(top_kappa(c, ext));
  return family;
}

std::string mode_display_name(const Tdsha& t, int mode) {
  const Mode& m = t.modes[static_cast<size_t>(mode)];
  return m.name.empty() ? "m" + std::to_string(mode) : m.name;
}

std::string dump_tdsha(const Tdsha& t) {
  std::string out = "tdsha\n";
  out += "vars:";
  for (const std::string& v : t.vars) out += " " + v;
  out += "\n";
  out += "modes: " + std::to_string(t.modes.size()) + "\n";
  for (size_t m = 0; m < t.modes.size(); ++m) {
    out += "mode m" + std::to_string(m) + ": " + t.modes[m].name + "\n";
    // Symbolic per-variable drift.
    for (size_t v = 0; v < t.vars.size(); ++v) {
      std::string terms;
      for (const ContTransition& f : t.flows) {
        if (f.mode != static_cast<int>(m) || f.stoich[v] == 0.0) continue;
        if (!terms.empty()) terms += " + ";
        terms += format_double_shortest(f.stoich[v]) + "*(" + to_string(f.rate) + ")";
      }
      if (!terms.empty()) out += "  d/dt " + t.vars[v] + " = " + terms + "\n";
    }
  }
  out += "stochastic transitions: " + std::to_string(t.stoch.size()) + "\n";
  for (const StochTransition& s : t.stoch) {
    out += "  " + s.name + ": m" + std::to_string(s.exit_mode) + " -> m" +
           std::to_string(s.enter_mode) + " [" + to_string(s.guard) + "] {" +
           to_string(s.rate) + "} /" + to_string(s.reset) + "/\n";
  }
  out += "instantaneous transitions: " + std::to_string(t.inst.size()) + "\n";
  for (const InstTransition& d : t.inst) {
    out += "  " + d.name + ": m" + std::to_string(d.exit_mode) + " -> m" +
           std::to_string(d.enter_mode) + " prio {" + to_string(d.priority) + "} [" +
           to_string(d.guard) + "] /" + to_string(d.reset) + "/\n";
  }
  out += "init: mode m" + std::to_string(t.init_mode) + "\n";
  for (size_t v = 0; v < t.vars.size(); ++v)
    out += "  " + t.vars[v] + " = " + format_double_shortest(t.init[v]) + "\n";
  return out;
}

}  // namespace sccp
