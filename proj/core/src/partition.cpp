#include "sccp/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sccp {

double PolicyFn::eval(const EvalContext& ctx) const {
  switch (kind) {
    case Kind::AlwaysCont:
      return std::numeric_limits<double>::infinity();
    case Kind::AlwaysDisc:
      return -std::numeric_limits<double>::infinity();
    case Kind::ByExpr:
      return f.eval(ctx);
  }
  return 0;
}

void validate_epsilon(double epsilon) {
  if (!(epsilon > 0))
    throw ConfigError("partition.epsilon must be strictly positive (got " +
                      format_double_shortest(epsilon) + ")");
}

bool cont_pred(const PolicyFn& fn, double epsilon, const EvalContext& ctx) {
  if (fn.kind == PolicyFn::Kind::AlwaysCont) return true;
  if (fn.kind == PolicyFn::Kind::AlwaysDisc) return false;
  return fn.eval(ctx) >= epsilon;
}

bool disc_pred(const PolicyFn& fn, double epsilon, const EvalContext& ctx) {
  if (fn.kind == PolicyFn::Kind::AlwaysCont) return false;
  if (fn.kind == PolicyFn::Kind::AlwaysDisc) return true;
  return fn.eval(ctx) <= -epsilon;
}

namespace {

PartitionPolicy make_policy_shell(const ExtendedProgram& ext, double epsilon) {
  validate_epsilon(epsilon);
  PartitionPolicy p;
  p.epsilon = epsilon;
  p.edge_fn.resize(ext.components.size());
  for (size_t c = 0; c < ext.components.size(); ++c)
    p.edge_fn[c].resize(ext.components[c].rts.edges.size());
  return p;
}

}  // namespace

PartitionPolicy population_size_policy(double K, const ExtendedProgram& ext, double epsilon) {
  PartitionPolicy p = make_policy_shell(ext, epsilon);
  for (size_t c = 0; c < ext.components.size(); ++c) {
    const ComponentRts& comp = ext.components[c];
    for (const RtsEdge& e : comp.rts.edges) {
      PolicyFn& fn = p.edge_fn[c][static_cast<size_t>(e.id)];
      if (!is_continuously_approximable(e, ext).ok) {
        fn.kind = PolicyFn::Kind::AlwaysDisc;
        continue;
      }
      const std::vector<double> nu =
          stoichiometry(e, static_cast<int>(ext.vars.size()), ext.base.param_values);
      bool touches_store = false;
      for (int i = 0; i < ext.n_store; ++i)
        if (nu[static_cast<size_t>(i)] != 0.0) touches_store = true;
      if (!touches_store) {
        // Pure state change: the size criterion is vacuous.
        fn.kind = PolicyFn::Kind::AlwaysCont;
        continue;
      }
      if (std::isinf(K)) {
        fn.kind = K > 0 ? PolicyFn::Kind::AlwaysDisc : PolicyFn::Kind::AlwaysCont;
        continue;
      }
      std::optional<Expr> acc;
      for (int i = 0; i < ext.n_store; ++i) {
        const double h = nu[static_cast<size_t>(i)];
        if (h == 0.0) continue;
        Expr term = Expr::binary(ExprOp::Sub,
                                 Expr::var(i, ext.vars[static_cast<size_t>(i)]),
                                 Expr::literal(K * std::abs(h)));
        acc = acc ? Expr::binary(ExprOp::Min, *acc, std::move(term)) : std::move(term);
      }
      fn.kind = PolicyFn::Kind::ByExpr;
      fn.f = *acc;
    }
  }
  return p;
}

PartitionPolicy rate_policy(double Lambda, double dt, const ExtendedProgram& ext,
                            double epsilon) {
  if (!(Lambda > 0) || !(dt > 0))
    throw ConfigError("rate policy requires Lambda > 0 and dt > 0");
  PartitionPolicy p = make_policy_shell(ext, epsilon);
  for (size_t c = 0; c < ext.components.size(); ++c) {
    const ComponentRts& comp = ext.components[c];
    for (const RtsEdge& e : comp.rts.edges) {
      PolicyFn& fn = p.edge_fn[c][static_cast<size_t>(e.id)];
      if (!is_continuously_approximable(e, ext).ok) {
        fn.kind = PolicyFn::Kind::AlwaysDisc;
        continue;
      }
      fn.kind = PolicyFn::Kind::ByExpr;
      fn.f = Expr::binary(ExprOp::Sub, Expr::binary(ExprOp::Mul, e.rate, Expr::literal(dt)),
                          Expr::literal(Lambda));
    }
  }
  return p;
}

PartitionPolicy always_discrete_policy(const ExtendedProgram& ext, double epsilon) {
  return make_policy_shell(ext, epsilon);  // AlwaysDisc is the default
}

PartitionPolicy always_continuous_policy(const ExtendedProgram& ext, double epsilon) {
  PartitionPolicy p = make_policy_shell(ext, epsilon);
  for (size_t c = 0; c < ext.components.size(); ++c) {
    const ComponentRts& comp = ext.components[c];
    for (const RtsEdge& e : comp.rts.edges)
      if (is_continuously_approximable(e, ext).ok)
        p.edge_fn[c][static_cast<size_t>(e.id)].kind = PolicyFn::Kind::AlwaysCont;
  }
  return p;
}

namespace {

Expr class_counter_sum(const ExtendedProgram& ext, int component,
                       const std::vector<int>& cls) {
  const ComponentRts& comp = ext.components[static_cast<size_t>(component)];
  std::optional<Expr> acc;
  for (const int s : cls) {
    const int var = comp.counter_var(s);
    Expr term = Expr::var(var, ext.vars[static_cast<size_t>(var)]);
    acc = acc ? Expr::binary(ExprOp::Add, *acc, std::move(term)) : std::move(term);
  }
  return acc ? *acc : Expr::literal(0.0);
}

const std::vector<int>* class_containing(const std::vector<std::vector<int>>& classes,
                                         int state) {
  for (const auto& cls : classes)
    if (std::find(cls.begin(), cls.end(), state) != cls.end()) return &cls;
  return nullptr;
}

std::vector<int> intersect_sorted(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// Builds the repartitioning transitions for flipping `edge` out of
// `from_class`. Transitions whose guard is constantly false (pinned
// policies) are still materialized; they just never fire.
void transitions_for_edge(const ExtendedProgram& ext, int component, const Kappa& kappa,
                          const RtsEdge& e, bool approximable,
                          const std::vector<int>& from_class,
                          std::vector<DynTransition>& out) {
  const ComponentRts& comp = ext.components[static_cast<size_t>(component)];
  const std::string base_name = comp.rts.component + ".e" + std::to_string(e.id);
  if (kappa[static_cast<size_t>(e.id)]) {
    Kappa k2 = kappa;
    k2[static_cast<size_t>(e.id)] = 0;
    const auto classes2 = quotient(comp.rts, k2);
    for (const auto& cls2 : classes2) {
      const std::vector<int> inter = intersect_sorted(from_class, cls2);
      if (inter.empty()) continue;
      DynTransition t;
      t.component = component;
      t.edge = e.id;
      t.to_continuous = false;
      t.exit_class = from_class;
      t.enter_class = cls2;
      t.new_kappa = k2;
      t.priority = class_counter_sum(ext, component, cls2);
      t.name = base_name + ":disc";
      out.push_back(std::move(t));
    }
  } else if (approximable) {
    Kappa k2 = kappa;
    k2[static_cast<size_t>(e.id)] = 1;
    const auto classes2 = quotient(comp.rts, k2);
    const std::vector<int>* target = class_containing(classes2, from_class.front());
    DynTransition t;
    t.component = component;
    t.edge = e.id;
    t.to_continuous = true;
    t.exit_class = from_class;
    t.enter_class = *target;
    t.new_kappa = k2;
    t.priority = Expr::literal(1.0);
    t.name = base_name + ":cont";
    out.push_back(std::move(t));
  }
}

}  // namespace

std::vector<DynTransition> dynamic_transitions(const ExtendedProgram& ext, int component,
                                               const Kappa& kappa,
                                               const PartitionPolicy& policy) {
  validate_epsilon(policy.epsilon);
  const ComponentRts& comp = ext.components[static_cast<size_t>(component)];
  const auto classes = quotient(comp.rts, kappa);
  std::vector<DynTransition> out;
  for (const RtsEdge& e : comp.rts.edges) {
    const bool approx = is_continuously_approximable(e, ext).ok;
    if (kappa[static_cast<size_t>(e.id)] && !approx)
      throw InconsistentKappa("kappa marks non-approximable edge " + comp.rts.component +
                              ".e" + std::to_string(e.id) + " continuous");
    for (const auto& cls : classes)
      transitions_for_edge(ext, component, kappa, e, approx, cls, out);
  }
  return out;
}

DynamicState make_dynamic_state(const ExtendedProgram& ext, const PartitionPolicy& policy,
                                std::span<const double> y0) {
  validate_epsilon(policy.epsilon);
  DynamicState state;
  state.ext = &ext;
  state.policy = &policy;
  const EvalContext ctx = ext.context(y0);
  for (size_t c = 0; c < ext.components.size(); ++c) {
    const ComponentRts& comp = ext.components[c];
    Kappa kappa(comp.rts.edges.size(), 0);
    std::vector<uint8_t> approx(comp.rts.edges.size(), 0);
    for (const RtsEdge& e : comp.rts.edges) {
      approx[static_cast<size_t>(e.id)] = is_continuously_approximable(e, ext).ok ? 1 : 0;
      if (approx[static_cast<size_t>(e.id)] &&
          cont_pred(policy.fn(static_cast<int>(c), e.id), policy.epsilon, ctx))
        kappa[static_cast<size_t>(e.id)] = 1;
    }
    const auto classes = quotient(comp.rts, kappa);
    state.current_class.push_back(*class_containing(classes, comp.rts.root_state));
    state.kappa.push_back(std::move(kappa));
    state.approximable.push_back(std::move(approx));
  }
  return state;
}

DynFragment materialize(const DynamicState& state) {
  const ExtendedProgram& ext = *state.ext;
  DynFragment frag;
  for (size_t c = 0; c < ext.components.size(); ++c) {
    const ComponentRts& comp = ext.components[c];
    const Kappa& kappa = state.kappa[c];
    const std::vector<int>& cur = state.current_class[c];
    auto in_current = [&cur](int s) {
      return std::find(cur.begin(), cur.end(), s) != cur.end();
    };
    // Classes under the current kappa, for stochastic enter classes.
    const auto classes = quotient(comp.rts, kappa);
    for (const RtsEdge& e : comp.rts.edges) {
      const std::string name = comp.rts.component + ".e" + std::to_string(e.id);
      if (kappa[static_cast<size_t>(e.id)]) {
        if (in_current(e.exit_state)) {
          DynFlow flow;
          flow.component = static_cast<int>(c);
          flow.edge = e.id;
          flow.stoich =
              stoichiometry(e, static_cast<int>(ext.vars.size()), ext.base.param_values);
          flow.rate = e.rate;
          flow.name = name;
          frag.flows.push_back(std::move(flow));
        }
      } else if (in_current(e.exit_state)) {
        DynStoch st;
        st.component = static_cast<int>(c);
        st.edge = e.id;
        st.guard = e.guard;
        st.rate = e.rate;
        st.reset = stochastic_reset(ext, static_cast<int>(c), e);
        st.enter_class = *class_containing(classes, e.enter_state);
        st.name = name;
        frag.stoch.push_back(std::move(st));
      }
      transitions_for_edge(ext, static_cast<int>(c), kappa, e,
                           state.approximable[c][static_cast<size_t>(e.id)] != 0, cur,
                           frag.switches);
    }
  }
  return frag;
}

void apply_switch(DynamicState& state, const DynTransition& t, std::vector<double>& y) {
  const ExtendedProgram& ext = *state.ext;
  const ComponentRts& comp = ext.components[static_cast<size_t>(t.component)];
  state.kappa[static_cast<size_t>(t.component)] = t.new_kappa;

  if (!t.to_continuous) {
    // Split: check the cluster mass, then renormalize the target subclass
    // and zero every other counter of the component.
    double cluster_total = 0;
    for (const int s : t.exit_class) cluster_total += y[static_cast<size_t>(comp.counter_var(s))];
    if (std::abs(cluster_total - 1.0) > 1e-6)
      throw SimError("cluster counters of component '" + comp.rts.component +
                     "' sum to " + format_double_shortest(cluster_total) +
                     " before a split; expected 1");
    double target_total = 0;
    for (const int s : t.enter_class) target_total += y[static_cast<size_t>(comp.counter_var(s))];
    if (target_total <= 0.0)
      throw ZeroTotalPriority("split toward an empty-mass class of component '" +
                              comp.rts.component + "'");
    for (size_t s = 0; s < comp.rts.states.size(); ++s) {
      const size_t var = static_cast<size_t>(comp.counter_var(static_cast<int>(s)));
      if (std::find(t.enter_class.begin(), t.enter_class.end(), static_cast<int>(s)) !=
          t.enter_class.end()) {
        y[var] /= target_total;
      } else {
        y[var] = 0.0;
      }
    }
  }
  state.current_class[static_cast<size_t>(t.component)] = t.enter_class;
}

bool switch_guard_true(const DynamicState& state, const DynTransition& t,
                       const EvalContext& ctx) {
  const PolicyFn& fn = state.policy->fn(t.component, t.edge);
  return t.to_continuous ? cont_pred(fn, state.policy->epsilon, ctx)
                         : disc_pred(fn, state.policy->epsilon, ctx);
}

}  // namespace sccp
