#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sccp/tdsha.hpp"

namespace sccp {

// The sign-discriminating function f_e of one edge. AlwaysCont/AlwaysDisc
// stand for the constant +inf / -inf policies.
struct PolicyFn {
  enum class Kind { ByExpr, AlwaysCont, AlwaysDisc };
  Kind kind = Kind::AlwaysDisc;
  Expr f;

  double eval(const EvalContext& ctx) const;
};

// Per-edge partitioning functions plus the hysteresis half-width. The
// cont/disc regions { f >= eps } and { f <= -eps } are disjoint because
// eps must be strictly positive.
struct PartitionPolicy {
  std::vector<std::vector<PolicyFn>> edge_fn;  // [component][edge]
  double epsilon = 1e-3;

  const PolicyFn& fn(int component, int edge) const {
    return edge_fn[static_cast<size_t>(component)][static_cast<size_t>(edge)];
  }
};

// Throws ConfigError unless epsilon > 0.
void validate_epsilon(double epsilon);

bool cont_pred(const PolicyFn& fn, double epsilon, const EvalContext& ctx);
bool disc_pred(const PolicyFn& fn, double epsilon, const EvalContext& ctx);

// f_e(x) = min over store variables touched by the edge of
// x_i - K*|nu_i|; +inf when the edge touches no store variable, -inf for
// non-approximable edges.
PartitionPolicy population_size_policy(double K, const ExtendedProgram& ext,
                                       double epsilon = 1e-3);

// f_e(x) = rate_e(x)*dt - Lambda; -inf for non-approximable edges.
PartitionPolicy rate_policy(double Lambda, double dt, const ExtendedProgram& ext,
                            double epsilon = 1e-3);

PartitionPolicy always_discrete_policy(const ExtendedProgram& ext, double epsilon = 1e-3);
PartitionPolicy always_continuous_policy(const ExtendedProgram& ext, double epsilon = 1e-3);

// One repartitioning transition materialized for a fixed kappa: flipping
// `edge` moves the automaton from exit_class (under the current kappa) to
// enter_class (under new_kappa).
struct DynTransition {
  int component = 0;
  int edge = 0;
  bool to_continuous = false;       // TD(0,1) merge vs TD(1,0) split
  std::vector<int> exit_class;
  std::vector<int> enter_class;
  Kappa new_kappa;
  Expr priority;  // sum of the target class counters, or 1 for merges
  std::string name;
};

// The full repartitioning family for one component at a fixed kappa: one
// split transition per (continuous edge, target subclass) from every
// class, one merge transition per approximable discrete edge from every
// class.
std::vector<DynTransition> dynamic_transitions(const ExtendedProgram& ext, int component,
                                               const Kappa& kappa,
                                               const PartitionPolicy& policy);

// Run-time partitioning state: per-component kappa and current class,
// plus cached approximability verdicts.
struct DynamicState {
  const ExtendedProgram* ext = nullptr;
  const PartitionPolicy* policy = nullptr;
  KappaFamily kappa;
  std::vector<std::vector<int>> current_class;
  std::vector<std::vector<uint8_t>> approximable;  // [component][edge]
};

// Initializes kappa from the policy at the initial valuation:
// kappa[e] = 1 iff e is approximable and cont[e](y0) holds.
DynamicState make_dynamic_state(const ExtendedProgram& ext, const PartitionPolicy& policy,
                                std::span<const double> y0);

// Materialized transitions out of the current (kappa, class) tuple.
struct DynFlow {
  int component = 0;
  int edge = 0;
  std::vector<double> stoich;
  Expr rate;
  std::string name;
};

struct DynStoch {
  int component = 0;
  int edge = 0;
  Guard guard;
  Expr rate;
  Update reset;
  std::vector<int> enter_class;  // under the component's current kappa
  std::string name;
};

struct DynFragment {
  std::vector<DynFlow> flows;
  std::vector<DynStoch> stoch;
  std::vector<DynTransition> switches;
};

DynFragment materialize(const DynamicState& state);

// Applies a switch: flips kappa, enters the target class, and restores the
// counter normalization (split targets are renormalized by their counter
// mass; merges leave the valuation unchanged). Throws ZeroTotalPriority /
// SimError when counter mass is degenerate.
void apply_switch(DynamicState& state, const DynTransition& t, std::vector<double>& y);

// Evaluates the switch guard disc[e] / cont[e] for a materialized
// transition.
bool switch_guard_true(const DynamicState& state, const DynTransition& t,
                       const EvalContext& ctx);

}  // namespace sccp
