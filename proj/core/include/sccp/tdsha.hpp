#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sccp/rts.hpp"

namespace sccp {

// Per-edge continuous/discrete choice for one component; one entry per
// RtsEdge id, 1 = approximate continuously.
using Kappa = std::vector<uint8_t>;
// One Kappa per network component.
using KappaFamily = std::vector<Kappa>;

struct ApproxVerdict {
  bool ok = false;
  std::string reason;
};

// An edge is continuously approximable iff its (augmented) update is in
// constant-increment form, its rate is syntactically differentiable
// (polynomial/rational, integer powers, no min/max), and the rate provably
// vanishes wherever the guard is false. The vanishing check is syntactic
// and conservative: trivial guards pass, a single atom X > c (or X >= c)
// passes iff the rate carries a factor X - c (or X when c = 0).
ApproxVerdict is_continuously_approximable(const RtsEdge& edge, const ExtendedProgram& ext);

// Connected components of the undirected kappa=1 subgraph. Classes are
// ordered by smallest member state; members sorted. Throws
// InconsistentKappa on a shape mismatch.
std::vector<std::vector<int>> quotient(const Rts& rts, const Kappa& kappa);

Kappa bottom_kappa(const Rts& rts);
Kappa top_kappa(const ComponentRts& comp, const ExtendedProgram& ext);

// Pointwise implication kappa1[e]=1 => kappa2[e]=1. Throws CompileError on
// shape mismatch.
bool kappa_leq(const Kappa& k1, const Kappa& k2);
bool kappa_family_leq(const KappaFamily& k1, const KappaFamily& k2);

// A product-automaton mode: one state class per component, in network
// order.
struct Mode {
  std::vector<std::vector<int>> classes;
  std::string name;

  bool operator==(const Mode& o) const { return classes == o.classes; }
};

struct ContTransition {
  int mode = 0;
  std::vector<double> stoich;  // over Y
  Expr rate;
  std::string name;
};

struct StochTransition {
  int exit_mode = 0;
  int enter_mode = 0;
  Guard guard;
  Update reset;
  Expr rate;
  std::string name;
  std::string detail;  // "exit_state->enter_state" of the source edge
};

struct InstTransition {
  int exit_mode = 0;
  int enter_mode = 0;
  Expr priority;  // nonnegative where the guard holds
  Guard guard;
  Update reset;
  std::string name;
  int group = 0;  // simultaneous-firing resolution unit
};

struct TdshaComponent {
  std::string name;
  std::vector<std::string> states;
  int counter_base = 0;
};

// Transition-driven stochastic hybrid automaton over the extended
// variable vector Y.
struct Tdsha {
  std::vector<std::string> vars;  // Y names
  int n_store = 0;
  std::vector<std::string> param_names;
  std::vector<double> params;
  std::vector<TdshaComponent> comps;
  std::vector<Mode> modes;
  std::vector<ContTransition> flows;
  std::vector<InstTransition> inst;
  std::vector<StochTransition> stoch;
  int init_mode = 0;
  std::vector<double> init;

  EvalContext context(std::span<const double> y) const { return EvalContext{y, params}; }
};

// Reset of a stochastic jump along `edge`: the original store update plus
// hard reassignment of the owning component's counters (1 on the entered
// state, 0 on every other).
Update stochastic_reset(const ExtendedProgram& ext, int component, const RtsEdge& edge);

Tdsha compile_component(const ExtendedProgram& ext, int component, const Kappa& kappa);

// Interleaving product; both factors must share the variable vector and
// initial valuation. Mode tuples are concatenated, not nested.
Tdsha product(const Tdsha& t1, const Tdsha& t2);

// Fold of `product` over per-component compilations, in network order.
Tdsha compile_program(const ExtendedProgram& ext, const KappaFamily& kappas);

// Drift at `mode`: sum of stoich * rate over the mode's flows, with
// negative rate evaluations clamped to zero. `clamped`, when given, counts
// clamp events.
std::vector<double> vector_field(const Tdsha& t, int mode, std::span<const double> y,
                                 uint64_t* clamped = nullptr);

// Kappa helpers for whole programs.
KappaFamily bottom_kappa_family(const ExtendedProgram& ext);
KappaFamily top_kappa_family(const ExtendedProgram& ext);

// Stable text form used by `compile --dump-tdsha` and golden tests.
std::string dump_tdsha(const Tdsha& t);

std::string mode_display_name(const Tdsha& t, int mode);

}  // namespace sccp
