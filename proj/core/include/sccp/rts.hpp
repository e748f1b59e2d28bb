#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sccp/parser.hpp"
#include "sccp/program.hpp"

namespace sccp {

struct RtsEdge {
  int id = 0;           // dense, in textual source order
  int exit_state = 0;   // positions in Rts::states
  int enter_state = 0;
  Guard guard;
  Update update;
  Expr rate;
};

// Labeled multigraph of one sequential component: its derivative states
// and one edge per action.
struct Rts {
  int agent = -1;  // root agent index in the program
  int root_state = 0;
  std::string component;
  std::vector<int> state_agents;          // program agent index per state
  std::vector<std::string> states;        // state names, declaration order
  std::vector<RtsEdge> edges;

  int state_index(std::string_view name) const;
};

// Least set of agents containing `root` and closed under action targets,
// in declaration order.
std::vector<int> derivative_set(const SccpProgram& program, int root_agent);

// A program is simple iff the derivative sets of the network components
// are pairwise disjoint. Returns a diagnostic naming the first colliding
// agent state otherwise.
std::optional<Diagnostic> check_simple(const SccpProgram& program);

Rts build_rts(const SccpProgram& program, int root_agent);

// One network component of the extended program. Edge guards/rates/updates
// are the augmented ones (counter increments in updates, exit-state counter
// factor in rates).
struct ComponentRts {
  Rts rts;
  int counter_base = 0;  // Y-index of this component's first state counter

  int counter_var(int state) const { return counter_base + state; }
};

// The extended program: the base program plus one occupancy counter P_s
// per agent state, over the combined variable vector
// Y = store variables ++ counters.
struct ExtendedProgram {
  SccpProgram base;                // untouched
  std::vector<std::string> vars;   // Y names
  std::vector<double> init;        // |Y|
  int n_store = 0;                 // store-variable prefix length
  std::vector<ComponentRts> components;  // network order

  EvalContext context(std::span<const double> y) const {
    return EvalContext{y, base.param_values};
  }
};

ExtendedProgram extend(const SccpProgram& program, std::vector<Rts> rts_list);

// Convenience: parse-check-build-extend in one call. Throws CompileError
// on a non-simple program.
ExtendedProgram extend_program(const SccpProgram& program);

// The per-variable constant increments of an edge's update. Throws
// NotIncrementForm unless every assignment has the shape X' = X + h with
// h free of store variables and counters.
std::vector<double> stoichiometry(const RtsEdge& edge, int n_vars,
                                  std::span<const double> params);

// Deterministic text listing used by `compile --dump-rts`.
std::string dump_rts(const ComponentRts& comp, const ExtendedProgram& ext);

}  // namespace sccp
