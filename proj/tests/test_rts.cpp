#include <fstream>
#include <sstream>

#include "doctest.h"
#include "sccp/parser.hpp"
#include "sccp/rng.hpp"
#include "sccp/rts.hpp"

using namespace sccp;

namespace {

SccpProgram load(const char* name) {
  std::ifstream in(std::string(SCCP_MODELS_DIR) + "/" + name);
  REQUIRE(in);
  std::stringstream buf;
  buf << in.rdbuf();
  ParseResult r = parse_program(buf.str());
  REQUIRE(r.ok());
  return std::move(*r.program);
}

std::vector<std::string> names_of(const SccpProgram& p, const std::vector<int>& agents) {
  std::vector<std::string> out;
  for (const int a : agents) out.push_back(p.agents[static_cast<size_t>(a)].name);
  return out;
}

}  // namespace

TEST_CASE("derivative sets of the gene model") {
  const SccpProgram p = load("gene.sccp");
  CHECK(names_of(p, derivative_set(p, p.agent_index("gene0"))) ==
        std::vector<std::string>{"gene0", "gene1", "gene2"});
  CHECK(names_of(p, derivative_set(p, p.agent_index("deg"))) ==
        std::vector<std::string>{"deg"});
  CHECK(names_of(p, derivative_set(p, p.agent_index("dimer"))) ==
        std::vector<std::string>{"dimer"});
}

TEST_CASE("a self-looping agent is its own derivative set") {
  const SccpProgram p = *parse_program("sccp v1\nidle = [true -> true]{0}.idle\nsystem idle\n")
                             .program;
  CHECK(names_of(p, derivative_set(p, 0)) == std::vector<std::string>{"idle"});
}

TEST_CASE("check_simple") {
  SUBCASE("the gene network is simple") {
    const SccpProgram p = load("gene.sccp");
    CHECK(!check_simple(p).has_value());
  }
  SUBCASE("two copies of the same agent collide") {
    const SccpProgram p = *parse_program(
                               "sccp v1\ng = [true -> true]{1}.g\nsystem g || g\n")
                               .program;
    const auto diag = check_simple(p);
    REQUIRE(diag.has_value());
    CHECK(diag->message.find("'g'") != std::string::npos);
  }
  SUBCASE("a component reaching another network component collides") {
    const SccpProgram p = *parse_program(
                               "sccp v1\n"
                               "a = [true -> true]{1}.a\n"
                               "b = [true -> true]{1}.a + [true -> true]{1}.b\n"
                               "system a || b\n")
                               .program;
    const auto diag = check_simple(p);
    REQUIRE(diag.has_value());
    CHECK(diag->message.find("'a'") != std::string::npos);
  }
}

TEST_CASE("build_rts shapes for the gene model") {
  const SccpProgram p = load("gene.sccp");
  const Rts gene = build_rts(p, p.agent_index("gene0"));
  CHECK(gene.states == std::vector<std::string>{"gene0", "gene1", "gene2"});
  CHECK(gene.edges.size() == 6);
  // source order: gene0's actions, then gene1's, then gene2's
  CHECK(gene.edges[0].exit_state == 0);
  CHECK(gene.edges[0].enter_state == 0);
  CHECK(gene.edges[1].exit_state == 0);
  CHECK(gene.edges[1].enter_state == 1);
  CHECK(gene.edges[2].exit_state == 1);
  CHECK(gene.edges[2].enter_state == 0);
  CHECK(gene.edges[5].exit_state == 2);
  CHECK(gene.edges[5].enter_state == 1);
  for (size_t i = 0; i < gene.edges.size(); ++i)
    CHECK(gene.edges[i].id == static_cast<int>(i));

  const Rts deg = build_rts(p, p.agent_index("deg"));
  CHECK(deg.states.size() == 1);
  CHECK(deg.edges.size() == 1);
  CHECK(deg.edges[0].exit_state == deg.edges[0].enter_state);

  const Rts dimer = build_rts(p, p.agent_index("dimer"));
  CHECK(dimer.states.size() == 1);
  CHECK(dimer.edges.size() == 2);
}

TEST_CASE("extend adds counters, augments updates and rates, extends init") {
  const SccpProgram p = load("gene.sccp");
  const ExtendedProgram ext = extend_program(p);
  CHECK(ext.vars == std::vector<std::string>{"Xp", "Xp2", "P_gene0", "P_gene1", "P_gene2",
                                             "P_deg", "P_dimer"});
  CHECK(ext.n_store == 2);

  // init: root states occupied
  CHECK(ext.init == std::vector<double>{0, 0, 1, 0, 0, 1, 1});

  const ComponentRts& gene = ext.components[0];
  // edge gene0 -> gene1 gains the counter increments
  const RtsEdge& bind1 = gene.rts.edges[1];
  REQUIRE(bind1.update.assigns.size() == 2);
  CHECK(bind1.update.assigns[0].var_name == "P_gene0");
  CHECK(to_string(bind1.update.assigns[0].rhs) == "P_gene0 - 1");
  CHECK(bind1.update.assigns[1].var_name == "P_gene1");
  CHECK(to_string(bind1.update.assigns[1].rhs) == "P_gene1 + 1");
  // rates carry the exit-state occupancy factor
  CHECK(to_string(bind1.rate) == "kp1*Xp2*P_gene0");

  // self-loop counter terms cancel: update keeps just the store part
  const RtsEdge& deg_loop = ext.components[1].rts.edges[0];
  REQUIRE(deg_loop.update.assigns.size() == 1);
  CHECK(deg_loop.update.assigns[0].var_name == "Xp");
  CHECK(to_string(deg_loop.rate) == "kd*Xp*P_deg");

  // the base program is untouched
  CHECK(p.agents[0].actions[1].update.assigns.empty());
}

TEST_CASE("state counters colliding with declared variables are rejected") {
  const SccpProgram p = *parse_program(
                             "sccp v1\n"
                             "var P_a = 0\n"
                             "a = [true -> true]{1}.a\n"
                             "system a\n")
                             .program;
  CHECK_THROWS_AS(extend_program(p), CompileError);
}

TEST_CASE("stoichiometry") {
  const SccpProgram p = load("gene.sccp");
  const ExtendedProgram ext = extend_program(p);
  const int n = static_cast<int>(ext.vars.size());

  SUBCASE("dimerization edge over the extended variables") {
    const RtsEdge& dim = ext.components[2].rts.edges[0];
    const auto nu = stoichiometry(dim, n, p.param_values);
    CHECK(nu == std::vector<double>{-2, 1, 0, 0, 0, 0, 0});
  }
  SUBCASE("identity store update of a state-changing edge moves only counters") {
    const RtsEdge& unbind2 = ext.components[0].rts.edges[5];  // gene2 -> gene1
    const auto nu = stoichiometry(unbind2, n, p.param_values);
    CHECK(nu == std::vector<double>{0, 0, 0, 1, -1, 0, 0});
  }
  SUBCASE("identity update of a self-loop gives the zero vector") {
    const SccpProgram q = *parse_program(
                               "sccp v1\na = [true -> true]{1}.a\nsystem a\n")
                               .program;
    const ExtendedProgram qext = extend_program(q);
    const auto nu = stoichiometry(qext.components[0].rts.edges[0],
                                  static_cast<int>(qext.vars.size()), q.param_values);
    CHECK(nu == std::vector<double>{0});
  }
  SUBCASE("edge gene0 -> gene1 moves only the counters") {
    const RtsEdge& bind1 = ext.components[0].rts.edges[1];
    const auto nu = stoichiometry(bind1, n, p.param_values);
    CHECK(nu == std::vector<double>{0, 0, -1, 1, 0, 0, 0});
  }
  SUBCASE("a non-increment assignment raises NotIncrementForm") {
    const SccpProgram q = *parse_program(
                               "sccp v1\nvar X = 1\n"
                               "a = [true -> X' = 2*X]{1}.a\nsystem a\n")
                               .program;
    const ExtendedProgram qext = extend_program(q);
    CHECK_THROWS_AS(
        stoichiometry(qext.components[0].rts.edges[0], static_cast<int>(qext.vars.size()),
                      q.param_values),
        NotIncrementForm);
  }
}

TEST_CASE("property: counter conservation under augmented updates") {
  const SccpProgram p = load("gene.sccp");
  const ExtendedProgram ext = extend_program(p);
  RngStream rng(7);

  // Walk the gene component by applying augmented updates of edges leaving
  // the current state; its counters must keep summing to 1 exactly and
  // stay in {0,1}.
  const ComponentRts& gene = ext.components[0];
  std::vector<double> y = ext.init;
  int state = gene.rts.root_state;
  for (int step = 0; step < 500; ++step) {
    std::vector<const RtsEdge*> options;
    for (const RtsEdge& e : gene.rts.edges)
      if (e.exit_state == state) options.push_back(&e);
    const RtsEdge& e = *options[rng.next_u64() % options.size()];
    y = apply_update(e.update, y, p.param_values);
    state = e.enter_state;
    double sum = 0;
    for (size_t s = 0; s < gene.rts.states.size(); ++s) {
      const double v = y[static_cast<size_t>(gene.counter_var(static_cast<int>(s)))];
      CHECK((v == 0.0 || v == 1.0));
      sum += v;
    }
    CHECK(sum == 1.0);
    CHECK(y[static_cast<size_t>(gene.counter_var(state))] == 1.0);
  }
}

TEST_CASE("property: applying an augmented update equals adding the stoichiometric vector") {
  const SccpProgram p = load("gene.sccp");
  const ExtendedProgram ext = extend_program(p);
  const int n = static_cast<int>(ext.vars.size());
  RngStream rng(11);

  for (const ComponentRts& comp : ext.components) {
    for (const RtsEdge& e : comp.rts.edges) {
      const auto nu = stoichiometry(e, n, p.param_values);
      for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> y(static_cast<size_t>(n));
        for (double& v : y) v = static_cast<double>(rng.next_u64() % 40);
        const auto next = apply_update(e.update, y, p.param_values);
        for (int i = 0; i < n; ++i)
          CHECK(next[static_cast<size_t>(i)] ==
                doctest::Approx(y[static_cast<size_t>(i)] + nu[static_cast<size_t>(i)])
                    .epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("dump-rts lists states then edges in a stable format") {
  const SccpProgram p = load("gene.sccp");
  const ExtendedProgram ext = extend_program(p);
  const std::string dump = dump_rts(ext.components[1], ext);
  CHECK(dump ==
        "component deg\n"
        "  states: deg\n"
        "  e0: deg -> deg [true] {kd*Xp*P_deg} /Xp' = Xp - 1/\n");
}
