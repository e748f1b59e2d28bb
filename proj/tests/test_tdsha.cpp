#include <algorithm>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "sccp/parser.hpp"
#include "sccp/rng.hpp"
#include "sccp/tdsha.hpp"

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

Kappa bits(const char* s) {
  Kappa k;
  for (const char* c = s; *c; ++c) k.push_back(*c == '1');
  return k;
}

}  // namespace

TEST_CASE("continuous approximability verdicts") {
  const SccpProgram p = load("gene.sccp");
  const ExtendedProgram ext = extend_program(p);

  SUBCASE("every edge of the gene model is approximable") {
    for (const ComponentRts& comp : ext.components)
      for (const RtsEdge& e : comp.rts.edges) {
        const ApproxVerdict v = is_continuously_approximable(e, ext);
        CAPTURE(comp.rts.component);
        CAPTURE(e.id);
        CAPTURE(v.reason);
        CHECK(v.ok);
      }
  }
  SUBCASE("a guarded rate that vanishes on the boundary passes") {
    const RtsEdge& bind1 = ext.components[0].rts.edges[1];  // guard Xp2 > 0, rate kp1*Xp2*P
    CHECK(is_continuously_approximable(bind1, ext).ok);
  }
  SUBCASE("a rate that stays positive outside its guard fails") {
    const SccpProgram q = *parse_program(
                               "sccp v1\nvar X = 0\n"
                               "a = [X > 5 -> X' = X + 1]{1}.a\nsystem a\n")
                               .program;
    const ExtendedProgram qext = extend_program(q);
    const ApproxVerdict v = is_continuously_approximable(qext.components[0].rts.edges[0], qext);
    CHECK(!v.ok);
  }
  SUBCASE("a rate with the matching threshold factor passes") {
    const SccpProgram q = *parse_program(
                               "sccp v1\nvar X = 0\n"
                               "a = [X > 5 -> X' = X + 1]{2*(X - 5)}.a\nsystem a\n")
                               .program;
    const ExtendedProgram qext = extend_program(q);
    CHECK(is_continuously_approximable(qext.components[0].rts.edges[0], qext).ok);
  }
  SUBCASE("min/max rates are rejected as non-differentiable") {
    const SccpProgram q = *parse_program(
                               "sccp v1\nvar X = 0\n"
                               "a = [true -> X' = X + 1]{min(X, 3)}.a\nsystem a\n")
                               .program;
    const ExtendedProgram qext = extend_program(q);
    CHECK(!is_continuously_approximable(qext.components[0].rts.edges[0], qext).ok);
  }
  SUBCASE("non-increment updates are rejected") {
    const SccpProgram q = *parse_program(
                               "sccp v1\nvar X = 1\n"
                               "a = [true -> X' = 2*X]{X}.a\nsystem a\n")
                               .program;
    const ExtendedProgram qext = extend_program(q);
    CHECK(!is_continuously_approximable(qext.components[0].rts.edges[0], qext).ok);
  }
}

TEST_CASE("quotient by continuous connectivity") {
  const SccpProgram p = load("gene.sccp");
  const ExtendedProgram ext = extend_program(p);
  const Rts& gene = ext.components[0].rts;

  SUBCASE("the running-example kappa splits off gene0") {
    const auto q = quotient(gene, bits("100111"));
    CHECK(q == std::vector<std::vector<int>>{{0}, {1, 2}});
  }
  SUBCASE("all-zero kappa gives singletons") {
    const auto q = quotient(gene, bits("000000"));
    CHECK(q == std::vector<std::vector<int>>{{0}, {1}, {2}});
  }
  SUBCASE("all-one kappa merges everything") {
    const auto q = quotient(gene, bits("111111"));
    CHECK(q == std::vector<std::vector<int>>{{0, 1, 2}});
  }
  SUBCASE("wrong shape raises") {
    CHECK_THROWS_AS(quotient(gene, bits("10")), InconsistentKappa);
  }
}

TEST_CASE("compile_component") {
  const SccpProgram p = load("gene.sccp");
  const ExtendedProgram ext = extend_program(p);

  SUBCASE("gene at kappa=(1,0,0,1,1,1): 2 modes, 4 flows, 2 stochastic jumps, no TD") {
    const Tdsha t = compile_component(ext, 0, bits("100111"));
    CHECK(t.modes.size() == 2);
    CHECK(t.flows.size() == 4);
    CHECK(t.stoch.size() == 2);
    CHECK(t.inst.empty());
    CHECK(t.modes[0].name == "{gene0}");
    CHECK(t.modes[1].name == "{gene1,gene2}");
    CHECK(t.init_mode == 0);
    CHECK(t.stoch[0].name == "gene0.e1");
    CHECK(t.stoch[0].exit_mode == 0);
    CHECK(t.stoch[0].enter_mode == 1);
    CHECK(t.stoch[1].name == "gene0.e2");
    CHECK(t.stoch[1].exit_mode == 1);
    CHECK(t.stoch[1].enter_mode == 0);
  }
  SUBCASE("stochastic resets pin the owning component's counters") {
    const Tdsha t = compile_component(ext, 0, bits("100111"));
    const StochTransition& bind1 = t.stoch[0];  // gene0 -> gene1
    REQUIRE(bind1.reset.assigns.size() == 3);
    CHECK(bind1.reset.assigns[0].var_name == "P_gene0");
    CHECK(to_string(bind1.reset.assigns[0].rhs) == "0");
    CHECK(to_string(bind1.reset.assigns[1].rhs) == "1");
    CHECK(to_string(bind1.reset.assigns[2].rhs) == "0");
  }
  SUBCASE("deg at kappa=(0): one mode, one stochastic self-loop, no flows") {
    const Tdsha t = compile_component(ext, 1, bits("0"));
    CHECK(t.modes.size() == 1);
    CHECK(t.flows.empty());
    CHECK(t.stoch.size() == 1);
    CHECK(t.stoch[0].exit_mode == t.stoch[0].enter_mode);
  }
  SUBCASE("deg at kappa=(1): one mode, one flow, no stochastic transitions") {
    const Tdsha t = compile_component(ext, 1, bits("1"));
    CHECK(t.modes.size() == 1);
    CHECK(t.flows.size() == 1);
    CHECK(t.stoch.empty());
  }
  SUBCASE("marking a non-approximable edge continuous is inconsistent") {
    const SccpProgram q = *parse_program(
                               "sccp v1\nvar X = 0\n"
                               "a = [X > 5 -> X' = X + 1]{1}.a\nsystem a\n")
                               .program;
    const ExtendedProgram qext = extend_program(q);
    CHECK_THROWS_AS(compile_component(qext, 0, bits("1")), InconsistentKappa);
  }
}

TEST_CASE("product") {
  const SccpProgram p = load("gene.sccp");
  const ExtendedProgram ext = extend_program(p);
  const Tdsha gene = compile_component(ext, 0, bits("100111"));
  const Tdsha deg = compile_component(ext, 1, bits("1"));
  const Tdsha dimer = compile_component(ext, 2, bits("11"));

  SUBCASE("the running example's product has 2 modes") {
    const Tdsha t = product(product(gene, deg), dimer);
    CHECK(t.modes.size() == 2);
    CHECK(t.stoch.size() == 2);
    CHECK(t.flows.size() == 4 + 1 * 2 + 2 * 2);  // lifts multiply by mode counts
  }
  SUBCASE("a one-mode transition-free automaton is an identity element") {
    Tdsha unit;
    unit.vars = gene.vars;
    unit.n_store = gene.n_store;
    unit.param_names = gene.param_names;
    unit.params = gene.params;
    unit.modes.push_back(Mode{});
    unit.init_mode = 0;
    unit.init = gene.init;
    const Tdsha t = product(gene, unit);
    CHECK(t.modes.size() == gene.modes.size());
    CHECK(t.flows.size() == gene.flows.size());
    CHECK(t.stoch.size() == gene.stoch.size());
    for (size_t m = 0; m < t.modes.size(); ++m)
      CHECK(t.modes[m].classes == gene.modes[m].classes);
  }
  SUBCASE("mode count is multiplicative") {
    const Tdsha gd = product(gene, deg);
    CHECK(gd.modes.size() == gene.modes.size() * deg.modes.size());
    const Tdsha bottom_gene = compile_component(ext, 0, bits("000000"));
    const Tdsha t = product(bottom_gene, dimer);
    CHECK(t.modes.size() == 3);
  }
  SUBCASE("product symmetry: swapping factors is an isomorphism under mode-pair swap") {
    const Tdsha ab = product(gene, dimer);
    const Tdsha ba = product(dimer, gene);
    REQUIRE(ab.modes.size() == ba.modes.size());
    const size_t n1 = gene.modes.size();
    const size_t n2 = dimer.modes.size();
    auto swap_id = [n1, n2](size_t id) {
      const size_t i = id / n2, j = id % n2;
      return j * n1 + i;
    };
    for (size_t i = 0; i < n1; ++i)
      for (size_t j = 0; j < n2; ++j) {
        const Mode& m_ab = ab.modes[i * n2 + j];
        const Mode& m_ba = ba.modes[swap_id(i * n2 + j)];
        REQUIRE(m_ab.classes.size() == 2);
        CHECK(m_ab.classes[0] == m_ba.classes[1]);
        CHECK(m_ab.classes[1] == m_ba.classes[0]);
      }
    CHECK(ab.stoch.size() == ba.stoch.size());
    CHECK(ab.flows.size() == ba.flows.size());
    for (const StochTransition& s : ab.stoch) {
      const bool found = std::any_of(ba.stoch.begin(), ba.stoch.end(), [&](const auto& o) {
        return o.name == s.name &&
               o.exit_mode == static_cast<int>(swap_id(static_cast<size_t>(s.exit_mode))) &&
               o.enter_mode == static_cast<int>(swap_id(static_cast<size_t>(s.enter_mode)));
      });
      CHECK(found);
    }
  }
  SUBCASE("mismatched variable lists are rejected") {
    const SccpProgram q = *parse_program(
                               "sccp v1\nvar Z = 0\na = [true -> true]{1}.a\nsystem a\n")
                               .program;
    const ExtendedProgram qext = extend_program(q);
    const Tdsha other = compile_component(qext, 0, bits("0"));
    CHECK_THROWS_AS(product(gene, other), CompileError);
  }
}

TEST_CASE("compile_program") {
  const SccpProgram p = load("gene.sccp");
  const ExtendedProgram ext = extend_program(p);

  SUBCASE("the paper-coherent product: 2 modes, 3 stochastic jumps, no TD") {
    const Tdsha t = compile_program(ext, {bits("100110"), bits("1"), bits("11")});
    CHECK(t.modes.size() == 2);
    CHECK(t.stoch.size() == 3);
    CHECK(t.inst.empty());
  }
  SUBCASE("bottom kappa: the CTMC of the standard semantics") {
    const Tdsha t = compile_program(ext, bottom_kappa_family(ext));
    CHECK(t.flows.empty());
    CHECK(t.inst.empty());
    CHECK(t.modes.size() == 3 * 1 * 1);
    // the distinct transition labels are in bijection with the program's
    // actions (lifting makes one copy per co-factor mode)
    size_t n_actions = 0;
    for (const AgentDef& a : p.agents) n_actions += a.actions.size();
    std::vector<std::string> labels;
    for (const StochTransition& s : t.stoch) labels.push_back(s.name);
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    CHECK(labels.size() == n_actions);
    // from any product mode, the outgoing transitions are exactly the
    // enabled actions of the current agent states
    for (size_t m = 0; m < t.modes.size(); ++m) {
      size_t outgoing = 0;
      for (const StochTransition& s : t.stoch)
        if (s.exit_mode == static_cast<int>(m)) ++outgoing;
      size_t expected = 0;
      for (size_t c = 0; c < t.modes[m].classes.size(); ++c) {
        REQUIRE(t.modes[m].classes[c].size() == 1);
        const int state = t.modes[m].classes[c][0];
        for (const RtsEdge& e : ext.components[c].rts.edges)
          if (e.exit_state == state) ++expected;
      }
      CHECK(outgoing == expected);
    }
    for (const ComponentRts& comp : ext.components) {
      for (const RtsEdge& e : comp.rts.edges) {
        const std::string name = comp.rts.component + ".e" + std::to_string(e.id);
        const auto it = std::find_if(t.stoch.begin(), t.stoch.end(),
                                     [&](const auto& s) { return s.name == name; });
        REQUIRE(it != t.stoch.end());
        CHECK(it->guard == e.guard);
        // with P_exit = 1 the augmented rate equals the action's rate
        std::vector<double> y(ext.vars.size(), 0.0);
        y[0] = 7;
        y[1] = 3;
        y[static_cast<size_t>(comp.counter_var(e.exit_state))] = 1.0;
        const Rts base_rts = build_rts(p, comp.rts.agent);
        const Expr& base_rate = base_rts.edges[static_cast<size_t>(e.id)].rate;
        CHECK(it->rate.eval(ext.context(y)) ==
              doctest::Approx(base_rate.eval(ext.context(y))));
      }
    }
  }
  SUBCASE("top kappa: the fluid ODE") {
    const Tdsha t = compile_program(ext, top_kappa_family(ext));
    CHECK(t.stoch.empty());
    CHECK(t.inst.empty());
    CHECK(t.modes.size() == 1);
    CHECK(t.flows.size() == 9);
  }
  SUBCASE("single-component network compiles as the component itself") {
    const SccpProgram q = load("birthdeath.sccp");
    const ExtendedProgram qext = extend_program(q);
    const Tdsha direct = compile_component(qext, 0, bits("01"));
    const Tdsha folded = compile_program(qext, {bits("01")});
    CHECK(direct.modes.size() == folded.modes.size());
    CHECK(direct.flows.size() == folded.flows.size());
    CHECK(direct.stoch.size() == folded.stoch.size());
  }
  SUBCASE("kappa family of the wrong arity is rejected") {
    CHECK_THROWS_AS(compile_program(ext, {bits("100110")}), InconsistentKappa);
  }
}

TEST_CASE("kappa lattice operations") {
  const SccpProgram p = load("gene.sccp");
  const ExtendedProgram ext = extend_program(p);

  SUBCASE("bottom is below everything") {
    CHECK(kappa_leq(bits("00"), bits("01")));
    CHECK(kappa_leq(bits("000000"), bits("100111")));
  }
  SUBCASE("incomparable vectors") {
    CHECK(!kappa_leq(bits("10"), bits("01")));
    CHECK(!kappa_leq(bits("01"), bits("10")));
  }
  SUBCASE("pointwise implication") {
    CHECK(kappa_leq(bits("100111"), bits("111111")));
    CHECK(!kappa_leq(bits("111111"), bits("100111")));
  }
  SUBCASE("shape mismatch raises") {
    CHECK_THROWS_AS(kappa_leq(bits("10"), bits("100")), CompileError);
  }
  SUBCASE("bottom and top on the gene model") {
    CHECK(bottom_kappa(ext.components[0].rts) == bits("000000"));
    CHECK(top_kappa(ext.components[0], ext) == bits("111111"));
    CHECK(top_kappa(ext.components[2], ext) == bits("11"));
  }
  SUBCASE("top excludes non-approximable edges") {
    const SccpProgram q = *parse_program(
                               "sccp v1\nvar X = 0\n"
                               "a = [X > 5 -> X' = X + 1]{1}.a\nsystem a\n")
                               .program;
    const ExtendedProgram qext = extend_program(q);
    CHECK(top_kappa(qext.components[0], qext) == bits("0"));
  }
}

TEST_CASE("vector_field") {
  const SccpProgram p = load("gene.sccp");
  const ExtendedProgram ext = extend_program(p);

  SUBCASE("a mode with no flows has an identically zero field") {
    const Tdsha t = compile_component(ext, 1, bits("0"));
    std::vector<double> y(ext.vars.size(), 5.0);
    const auto drift = vector_field(t, 0, y);
    for (const double d : drift) CHECK(d == 0.0);
  }
  SUBCASE("degradation-only flow") {
    const SccpProgram q = *parse_program(
                               "sccp v1\nparam kd = 1\nvar Xp = 0\n"
                               "deg = [true -> Xp' = Xp - 1]{kd*Xp}.deg\nsystem deg\n")
                               .program;
    const ExtendedProgram qext = extend_program(q);
    const Tdsha t = compile_component(qext, 0, bits("1"));
    const std::vector<double> y{10.0, 1.0};  // Xp, P_deg
    const auto drift = vector_field(t, 0, y);
    CHECK(drift[0] == doctest::Approx(-10.0));
    CHECK(drift[1] == 0.0);
  }
  SUBCASE("dimer flows sum") {
    const SccpProgram q = *parse_program(
                               "sccp v1\nparam kx = 1\nparam kmx = 2\n"
                               "var Xp = 0\nvar Xp2 = 0\n"
                               "dimer = [true -> Xp' = Xp - 2 && Xp2' = Xp2 + 1]"
                               "{kx*Xp*(Xp-1)/2}.dimer\n"
                               "      + [true -> Xp' = Xp + 2 && Xp2' = Xp2 - 1]"
                               "{kmx*Xp2}.dimer\n"
                               "system dimer\n")
                               .program;
    const ExtendedProgram qext = extend_program(q);
    const Tdsha t = compile_component(qext, 0, bits("11"));
    const std::vector<double> y{4.0, 1.0, 1.0};  // Xp, Xp2, P_dimer
    const auto drift = vector_field(t, 0, y);
    CHECK(drift[0] == doctest::Approx(-8.0));
    CHECK(drift[1] == doctest::Approx(4.0));
  }
  SUBCASE("top kappa drift equals the hand-derived fluid right-hand side") {
    const Tdsha t = compile_program(ext, top_kappa_family(ext));
    RngStream rng(5);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> y(ext.vars.size());
      for (double& v : y) v = static_cast<double>(rng.next_u64() % 50) / 5.0;
      const double xp = y[0], xp2 = y[1], p0 = y[2], p1 = y[3], p2 = y[4], pdeg = y[5],
                   pdim = y[6];
      const double kp1 = 1.0, kp2 = 0.5, ku1 = 0.4, ku2 = 0.3, kd = 0.1, kx = 0.2, kmx = 0.5;
      // the field clamps negative rate evaluations to zero
      const auto pos = [](double r) { return r > 0 ? r : 0.0; };
      const double r_prod0 = pos(kp1 * p0);
      const double r_bind1 = pos(kp1 * xp2 * p0);
      const double r_unbind1 = pos(ku1 * p1);
      const double r_prod1 = pos(kp2 * p1);
      const double r_bind2 = pos(kp2 * xp2 * p1);
      const double r_unbind2 = pos(ku2 * p2);
      const double r_deg = pos(kd * xp * pdeg);
      const double r_dim = pos(kx * xp * (xp - 1) / 2 * pdim);
      const double r_undim = pos(kmx * xp2 * pdim);
      const std::vector<double> expected{
          r_prod0 + r_prod1 - r_deg - 2 * r_dim + 2 * r_undim,  // Xp
          r_dim - r_undim,                                      // Xp2
          -r_bind1 + r_unbind1,                                 // P_gene0
          r_bind1 - r_unbind1 - r_bind2 + r_unbind2,            // P_gene1
          r_bind2 - r_unbind2,                                  // P_gene2
          0.0,                                                  // P_deg
          0.0,                                                  // P_dimer
      };
      const auto drift = vector_field(t, 0, y);
      for (size_t i = 0; i < expected.size(); ++i)
        CHECK(drift[i] == doctest::Approx(expected[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("property: quotient refinement is monotone in the kappa order") {
  const SccpProgram p = load("gene.sccp");
  const ExtendedProgram ext = extend_program(p);
  const Rts& gene = ext.components[0].rts;
  RngStream rng(17);

  for (int trial = 0; trial < 200; ++trial) {
    Kappa k1(6), k2(6);
    for (size_t i = 0; i < 6; ++i) {
      k2[i] = rng.next_u64() % 2;
      k1[i] = k2[i] && (rng.next_u64() % 2);  // k1 below k2 pointwise
    }
    REQUIRE(kappa_leq(k1, k2));
    const auto q1 = quotient(gene, k1);
    const auto q2 = quotient(gene, k2);
    for (const auto& c1 : q1) {
      const bool contained = std::any_of(q2.begin(), q2.end(), [&](const auto& c2) {
        return std::includes(c2.begin(), c2.end(), c1.begin(), c1.end());
      });
      CHECK(contained);
    }
  }
}

TEST_CASE("dump_tdsha is stable and self-describing") {
  const SccpProgram p = load("birthdeath.sccp");
  const ExtendedProgram ext = extend_program(p);
  const Tdsha t = compile_program(ext, top_kappa_family(ext));
  const std::string dump = dump_tdsha(t);
  CHECK(dump ==
        "tdsha\n"
        "vars: X P_bd\n"
        "modes: 1\n"
        "mode m0: {bd}\n"
        "  d/dt X = 1*(k*P_bd) + -1*(kd*X*P_bd)\n"
        "stochastic transitions: 0\n"
        "instantaneous transitions: 0\n"
        "init: mode m0\n"
        "  X = 0\n"
        "  P_bd = 1\n");
}
