#include "cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "kvconfig.hpp"
#include "sccp/csv.hpp"
#include "sccp/parser.hpp"
#include "sccp/partition.hpp"
#include "sccp/rts.hpp"
#include "sccp/simulate.hpp"
#include "sccp/tdsha.hpp"

namespace sccp::cli {

namespace {

constexpr int kOk = 0;
constexpr int kSyntax = 1;
constexpr int kSemantic = 2;
constexpr int kRuntime = 3;
constexpr int kUsage = 64;

struct Opts {
  std::string model;
  std::string config_path;
  std::vector<std::string> kappa_specs;
  std::string output = ".";
  std::optional<double> t_end, grid_dt, rel_tol, abs_tol, max_step, event_tol;
  std::vector<double> grid_points;
  std::optional<uint64_t> seed;
  std::optional<int> runs, threads;
  bool dynamic = false;
  std::optional<std::string> policy;
  std::optional<double> K, Lambda, dt, epsilon;
  std::vector<std::string> variants;
  bool dump_rts = false;
  bool dump_tdsha = false;
};

struct PartitionSettings {
  bool dynamic = false;
  std::string policy = "population";
  double K = 100.0;
  double Lambda = 10.0;
  double dt = 0.1;
  double epsilon = 1e-3;
};

int classify_diagnostics(const ParseResult& result, const Io& io) {
  bool syntax = false;
  for (const Diagnostic& d : result.diagnostics) {
    io.err << format(d) << "\n";
    if (d.kind == Diagnostic::Kind::Syntax) syntax = true;
  }
  return syntax ? kSyntax : kSemantic;
}

int load_model(const std::string& path, const Io& io, SccpProgram* out) {
  std::ifstream in(path);
  if (!in) {
    io.err << "cannot read model file '" << path << "'\n";
    return kUsage;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  ParseResult result = parse_program(buf.str());
  if (!result.ok()) return classify_diagnostics(result, io);
  *out = std::move(*result.program);
  return kOk;
}

// Config file first, then flags on top.
SimConfig make_sim_config(const KvConfig& cfg, const Opts& o) {
  SimConfig sim;
  if (auto v = cfg.get_double("sim.t_end")) sim.t_end = *v;
  if (auto v = cfg.get_double("sim.grid_dt")) sim.grid_dt = *v;
  if (auto v = cfg.get_u64("sim.seed")) sim.seed = *v;
  if (auto v = cfg.get_u64("sim.runs")) sim.run_count = static_cast<int>(*v);
  if (auto v = cfg.get_u64("sim.threads")) sim.threads = static_cast<int>(*v);
  if (auto v = cfg.get_double("sim.event_time_tol")) sim.event_time_tol = *v;
  if (auto v = cfg.get_u64("sim.max_inst_events")) sim.max_inst_events = static_cast<int>(*v);
  if (auto v = cfg.get_double("sim.store_floor")) sim.store_floor = *v;
  if (auto v = cfg.get_double("ode.rel_tol")) sim.ode_rel_tol = *v;
  if (auto v = cfg.get_double("ode.abs_tol")) sim.ode_abs_tol = *v;
  if (auto v = cfg.get_double("ode.max_step")) sim.max_step = *v;
  if (auto v = cfg.get("sim.grid_points")) {
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ','))
      sim.grid.push_back(parse_double(item, "sim.grid_points"));
  }
  if (o.t_end) sim.t_end = *o.t_end;
  if (o.grid_dt) sim.grid_dt = *o.grid_dt;
  if (!o.grid_points.empty()) sim.grid = o.grid_points;
  if (o.seed) sim.seed = *o.seed;
  if (o.runs) sim.run_count = *o.runs;
  if (o.threads) sim.threads = *o.threads;
  if (o.rel_tol) sim.ode_rel_tol = *o.rel_tol;
  if (o.abs_tol) sim.ode_abs_tol = *o.abs_tol;
  if (o.max_step) sim.max_step = *o.max_step;
  if (o.event_tol) sim.event_time_tol = *o.event_tol;
  return sim;
}

PartitionSettings make_partition_settings(const KvConfig& cfg, const Opts& o) {
  PartitionSettings p;
  if (auto v = cfg.get("partition.mode")) {
    if (*v != "static" && *v != "dynamic")
      throw ConfigError("partition.mode must be 'static' or 'dynamic'");
    p.dynamic = *v == "dynamic";
  }
  if (auto v = cfg.get("partition.policy")) p.policy = *v;
  if (auto v = cfg.get_double("partition.K")) p.K = *v;
  if (auto v = cfg.get_double("partition.Lambda")) p.Lambda = *v;
  if (auto v = cfg.get_double("partition.dt")) p.dt = *v;
  if (auto v = cfg.get_double("partition.epsilon")) p.epsilon = *v;
  if (o.dynamic) p.dynamic = true;
  if (o.policy) p.policy = *o.policy;
  if (o.K) p.K = *o.K;
  if (o.Lambda) p.Lambda = *o.Lambda;
  if (o.dt) p.dt = *o.dt;
  if (o.epsilon) p.epsilon = *o.epsilon;
  if (p.policy != "population" && p.policy != "rate" && p.policy != "fixed")
    throw ConfigError("partition.policy must be 'population', 'rate', or 'fixed'");
  validate_epsilon(p.epsilon);
  return p;
}

Kappa parse_kappa_bits(const ComponentRts& comp, const std::string& bits) {
  if (bits.size() != comp.rts.edges.size())
    throw ConfigError("kappa for component '" + comp.rts.component + "' has " +
                      std::to_string(bits.size()) + " bits, expected " +
                      std::to_string(comp.rts.edges.size()));
  Kappa k(bits.size(), 0);
  for (size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != '0' && bits[i] != '1')
      throw ConfigError("kappa strings may only contain 0 and 1, got '" + bits + "'");
    k[i] = bits[i] == '1';
  }
  return k;
}

void apply_kappa_spec(const ExtendedProgram& ext, const std::string& spec, KappaFamily* family) {
  if (spec == "bottom") {
    *family = bottom_kappa_family(ext);
    return;
  }
  if (spec == "top") {
    *family = top_kappa_family(ext);
    return;
  }
  // comp=bits[;comp=bits...]
  size_t pos = 0;
  while (pos < spec.size()) {
    size_t semi = spec.find(';', pos);
    if (semi == std::string::npos) semi = spec.size();
    const std::string item = spec.substr(pos, semi - pos);
    pos = semi + 1;
    const size_t eq = item.find('=');
    if (eq == std::string::npos)
      throw ConfigError("bad kappa spec '" + item + "', expected component=bits");
    const std::string comp_name = item.substr(0, eq);
    const std::string bits = item.substr(eq + 1);
    bool found = false;
    for (size_t c = 0; c < ext.components.size(); ++c) {
      if (ext.components[c].rts.component != comp_name) continue;
      (*family)[c] = parse_kappa_bits(ext.components[c], bits);
      found = true;
    }
    if (!found) throw ConfigError("kappa spec names unknown component '" + comp_name + "'");
  }
}

KappaFamily resolve_kappa(const ExtendedProgram& ext, const KvConfig& cfg, const Opts& o) {
  KappaFamily family = bottom_kappa_family(ext);
  for (size_t c = 0; c < ext.components.size(); ++c) {
    if (auto v = cfg.get("kappa." + ext.components[c].rts.component))
      family[c] = parse_kappa_bits(ext.components[c], *v);
  }
  for (const std::string& spec : o.kappa_specs) apply_kappa_spec(ext, spec, &family);
  return family;
}

PartitionPolicy build_policy(const ExtendedProgram& ext, const PartitionSettings& p) {
  if (p.policy == "population") return population_size_policy(p.K, ext, p.epsilon);
  if (p.policy == "rate") return rate_policy(p.Lambda, p.dt, ext, p.epsilon);
  throw ConfigError("policy '" + p.policy + "' is not a dynamic policy");
}

void write_file(const std::filesystem::path& path, const std::string& content, const Io& io) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << content;
  io.out << "wrote " << path.string() << "\n";
}

void report_clamps(const RunStats& stats, const Io& io) {
  if (stats.clamped_rates > 0)
    io.err << "warning: " << stats.clamped_rates
           << " negative rate evaluations were clamped to 0\n";
}

// --- commands -----------------------------------------------------------

int cmd_check(const Opts& o, const Io& io) {
  SccpProgram program;
  if (const int rc = load_model(o.model, io, &program)) return rc;
  io.out << "model: " << program.agents.size() << " agents, " << program.store_vars.size()
         << " store variables, " << program.network.size() << " network components\n";
  if (auto diag = check_simple(program)) {
    io.err << format(*diag) << "\n";
    return kSemantic;
  }
  ExtendedProgram ext = extend_program(program);
  for (const ComponentRts& comp : ext.components) {
    io.out << "component " << comp.rts.component << ": states";
    for (const std::string& s : comp.rts.states) io.out << " " << s;
    io.out << "\n";
    for (const RtsEdge& e : comp.rts.edges) {
      const ApproxVerdict v = is_continuously_approximable(e, ext);
      io.out << "  " << comp.rts.component << ".e" << e.id << ": "
             << (v.ok ? "continuous-ok" : "discrete-only") << " (" << v.reason << ")\n";
    }
  }
  io.out << "simple-program check: ok\n";
  return kOk;
}

int cmd_compile(const Opts& o, const KvConfig& cfg, const Io& io) {
  SccpProgram program;
  if (const int rc = load_model(o.model, io, &program)) return rc;
  if (auto diag = check_simple(program)) {
    io.err << format(*diag) << "\n";
    return kSemantic;
  }
  ExtendedProgram ext = extend_program(program);
  if (o.dump_rts)
    for (const ComponentRts& comp : ext.components) io.out << dump_rts(comp, ext);
  const KappaFamily family = resolve_kappa(ext, cfg, o);
  const Tdsha t = compile_program(ext, family);
  if (o.dump_tdsha) io.out << dump_tdsha(t);
  if (!o.dump_rts && !o.dump_tdsha)
    io.out << "compiled: " << t.modes.size() << " modes, " << t.flows.size() << " flows, "
           << t.stoch.size() << " stochastic transitions, " << t.inst.size()
           << " instantaneous transitions\n";
  return kOk;
}

int cmd_simulate(const Opts& o, const KvConfig& cfg, const Io& io) {
  SccpProgram program;
  if (const int rc = load_model(o.model, io, &program)) return rc;
  if (auto diag = check_simple(program)) {
    io.err << format(*diag) << "\n";
    return kSemantic;
  }
  ExtendedProgram ext = extend_program(program);
  const SimConfig sim = make_sim_config(cfg, o);
  const PartitionSettings part = make_partition_settings(cfg, o);

  Trajectory traj;
  if (part.dynamic && part.policy != "fixed") {
    const PartitionPolicy policy = build_policy(ext, part);
    traj = simulate_dynamic(ext, policy, sim);
  } else {
    const KappaFamily family = resolve_kappa(ext, cfg, o);
    const Tdsha t = compile_program(ext, family);
    traj = simulate(t, sim);
  }
  report_clamps(traj.stats, io);

  const std::filesystem::path dir(o.output);
  std::filesystem::create_directories(dir);
  write_file(dir / "traj.csv", trajectory_csv(traj), io);
  write_file(dir / "events.csv", events_csv(traj), io);
  io.out << "events: " << traj.stats.stochastic_events << " stochastic, "
         << traj.stats.switch_events << " switch, " << traj.stats.instantaneous_events
         << " instantaneous; ode steps: " << traj.stats.ode_steps << "\n";
  return kOk;
}

int cmd_ensemble(const Opts& o, const KvConfig& cfg, const Io& io) {
  SccpProgram program;
  if (const int rc = load_model(o.model, io, &program)) return rc;
  if (auto diag = check_simple(program)) {
    io.err << format(*diag) << "\n";
    return kSemantic;
  }
  ExtendedProgram ext = extend_program(program);
  const SimConfig sim = make_sim_config(cfg, o);
  const PartitionSettings part = make_partition_settings(cfg, o);

  EnsembleResult res;
  if (part.dynamic && part.policy != "fixed") {
    const PartitionPolicy policy = build_policy(ext, part);
    res = simulate_ensemble_dynamic(ext, policy, sim);
  } else {
    const KappaFamily family = resolve_kappa(ext, cfg, o);
    const Tdsha t = compile_program(ext, family);
    res = simulate_ensemble(t, sim);
  }
  if (res.clamped_rates > 0)
    io.err << "warning: " << res.clamped_rates
           << " negative rate evaluations were clamped to 0\n";

  const std::filesystem::path dir(o.output);
  std::filesystem::create_directories(dir);
  write_file(dir / "ensemble.csv", ensemble_csv(res), io);
  io.out << "runs: " << res.runs << "; events: " << res.stochastic_events << " stochastic, "
         << res.switch_events << " switch\n";
  if (!res.times.empty()) {
    io.out << "final-time means:";
    for (size_t v = 0; v < res.var_names.size(); ++v)
      io.out << " " << res.var_names[v] << "=" << format_double_shortest(res.mean.back()[v]);
    io.out << "\n";
  }
  return kOk;
}

struct VariantResult {
  std::string name;
  std::vector<double> times;
  std::vector<std::vector<double>> mean;  // [time][var]
  uint64_t stochastic = 0, switches = 0;
  double wall_ms = 0;
  std::string event_log;  // single-run mode only
};

int cmd_compare(const Opts& o, const KvConfig& cfg, const Io& io) {
  SccpProgram program;
  if (const int rc = load_model(o.model, io, &program)) return rc;
  if (auto diag = check_simple(program)) {
    io.err << format(*diag) << "\n";
    return kSemantic;
  }
  ExtendedProgram ext = extend_program(program);
  const SimConfig sim = make_sim_config(cfg, o);
  const PartitionSettings part = make_partition_settings(cfg, o);
  if (o.variants.empty()) {
    io.err << "compare: at least one --variants entry is required\n";
    return kUsage;
  }

  std::vector<VariantResult> results;
  for (const std::string& spec : o.variants) {
    VariantResult r;
    r.name = spec;
    const auto start = std::chrono::steady_clock::now();
    if (spec == "dynamic") {
      const PartitionPolicy policy = build_policy(ext, part);
      if (sim.run_count == 1) {
        Trajectory tr = simulate_dynamic(ext, policy, sim);
        r.times = tr.times;
        r.mean = tr.samples;
        r.stochastic = tr.stats.stochastic_events;
        r.switches = tr.stats.switch_events;
        r.event_log = events_csv(tr);
      } else {
        EnsembleResult res = simulate_ensemble_dynamic(ext, policy, sim);
        r.times = res.times;
        r.mean = res.mean;
        r.stochastic = res.stochastic_events;
        r.switches = res.switch_events;
      }
    } else {
      KappaFamily family = bottom_kappa_family(ext);
      if (spec.rfind("kappa:", 0) == 0) {
        apply_kappa_spec(ext, spec.substr(6), &family);
      } else if (spec == "bottom" || spec == "top") {
        apply_kappa_spec(ext, spec, &family);
      } else {
        io.err << "unknown variant '" << spec
               << "' (expected bottom, top, dynamic, or kappa:<comp>=<bits>[;...])\n";
        return kUsage;
      }
      const Tdsha t = compile_program(ext, family);
      if (sim.run_count == 1) {
        Trajectory tr = simulate(t, sim);
        r.times = tr.times;
        r.mean = tr.samples;
        r.stochastic = tr.stats.stochastic_events;
        r.switches = tr.stats.switch_events;
        r.event_log = events_csv(tr);
      } else {
        EnsembleResult res = simulate_ensemble(t, sim);
        r.times = res.times;
        r.mean = res.mean;
        r.stochastic = res.stochastic_events;
        r.switches = res.switch_events;
      }
    }
    r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                          start)
                    .count();
    results.push_back(std::move(r));
  }

  io.out << "variant, stochastic_events, switch_events, wall_ms\n";
  for (const VariantResult& r : results)
    io.out << r.name << ", " << r.stochastic << ", " << r.switches << ", "
           << format_double_shortest(r.wall_ms) << "\n";

  for (size_t a = 0; a < results.size(); ++a)
    for (size_t b = a + 1; b < results.size(); ++b) {
      double dev = 0;
      const size_t T = std::min(results[a].mean.size(), results[b].mean.size());
      for (size_t t = 0; t < T; ++t)
        for (size_t v = 0; v < results[a].mean[t].size(); ++v)
          dev = std::max(dev, std::abs(results[a].mean[t][v] - results[b].mean[t][v]));
      io.out << "max deviation " << results[a].name << " vs " << results[b].name << ": "
             << format_double_shortest(dev) << "\n";
      if (sim.run_count == 1)
        io.out << "event logs " << results[a].name << " vs " << results[b].name << ": "
               << (results[a].event_log == results[b].event_log ? "identical" : "different")
               << "\n";
    }

  // Per-variant grid means, side by side.
  std::ostringstream csv;
  csv << "t";
  for (const VariantResult& r : results)
    for (const std::string& v : ext.vars) csv << "," << r.name << ".mean_" << v;
  csv << "\n";
  if (!results.empty()) {
    for (size_t t = 0; t < results[0].times.size(); ++t) {
      csv << g17(results[0].times[t]);
      for (const VariantResult& r : results)
        for (size_t v = 0; v < ext.vars.size(); ++v) csv << "," << g17(r.mean[t][v]);
      csv << "\n";
    }
  }
  const std::filesystem::path dir(o.output);
  std::filesystem::create_directories(dir);
  write_file(dir / "compare.csv", csv.str(), io);
  return kOk;
}

void add_common_sim_flags(CLI::App* sub, Opts& o) {
  sub->add_option("--config", o.config_path, "flat key=value config file");
  sub->add_option("--t-end", o.t_end, "simulation horizon");
  sub->add_option("--seed", o.seed, "RNG seed");
  sub->add_option("--grid", o.grid_dt, "output sample interval");
  sub->add_option("--grid-points", o.grid_points, "explicit output times (comma separated)")
      ->delimiter(',');
  sub->add_option("--rel-tol", o.rel_tol, "ODE relative tolerance");
  sub->add_option("--abs-tol", o.abs_tol, "ODE absolute tolerance");
  sub->add_option("--max-step", o.max_step, "ODE maximum step");
  sub->add_option("--event-tol", o.event_tol, "event localization tolerance");
  sub->add_option("--kappa", o.kappa_specs,
                  "partition: 'bottom', 'top', or component=bits (repeatable)");
  sub->add_flag("--dynamic", o.dynamic, "enable dynamic repartitioning");
  sub->add_option("--policy", o.policy, "dynamic policy: population|rate|fixed");
  sub->add_option("--K", o.K, "population policy threshold (accepts inf)");
  sub->add_option("--Lambda", o.Lambda, "rate policy threshold");
  sub->add_option("--dt", o.dt, "rate policy time step");
  sub->add_option("--epsilon", o.epsilon, "hysteresis half-width");
  sub->add_option("--output", o.output, "output directory");
  sub->add_option("--threads", o.threads, "worker threads for ensembles");
}

}  // namespace

int run(int argc, const char* const* argv, const Io& io) {
  CLI::App app{"sccpsim: compile sCCP models to stochastic hybrid automata and simulate them"};
  app.require_subcommand(1);
  Opts o;

  CLI::App* check = app.add_subcommand("check", "validate a model and report per-edge verdicts");
  check->add_option("model", o.model, "model file")->required();

  CLI::App* compile = app.add_subcommand("compile", "compile and dump automata");
  compile->add_option("model", o.model, "model file")->required();
  compile->add_option("--config", o.config_path, "flat key=value config file");
  compile->add_option("--kappa", o.kappa_specs,
                      "partition: 'bottom', 'top', or component=bits (repeatable)");
  compile->add_flag("--dump-rts", o.dump_rts, "dump the per-component transition systems");
  compile->add_flag("--dump-tdsha", o.dump_tdsha, "dump the compiled automaton");

  CLI::App* sim = app.add_subcommand("simulate", "single trajectory");
  sim->add_option("model", o.model, "model file")->required();
  add_common_sim_flags(sim, o);

  CLI::App* ens = app.add_subcommand("ensemble", "independent runs with streamed moments");
  ens->add_option("model", o.model, "model file")->required();
  ens->add_option("--runs", o.runs, "number of runs")->required();
  add_common_sim_flags(ens, o);

  CLI::App* cmp = app.add_subcommand("compare", "run partition variants under a shared seed");
  cmp->add_option("model", o.model, "model file")->required();
  cmp->add_option("--variants", o.variants, "bottom|top|dynamic|kappa:<comp>=<bits>[;...]")
      ->required()
      ->delimiter(',');
  cmp->add_option("--runs", o.runs, "runs per variant");
  add_common_sim_flags(cmp, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, io.out, io.err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, io.out, io.err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, io.out, io.err);
    return kUsage;
  }

  try {
    KvConfig cfg;
    if (!o.config_path.empty()) cfg = KvConfig::from_file(o.config_path);
    if (check->parsed()) return cmd_check(o, io);
    if (compile->parsed()) return cmd_compile(o, cfg, io);
    if (sim->parsed()) return cmd_simulate(o, cfg, io);
    if (ens->parsed()) return cmd_ensemble(o, cfg, io);
    if (cmp->parsed()) return cmd_compare(o, cfg, io);
    io.err << "no subcommand\n";
    return kUsage;
  } catch (const ConfigError& e) {
    io.err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const CompileError& e) {
    io.err << "error: " << e.what() << "\n";
    return kSemantic;
  } catch (const Error& e) {
    io.err << "error: " << e.what() << "\n";
    return kRuntime;
  }
}

}  // namespace sccp::cli
