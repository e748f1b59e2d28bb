#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>

#include "sccp/parser.hpp"
#include "sccp/partition.hpp"
#include "sccp/simulate.hpp"
#include "sccp/tdsha.hpp"

namespace {

using namespace sccp;

std::string read_model(const char* name) {
  std::ifstream in(std::string(SCCP_MODELS_DIR) + "/" + name);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Kappa bits(const char* s) {
  Kappa k;
  for (const char* c = s; *c; ++c) k.push_back(*c == '1');
  return k;
}

const std::string& gene_source() {
  static const std::string src = read_model("gene.sccp");
  return src;
}

const ExtendedProgram& gene_ext() {
  static const ExtendedProgram ext = extend_program(*parse_program(gene_source()).program);
  return ext;
}

const ExtendedProgram& birthdeath_ext() {
  static const ExtendedProgram ext =
      extend_program(*parse_program(read_model("birthdeath.sccp")).program);
  return ext;
}

void BM_ParseGene(benchmark::State& state) {
  const std::string& src = gene_source();
  for (auto _ : state) {
    ParseResult r = parse_program(src);
    benchmark::DoNotOptimize(r.program);
  }
}
BENCHMARK(BM_ParseGene);

void BM_CompileGeneHybrid(benchmark::State& state) {
  const ExtendedProgram& ext = gene_ext();
  const KappaFamily family{bits("100111"), bits("1"), bits("11")};
  for (auto _ : state) {
    Tdsha t = compile_program(ext, family);
    benchmark::DoNotOptimize(t.modes);
  }
}
BENCHMARK(BM_CompileGeneHybrid);

void BM_SsaBirthDeath(benchmark::State& state) {
  const ExtendedProgram& ext = birthdeath_ext();
  const Tdsha t = compile_program(ext, bottom_kappa_family(ext));
  SimConfig cfg;
  cfg.t_end = 100;
  cfg.grid_dt = 1;
  uint64_t run = 0;
  uint64_t jumps = 0;
  for (auto _ : state) {
    const Trajectory traj = simulate(t, cfg, run++);
    jumps += traj.stats.stochastic_events;
    benchmark::DoNotOptimize(traj.samples);
  }
  state.counters["jumps/s"] =
      benchmark::Counter(static_cast<double>(jumps), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_SsaBirthDeath);

void BM_OdeTopBirthDeath(benchmark::State& state) {
  const ExtendedProgram& ext = birthdeath_ext();
  const Tdsha t = compile_program(ext, top_kappa_family(ext));
  SimConfig cfg;
  cfg.t_end = 100;
  cfg.grid_dt = 1;
  for (auto _ : state) {
    const Trajectory traj = simulate(t, cfg);
    benchmark::DoNotOptimize(traj.samples);
  }
}
BENCHMARK(BM_OdeTopBirthDeath);

void BM_HybridGene(benchmark::State& state) {
  const ExtendedProgram& ext = gene_ext();
  const Tdsha t = compile_program(ext, {bits("100111"), bits("1"), bits("11")});
  SimConfig cfg;
  cfg.t_end = 50;
  cfg.grid_dt = 1;
  uint64_t run = 0;
  for (auto _ : state) {
    const Trajectory traj = simulate(t, cfg, run++);
    benchmark::DoNotOptimize(traj.samples);
  }
}
BENCHMARK(BM_HybridGene);

void BM_DynamicGene(benchmark::State& state) {
  const ExtendedProgram& ext = gene_ext();
  const PartitionPolicy policy = population_size_policy(8, ext);
  SimConfig cfg;
  cfg.t_end = 50;
  cfg.grid_dt = 1;
  uint64_t run = 0;
  for (auto _ : state) {
    const Trajectory traj = simulate_dynamic(ext, policy, cfg, run++);
    benchmark::DoNotOptimize(traj.samples);
  }
}
BENCHMARK(BM_DynamicGene);

}  // namespace

BENCHMARK_MAIN();
