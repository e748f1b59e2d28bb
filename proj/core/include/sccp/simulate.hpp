#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sccp/partition.hpp"
#include "sccp/rng.hpp"
#include "sccp/tdsha.hpp"

namespace sccp {

struct SimConfig {
  double t_end = 10.0;
  double grid_dt = 0.1;
  std::vector<double> grid;  // explicit output times; wins when non-empty
  uint64_t seed = 1;
  double ode_rel_tol = 1e-6;
  double ode_abs_tol = 1e-9;
  double max_step = 0.5;
  double event_time_tol = 1e-9;
  int run_count = 1;
  int max_inst_events = 10000;  // cascade cap per time instant
  int threads = 1;
  bool runtime_checks = true;
  // Jumps from fractional hybrid states may undershoot zero by up to one
  // jump size; anything below this floor is treated as a runaway and
  // aborts the run.
  double store_floor = -10.0;

  void validate() const;  // throws ConfigError
  std::vector<double> make_grid() const;
};

enum class EventKind { Stochastic, Instantaneous, Switch };
const char* to_string(EventKind kind);

struct Event {
  double t = 0;
  EventKind kind = EventKind::Stochastic;
  std::string transition;
  std::string detail;
  std::vector<double> pre, post;
};

struct RunStats {
  uint64_t ode_steps = 0;
  uint64_t ode_rejected = 0;
  uint64_t clamped_rates = 0;
  uint64_t stochastic_events = 0;
  uint64_t instantaneous_events = 0;
  uint64_t switch_events = 0;
};

struct Trajectory {
  std::vector<std::string> var_names;
  std::vector<double> times;
  std::vector<std::vector<double>> samples;  // one valuation per time
  std::vector<int> modes;                    // mode id per time
  std::vector<Event> events;
  RunStats stats;
};

// Single PDMP run of a statically compiled automaton (substream
// `run_index` of the seed).
Trajectory simulate(const Tdsha& tdsha, const SimConfig& cfg, uint64_t run_index = 0);

// Single run with dynamic repartitioning.
Trajectory simulate_dynamic(const ExtendedProgram& ext, const PartitionPolicy& policy,
                            const SimConfig& cfg, uint64_t run_index = 0);

struct EnsembleResult {
  std::vector<std::string> var_names;
  std::vector<double> times;
  std::vector<std::vector<double>> mean;      // [time][var]
  std::vector<std::vector<double>> variance;  // unbiased, 0 for a single run
  uint64_t runs = 0;
  uint64_t stochastic_events = 0;
  uint64_t instantaneous_events = 0;
  uint64_t switch_events = 0;
  uint64_t clamped_rates = 0;
  std::map<std::string, uint64_t> events_by_transition;
};

EnsembleResult simulate_ensemble(const Tdsha& tdsha, const SimConfig& cfg);
EnsembleResult simulate_ensemble_dynamic(const ExtendedProgram& ext,
                                         const PartitionPolicy& policy, const SimConfig& cfg);

}  // namespace sccp
