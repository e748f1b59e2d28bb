#include "sccp/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <memory>
#include <thread>

#include "sccp/ode.hpp"

namespace sccp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

void SimConfig::validate() const {
  if (!(t_end >= 0)) throw ConfigError("t_end must be nonnegative");
  if (grid.empty() && !(grid_dt > 0)) throw ConfigError("output grid interval must be positive");
  for (size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 0 || grid[i] > t_end) throw ConfigError("explicit grid points must lie in [0, t_end]");
    if (i > 0 && grid[i] < grid[i - 1]) throw ConfigError("explicit grid must be nondecreasing");
  }
  if (!(ode_rel_tol > 0) || !(ode_abs_tol > 0))
    throw ConfigError("ODE tolerances must be positive");
  if (!(max_step > 0)) throw ConfigError("max_step must be positive");
  if (!(event_time_tol > 0)) throw ConfigError("event_time_tol must be positive");
  if (run_count < 1) throw ConfigError("run_count must be at least 1");
  if (max_inst_events < 1) throw ConfigError("max_inst_events must be at least 1");
}

std::vector<double> SimConfig::make_grid() const {
  if (!grid.empty()) return grid;
  std::vector<double> g;
  const double tiny = 1e-9 * grid_dt;
  for (double t = 0; t < t_end - tiny; t += grid_dt) g.push_back(t);
  g.push_back(t_end);
  return g;
}

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Stochastic: return "stochastic";
    case EventKind::Instantaneous: return "instantaneous";
    case EventKind::Switch: return "switch";
  }
  return "?";
}

namespace {

// The engine's access to the automaton it is driving: transitions out of
// the current mode, mode changes on resets, and the drift field.
class SystemView {
 public:
  virtual ~SystemView() = default;
  virtual const std::vector<std::string>& var_names() const = 0;
  virtual int n_store() const = 0;
  virtual const std::vector<double>& init_valuation() const = 0;
  virtual const std::vector<TdshaComponent>& components() const = 0;
  virtual EvalContext context(std::span<const double> y) const = 0;

  virtual int mode_id() const = 0;
  virtual bool has_flows() const = 0;
  virtual void drift(std::span<const double> y, std::span<double> dy, RunStats& st) const = 0;

  virtual size_t stoch_count() const = 0;
  virtual double stoch_rate(size_t i, const EvalContext& ctx, RunStats& st) const = 0;
  virtual std::string stoch_name(size_t i) const = 0;
  virtual std::string stoch_detail(size_t i) const = 0;
  virtual void apply_stoch(size_t i, std::vector<double>& y) = 0;

  virtual size_t inst_count() const = 0;
  virtual bool inst_guard(size_t i, const EvalContext& ctx) const = 0;
  virtual double inst_priority(size_t i, const EvalContext& ctx) const = 0;
  virtual long inst_group(size_t i) const = 0;
  virtual EventKind inst_kind(size_t i) const = 0;
  virtual std::string inst_name(size_t i) const = 0;
  virtual std::string inst_detail(size_t i) const = 0;
  virtual void apply_inst(size_t i, std::vector<double>& y) = 0;
};

double gated_rate(const Guard& guard, const Expr& rate, const EvalContext& ctx, RunStats& st) {
  if (!guard.is_const_true() && !guard.eval(ctx)) return 0.0;
  const double v = rate.eval(ctx);
  if (v < 0) {
    ++st.clamped_rates;
    return 0.0;
  }
  return v;
}

class StaticView final : public SystemView {
 public:
  explicit StaticView(const Tdsha& t) : t_(t), mode_(t.init_mode) {
    flows_by_mode_.resize(t.modes.size());
    stoch_by_mode_.resize(t.modes.size());
    inst_by_mode_.resize(t.modes.size());
    for (size_t i = 0; i < t.flows.size(); ++i)
      flows_by_mode_[static_cast<size_t>(t.flows[i].mode)].push_back(i);
    for (size_t i = 0; i < t.stoch.size(); ++i)
      stoch_by_mode_[static_cast<size_t>(t.stoch[i].exit_mode)].push_back(i);
    for (size_t i = 0; i < t.inst.size(); ++i)
      inst_by_mode_[static_cast<size_t>(t.inst[i].exit_mode)].push_back(i);
  }

  const std::vector<std::string>& var_names() const override { return t_.vars; }
  int n_store() const override { return t_.n_store; }
  const std::vector<double>& init_valuation() const override { return t_.init; }
  const std::vector<TdshaComponent>& components() const override { return t_.comps; }
  EvalContext context(std::span<const double> y) const override { return t_.context(y); }

  int mode_id() const override { return mode_; }
  bool has_flows() const override { return !flows_by_mode_[static_cast<size_t>(mode_)].empty(); }

  void drift(std::span<const double> y, std::span<double> dy, RunStats& st) const override {
    std::fill(dy.begin(), dy.end(), 0.0);
    const EvalContext ctx = t_.context(y);
    for (const size_t fi : flows_by_mode_[static_cast<size_t>(mode_)]) {
      const ContTransition& f = t_.flows[fi];
      double r = f.rate.eval(ctx);
      if (r < 0) {
        ++st.clamped_rates;
        continue;
      }
      if (r == 0) continue;
      for (size_t i = 0; i < dy.size(); ++i) dy[i] += f.stoich[i] * r;
    }
  }

  size_t stoch_count() const override {
    return stoch_by_mode_[static_cast<size_t>(mode_)].size();
  }
  double stoch_rate(size_t i, const EvalContext& ctx, RunStats& st) const override {
    const StochTransition& s = at_stoch(i);
    return gated_rate(s.guard, s.rate, ctx, st);
  }
  std::string stoch_name(size_t i) const override { return at_stoch(i).name; }
  std::string stoch_detail(size_t i) const override { return at_stoch(i).detail; }
  void apply_stoch(size_t i, std::vector<double>& y) override {
    const StochTransition& s = at_stoch(i);
    y = apply_update(s.reset, y, t_.params);
    mode_ = s.enter_mode;
  }

  size_t inst_count() const override { return inst_by_mode_[static_cast<size_t>(mode_)].size(); }
  bool inst_guard(size_t i, const EvalContext& ctx) const override {
    return at_inst(i).guard.eval(ctx);
  }
  double inst_priority(size_t i, const EvalContext& ctx) const override {
    return at_inst(i).priority.eval(ctx);
  }
  long inst_group(size_t i) const override { return at_inst(i).group; }
  EventKind inst_kind(size_t) const override { return EventKind::Instantaneous; }
  std::string inst_name(size_t i) const override { return at_inst(i).name; }
  std::string inst_detail(size_t) const override { return std::string(); }
  void apply_inst(size_t i, std::vector<double>& y) override {
    const InstTransition& d = at_inst(i);
    y = apply_update(d.reset, y, t_.params);
    mode_ = d.enter_mode;
  }

 private:
  const StochTransition& at_stoch(size_t i) const {
    return t_.stoch[stoch_by_mode_[static_cast<size_t>(mode_)][i]];
  }
  const InstTransition& at_inst(size_t i) const {
    return t_.inst[inst_by_mode_[static_cast<size_t>(mode_)][i]];
  }

  const Tdsha& t_;
  int mode_;
  std::vector<std::vector<size_t>> flows_by_mode_, stoch_by_mode_, inst_by_mode_;
};

class DynamicView final : public SystemView {
 public:
  DynamicView(const ExtendedProgram& ext, const PartitionPolicy& policy)
      : ext_(ext), policy_(policy) {
    for (const ComponentRts& c : ext.components)
      comps_.push_back({c.rts.component, c.rts.states, c.counter_base});
    state_ = make_dynamic_state(ext_, policy_, ext_.init);
    rematerialize();
  }

  const std::vector<std::string>& var_names() const override { return ext_.vars; }
  int n_store() const override { return ext_.n_store; }
  const std::vector<double>& init_valuation() const override { return ext_.init; }
  const std::vector<TdshaComponent>& components() const override { return comps_; }
  EvalContext context(std::span<const double> y) const override { return ext_.context(y); }

  int mode_id() const override { return mode_id_; }
  bool has_flows() const override { return !frag_.flows.empty(); }

  void drift(std::span<const double> y, std::span<double> dy, RunStats& st) const override {
    std::fill(dy.begin(), dy.end(), 0.0);
    const EvalContext ctx = ext_.context(y);
    for (const DynFlow& f : frag_.flows) {
      double r = f.rate.eval(ctx);
      if (r < 0) {
        ++st.clamped_rates;
        continue;
      }
      if (r == 0) continue;
      for (size_t i = 0; i < dy.size(); ++i) dy[i] += f.stoich[i] * r;
    }
  }

  size_t stoch_count() const override { return frag_.stoch.size(); }
  double stoch_rate(size_t i, const EvalContext& ctx, RunStats& st) const override {
    const DynStoch& s = frag_.stoch[i];
    return gated_rate(s.guard, s.rate, ctx, st);
  }
  std::string stoch_name(size_t i) const override { return frag_.stoch[i].name; }
  std::string stoch_detail(size_t i) const override {
    const DynStoch& s = frag_.stoch[i];
    const Rts& rts = ext_.components[static_cast<size_t>(s.component)].rts;
    const RtsEdge& e = rts.edges[static_cast<size_t>(s.edge)];
    return rts.states[static_cast<size_t>(e.exit_state)] + "->" +
           rts.states[static_cast<size_t>(e.enter_state)];
  }
  void apply_stoch(size_t i, std::vector<double>& y) override {
    const DynStoch s = frag_.stoch[i];  // copy: rematerialize invalidates
    y = apply_update(s.reset, y, ext_.base.param_values);
    state_.current_class[static_cast<size_t>(s.component)] = s.enter_class;
    rematerialize();
  }

  size_t inst_count() const override { return frag_.switches.size(); }
  bool inst_guard(size_t i, const EvalContext& ctx) const override {
    return switch_guard_true(state_, frag_.switches[i], ctx);
  }
  double inst_priority(size_t i, const EvalContext& ctx) const override {
    return frag_.switches[i].priority.eval(ctx);
  }
  long inst_group(size_t i) const override {
    const DynTransition& t = frag_.switches[i];
    return static_cast<long>(t.component) * 1000000L + t.edge;
  }
  EventKind inst_kind(size_t) const override { return EventKind::Switch; }
  std::string inst_name(size_t i) const override { return frag_.switches[i].name; }
  std::string inst_detail(size_t i) const override {
    const DynTransition& t = frag_.switches[i];
    return t.to_continuous ? "to=cont" : "to=disc";
  }
  void apply_inst(size_t i, std::vector<double>& y) override {
    const DynTransition t = frag_.switches[i];  // copy: rematerialize invalidates
    apply_switch(state_, t, y);
    rematerialize();
  }

 private:
  void rematerialize() {
    frag_ = materialize(state_);
    std::string sig;
    for (size_t c = 0; c < state_.kappa.size(); ++c) {
      for (const uint8_t b : state_.kappa[c]) sig += b ? '1' : '0';
      sig += ':';
      for (const int s : state_.current_class[c]) {
        sig += std::to_string(s);
        sig += ',';
      }
      sig += '|';
    }
    const auto [it, inserted] = mode_ids_.emplace(sig, static_cast<int>(mode_ids_.size()));
    mode_id_ = it->second;
  }

  const ExtendedProgram& ext_;
  const PartitionPolicy& policy_;
  std::vector<TdshaComponent> comps_;
  DynamicState state_;
  DynFragment frag_;
  std::map<std::string, int> mode_ids_;
  int mode_id_ = 0;
};

class SimEngine {
 public:
  SimEngine(SystemView& sys, const SimConfig& cfg, uint64_t run_index)
      : sys_(sys), cfg_(cfg), rng_(cfg.seed, run_index) {}

  Trajectory run() {
    cfg_.validate();
    grid_ = cfg_.make_grid();
    gi_ = 0;
    y_ = sys_.init_valuation();
    t_ = 0;
    traj_ = Trajectory{};
    traj_.var_names = sys_.var_names();

    while (true) {
      process_instantaneous();
      if (t_ >= cfg_.t_end) break;
      const double u = rng_.exponential(1.0);
      const bool more = sys_.has_flows() ? ode_epoch(u) : discrete_epoch(u);
      if (!more) break;
    }
    // Flush any floating-point leftovers with the final state.
    emit_frozen(kInf, true);
    return std::move(traj_);
  }

 private:
  // --- sampling ---------------------------------------------------------

  void emit_sample(double t, const std::vector<double>& y) {
    traj_.times.push_back(t);
    traj_.samples.push_back(y);
    traj_.modes.push_back(sys_.mode_id());
  }

  void emit_frozen(double upto, bool inclusive) {
    const double tol = 1e-12 * std::max(1.0, std::abs(upto == kInf ? cfg_.t_end : upto));
    while (gi_ < grid_.size() &&
           (inclusive ? grid_[gi_] <= upto + tol : grid_[gi_] < upto)) {
      emit_sample(grid_[gi_], y_);
      ++gi_;
    }
  }

  void emit_dense(const DenseSegment& seg, size_t n_vars, double upto, bool inclusive) {
    const double tol = 1e-12 * std::max(1.0, std::abs(upto));
    std::vector<double> z(seg.y0.size());
    std::vector<double> y(n_vars);
    while (gi_ < grid_.size() &&
           (inclusive ? grid_[gi_] <= upto + tol : grid_[gi_] < upto)) {
      seg.eval(grid_[gi_], z);
      std::copy(z.begin(), z.begin() + static_cast<long>(n_vars), y.begin());
      emit_sample(grid_[gi_], y);
      ++gi_;
    }
  }

  // --- invariant checks -------------------------------------------------

  void check_counters(const char* where) {
    if (!cfg_.runtime_checks) return;
    for (const TdshaComponent& c : sys_.components()) {
      double sum = 0;
      for (size_t s = 0; s < c.states.size(); ++s) {
        const double v = y_[static_cast<size_t>(c.counter_base) + s];
        if (v < -1e-6 || v > 1.0 + 1e-6)
          throw SimError("state counter '" + c.states[s] + "' of component '" + c.name +
                         "' left [0,1]: " + format_double_shortest(v) + " " + where +
                         " at t = " + format_double_shortest(t_));
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-6)
        throw SimError("state counters of component '" + c.name + "' sum to " +
                       format_double_shortest(sum) + " (expected 1) " + where + " at t = " +
                       format_double_shortest(t_));
    }
    for (int i = 0; i < sys_.n_store(); ++i) {
      if (y_[static_cast<size_t>(i)] < cfg_.store_floor)
        throw SimError("store variable '" + sys_.var_names()[static_cast<size_t>(i)] +
                       "' fell to " + format_double_shortest(y_[static_cast<size_t>(i)]) +
                       " (below store_floor " + format_double_shortest(cfg_.store_floor) +
                       ") " + where + " at t = " + format_double_shortest(t_));
    }
  }

  // --- events -----------------------------------------------------------

  void fire_stochastic(const std::vector<double>& rates, double total) {
    const double x = rng_.uniform() * total;
    size_t pick = rates.size() - 1;
    double acc = 0;
    for (size_t i = 0; i < rates.size(); ++i) {
      acc += rates[i];
      if (x <= acc) {
        pick = i;
        break;
      }
    }
    Event ev;
    ev.t = t_;
    ev.kind = EventKind::Stochastic;
    ev.transition = sys_.stoch_name(pick);
    ev.detail = sys_.stoch_detail(pick);
    ev.pre = y_;
    sys_.apply_stoch(pick, y_);
    ev.post = y_;
    traj_.events.push_back(std::move(ev));
    ++traj_.stats.stochastic_events;
    check_counters("after a stochastic reset");
  }

  void process_instantaneous() {
    int fired = 0;
    while (sys_.inst_count() > 0) {
      const EvalContext ctx = sys_.context(y_);
      long best_group = std::numeric_limits<long>::max();
      std::vector<size_t> members;
      for (size_t i = 0; i < sys_.inst_count(); ++i) {
        if (!sys_.inst_guard(i, ctx)) continue;
        const long g = sys_.inst_group(i);
        if (g < best_group) {
          best_group = g;
          members.clear();
        }
        if (g == best_group) members.push_back(i);
      }
      if (members.empty()) return;
      double total = 0;
      std::vector<double> w(members.size());
      for (size_t k = 0; k < members.size(); ++k) {
        double p = sys_.inst_priority(members[k], ctx);
        if (p < -1e-9)
          throw SimError("negative priority on instantaneous transition '" +
                         sys_.inst_name(members[k]) + "' at t = " +
                         format_double_shortest(t_));
        w[k] = std::max(0.0, p);
        total += w[k];
      }
      if (total <= 0)
        throw ZeroTotalPriority("all enabled instantaneous transitions have zero priority at t = " +
                                format_double_shortest(t_));
      const double x = rng_.uniform() * total;
      size_t pick = members.size() - 1;
      double acc = 0;
      for (size_t k = 0; k < members.size(); ++k) {
        acc += w[k];
        if (x <= acc) {
          pick = k;
          break;
        }
      }
      const size_t idx = members[pick];
      Event ev;
      ev.t = t_;
      ev.kind = sys_.inst_kind(idx);
      ev.transition = sys_.inst_name(idx);
      ev.detail = sys_.inst_detail(idx);
      ev.pre = y_;
      sys_.apply_inst(idx, y_);
      ev.post = y_;
      if (ev.kind == EventKind::Switch)
        ++traj_.stats.switch_events;
      else
        ++traj_.stats.instantaneous_events;
      traj_.events.push_back(std::move(ev));
      check_counters("after an instantaneous reset");
      if (++fired > cfg_.max_inst_events)
        throw SimError("instantaneous event cascade exceeded " +
                       std::to_string(cfg_.max_inst_events) + " events at t = " +
                       format_double_shortest(t_));
    }
  }

  // --- epochs -----------------------------------------------------------

  // No flows in the current mode: variables are frozen, so the jump time
  // is exact.
  bool discrete_epoch(double u) {
    const EvalContext ctx = sys_.context(y_);
    std::vector<double> rates(sys_.stoch_count());
    double total = 0;
    for (size_t i = 0; i < rates.size(); ++i) {
      rates[i] = sys_.stoch_rate(i, ctx, traj_.stats);
      total += rates[i];
    }
    if (total <= 0) {
      t_ = cfg_.t_end;
      emit_frozen(t_, true);
      return false;
    }
    const double t_jump = t_ + u / total;
    if (t_jump >= cfg_.t_end) {
      t_ = cfg_.t_end;
      emit_frozen(t_, true);
      return false;
    }
    emit_frozen(t_jump, false);
    t_ = t_jump;
    fire_stochastic(rates, total);
    return true;
  }

  // Earliest time in the segment at which `pred` holds, localized to
  // event_time_tol. Returns +inf when the predicate holds nowhere on the
  // sampled subdivision. `monotone` skips the interior scan.
  template <typename Pred>
  double localize_guard_crossing(const DenseSegment& seg, const Pred& pred, bool monotone) {
    constexpr int kScan = 8;
    std::vector<double> z(seg.y0.size());
    auto holds = [&](double t) {
      seg.eval(t, z);
      return pred(std::span<const double>(z));
    };
    double lo = seg.t0;
    double hi = kInf;
    if (monotone) {
      if (!holds(seg.t1)) return kInf;
      hi = seg.t1;
    } else {
      double prev = seg.t0;
      for (int k = 1; k <= kScan; ++k) {
        const double t = k == kScan ? seg.t1 : seg.t0 + (seg.t1 - seg.t0) * k / kScan;
        if (holds(t)) {
          lo = prev;
          hi = t;
          break;
        }
        prev = t;
      }
      if (hi == kInf) return kInf;
    }
    int iters = 0;
    while (hi - lo > cfg_.event_time_tol) {
      if (++iters > 200)
        throw SimError("guard localization did not reach event_time_tol within the iteration cap");
      const double mid = 0.5 * (lo + hi);
      if (holds(mid))
        hi = mid;
      else
        lo = mid;
    }
    return hi;
  }

  bool ode_epoch(double u) {
    const size_t n = y_.size();
    if (!stepper_ || stepper_dim_ != n + 1) {
      OdeOptions opt;
      opt.rel_tol = cfg_.ode_rel_tol;
      opt.abs_tol = cfg_.ode_abs_tol;
      opt.max_step = cfg_.max_step;
      opt.min_step = 1e-13 * std::max(1.0, cfg_.t_end);
      stepper_.emplace(
          [this, n](double, std::span<const double> z, std::span<double> dz) {
            const std::span<const double> y = z.first(n);
            sys_.drift(y, dz.first(n), traj_.stats);
            const EvalContext ctx = sys_.context(y);
            double total = 0;
            for (size_t i = 0; i < sys_.stoch_count(); ++i)
              total += sys_.stoch_rate(i, ctx, traj_.stats);
            dz[n] = total;
          },
          opt, n + 1);
      stepper_dim_ = n + 1;
    }

    std::vector<double> z(n + 1);
    std::copy(y_.begin(), y_.end(), z.begin());
    z[n] = 0.0;  // cumulative hazard rides along as an extra component
    std::vector<double> f(n + 1);
    stepper_->derivative(t_, z, f);

    const double floor = -10.0 * cfg_.ode_abs_tol;
    double h = std::min(h_hint_, cfg_.max_step);

    while (true) {
      const double remaining = cfg_.t_end - t_;
      if (remaining <= 1e-15 * std::max(1.0, cfg_.t_end)) {
        t_ = cfg_.t_end;
        emit_frozen(t_, true);
        return false;
      }
      h = std::min(h, remaining);
      StepOutcome out = stepper_->step(t_, z, f, h);
      traj_.stats.ode_rejected = stepper_->steps_rejected();
      if (!out.accepted) {
        h = out.h_next;
        continue;
      }
      // Negative-population rail on store variables. A jump can legally
      // leave a variable a little below zero (fractional hybrid states);
      // only flow that keeps driving it further down is rejected.
      bool below_floor = false;
      for (int i = 0; i < sys_.n_store(); ++i)
        if (out.y_new[static_cast<size_t>(i)] < floor &&
            out.y_new[static_cast<size_t>(i)] < z[static_cast<size_t>(i)])
          below_floor = true;
      if (below_floor) {
        h = out.h_taken * 0.5;
        if (h < stepper_->options().min_step)
          throw SimError("store variable persistently below zero near t = " +
                         format_double_shortest(t_));
        continue;
      }
      traj_.stats.ode_steps = stepper_->steps_taken();

      DenseSegment seg;
      seg.t0 = t_;
      seg.t1 = t_ + out.h_taken;
      seg.y0 = z;
      seg.y1 = out.y_new;
      seg.f0 = f;
      seg.f1 = out.f_new;

      // Hazard crossing H(t) = u (monotone).
      const double t_haz = localize_guard_crossing(
          seg, [&](std::span<const double> zz) { return zz[n] >= u; }, true);

      // Earliest instantaneous/switch guard crossing.
      double t_grd = kInf;
      size_t guard_count = sys_.inst_count();
      if (guard_count > 0) {
        for (size_t i = 0; i < guard_count; ++i) {
          const double ti = localize_guard_crossing(
              seg,
              [&](std::span<const double> zz) {
                return sys_.inst_guard(i, sys_.context(zz.first(n)));
              },
              false);
          t_grd = std::min(t_grd, ti);
        }
      }

      // Tie rule: a guard crossing wins over a stochastic jump when both
      // localize within event_time_tol of each other.
      const bool guard_wins =
          t_grd < kInf && (t_haz == kInf || t_grd <= t_haz + cfg_.event_time_tol);
      if (guard_wins) {
        emit_dense(seg, n, t_grd, false);
        seg.eval(t_grd, z);
        std::copy(z.begin(), z.begin() + static_cast<long>(n), y_.begin());
        t_ = t_grd;
        h_hint_ = out.h_next;
        return true;  // the main loop applies the enabled transition(s)
      }
      if (t_haz < kInf) {
        emit_dense(seg, n, t_haz, false);
        seg.eval(t_haz, z);
        std::copy(z.begin(), z.begin() + static_cast<long>(n), y_.begin());
        t_ = t_haz;
        h_hint_ = out.h_next;
        const EvalContext ctx = sys_.context(y_);
        std::vector<double> rates(sys_.stoch_count());
        double total = 0;
        for (size_t i = 0; i < rates.size(); ++i) {
          rates[i] = sys_.stoch_rate(i, ctx, traj_.stats);
          total += rates[i];
        }
        // A rate whose guard flipped false exactly at the crossing can
        // leave no mass; the epoch then just restarts with a fresh clock.
        if (total > 0) fire_stochastic(rates, total);
        return true;
      }

      emit_dense(seg, n, seg.t1, true);
      t_ = seg.t1;
      z = out.y_new;
      f = out.f_new;
      h = out.h_next;
      h_hint_ = out.h_next;
      std::copy(z.begin(), z.begin() + static_cast<long>(n), y_.begin());
    }
  }

  SystemView& sys_;
  const SimConfig& cfg_;
  RngStream rng_;
  Trajectory traj_;
  std::vector<double> y_;
  double t_ = 0;
  std::vector<double> grid_;
  size_t gi_ = 0;
  std::optional<DormandPrince45> stepper_;
  size_t stepper_dim_ = 0;
  double h_hint_ = 0.01;
};

// --- ensembles ----------------------------------------------------------

template <typename MakeView>
EnsembleResult ensemble_impl(const MakeView& make_view, const SimConfig& cfg) {
  cfg.validate();
  const int runs = cfg.run_count;
  std::vector<std::vector<std::vector<double>>> samples(static_cast<size_t>(runs));
  std::vector<RunStats> stats(static_cast<size_t>(runs));
  std::vector<std::map<std::string, uint64_t>> counts(static_cast<size_t>(runs));
  std::vector<std::exception_ptr> errors(static_cast<size_t>(runs));
  std::vector<std::string> var_names;
  std::vector<double> times;

  auto worker = [&](int r) {
    try {
      auto view = make_view();
      SimEngine engine(*view, cfg, static_cast<uint64_t>(r));
      Trajectory tr = engine.run();
      if (r == 0) {
        var_names = tr.var_names;
        times = tr.times;
      }
      samples[static_cast<size_t>(r)] = std::move(tr.samples);
      stats[static_cast<size_t>(r)] = tr.stats;
      for (const Event& ev : tr.events) ++counts[static_cast<size_t>(r)][ev.transition];
    } catch (...) {
      errors[static_cast<size_t>(r)] = std::current_exception();
    }
  };

  const int threads = std::max(1, cfg.threads);
  if (threads == 1) {
    for (int r = 0; r < runs; ++r) worker(r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < std::min(threads, runs); ++w) {
      pool.emplace_back([&] {
        while (true) {
          const int r = next.fetch_add(1);
          if (r >= runs) return;
          worker(r);
        }
      });
    }
    for (std::thread& th : pool) th.join();
  }

  for (int r = 0; r < runs; ++r) {
    if (!errors[static_cast<size_t>(r)]) continue;
    try {
      std::rethrow_exception(errors[static_cast<size_t>(r)]);
    } catch (const std::exception& e) {
      throw SimError("ensemble run " + std::to_string(r) + " failed: " + e.what());
    }
  }

  EnsembleResult res;
  res.var_names = var_names;
  res.times = times;
  res.runs = static_cast<uint64_t>(runs);
  const size_t T = times.size();
  const size_t V = var_names.size();
  res.mean.assign(T, std::vector<double>(V, 0.0));
  res.variance.assign(T, std::vector<double>(V, 0.0));
  // Welford, merged in run-index order so results never depend on thread
  // scheduling.
  for (int r = 0; r < runs; ++r) {
    const auto& rs = samples[static_cast<size_t>(r)];
    for (size_t t = 0; t < T; ++t)
      for (size_t v = 0; v < V; ++v) {
        const double x = rs[t][v];
        const double d = x - res.mean[t][v];
        res.mean[t][v] += d / static_cast<double>(r + 1);
        res.variance[t][v] += d * (x - res.mean[t][v]);
      }
  }
  if (runs > 1)
    for (size_t t = 0; t < T; ++t)
      for (size_t v = 0; v < V; ++v) res.variance[t][v] /= static_cast<double>(runs - 1);
  else
    for (size_t t = 0; t < T; ++t)
      for (size_t v = 0; v < V; ++v) res.variance[t][v] = 0.0;

  for (int r = 0; r < runs; ++r) {
    res.stochastic_events += stats[static_cast<size_t>(r)].stochastic_events;
    res.instantaneous_events += stats[static_cast<size_t>(r)].instantaneous_events;
    res.switch_events += stats[static_cast<size_t>(r)].switch_events;
    res.clamped_rates += stats[static_cast<size_t>(r)].clamped_rates;
    for (const auto& [name, c] : counts[static_cast<size_t>(r)])
      res.events_by_transition[name] += c;
  }
  return res;
}

}  // namespace

Trajectory simulate(const Tdsha& tdsha, const SimConfig& cfg, uint64_t run_index) {
  StaticView view(tdsha);
  SimEngine engine(view, cfg, run_index);
  return engine.run();
}

Trajectory simulate_dynamic(const ExtendedProgram& ext, const PartitionPolicy& policy,
                            const SimConfig& cfg, uint64_t run_index) {
  DynamicView view(ext, policy);
  SimEngine engine(view, cfg, run_index);
  return engine.run();
}

EnsembleResult simulate_ensemble(const Tdsha& tdsha, const SimConfig& cfg) {
  return ensemble_impl([&tdsha] { return std::make_unique<StaticView>(tdsha); }, cfg);
}

EnsembleResult simulate_ensemble_dynamic(const ExtendedProgram& ext,
                                         const PartitionPolicy& policy, const SimConfig& cfg) {
  return ensemble_impl(
      [&ext, &policy] { return std::make_unique<DynamicView>(ext, policy); }, cfg);
}

}  // namespace sccp
