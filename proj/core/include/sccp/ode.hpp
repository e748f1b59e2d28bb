#pragma once

#include <functional>
#include <span>
#include <vector>

#include "sccp/errors.hpp"

namespace sccp {

// Cubic Hermite interpolant over one accepted step; enough resolution for
// bisection-based event localization.
struct DenseSegment {
  double t0 = 0, t1 = 0;
  std::vector<double> y0, y1, f0, f1;

  void eval(double t, std::span<double> out) const;
};

struct OdeOptions {
  double rel_tol = 1e-6;
  double abs_tol = 1e-9;
  double max_step = 0.5;
  double min_step = 1e-14;  // relative to the time scale of the call site
  double safety = 0.9;
};

// One attempted Dormand-Prince 4(5) step with error control.
struct StepOutcome {
  bool accepted = false;
  double h_taken = 0;   // step actually advanced (accepted only)
  double h_next = 0;    // suggested next step size
  std::vector<double> y_new;
  std::vector<double> f_new;  // FSAL derivative at t + h_taken
};

using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dy)>;

class DormandPrince45 {
 public:
  DormandPrince45(OdeRhs rhs, OdeOptions options, size_t dim);

  // f0 must hold rhs(t, y). Throws SimError when the controller drives the
  // step below min_step.
  StepOutcome step(double t, std::span<const double> y, std::span<const double> f0, double h);

  void derivative(double t, std::span<const double> y, std::span<double> dy) { rhs_(t, y, dy); }

  const OdeOptions& options() const { return options_; }
  uint64_t steps_taken() const { return accepted_; }
  uint64_t steps_rejected() const { return rejected_; }

 private:
  OdeRhs rhs_;
  OdeOptions options_;
  size_t dim_;
  uint64_t accepted_ = 0;
  uint64_t rejected_ = 0;
  std::vector<std::vector<double>> k_;  // stage derivatives
  std::vector<double> y_stage_;
};

}  // namespace sccp
