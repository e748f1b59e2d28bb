#include "sccp/ode.hpp"

#include <algorithm>
#include <cmath>

namespace sccp {

void DenseSegment::eval(double t, std::span<double> out) const {
  const double h = t1 - t0;
  if (h == 0) {
    std::copy(y0.begin(), y0.end(), out.begin());
    return;
  }
  const double s = (t - t0) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  for (size_t i = 0; i < y0.size(); ++i)
    out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                 e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                 e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

}  // namespace

DormandPrince45::DormandPrince45(OdeRhs rhs, OdeOptions options, size_t dim)
    : rhs_(std::move(rhs)), options_(options), dim_(dim) {
  k_.assign(7, std::vector<double>(dim_));
  y_stage_.assign(dim_, 0.0);
}

StepOutcome DormandPrince45::step(double t, std::span<const double> y,
                                  std::span<const double> f0, double h) {
  StepOutcome out;
  std::copy(f0.begin(), f0.end(), k_[0].begin());

  auto stage = [&](double c, std::initializer_list<std::pair<double, int>> terms, int ks) {
    for (size_t i = 0; i < dim_; ++i) {
      double acc = 0;
      for (const auto& [coef, idx] : terms) acc += coef * k_[static_cast<size_t>(idx)][i];
      y_stage_[i] = y[i] + h * acc;
    }
    rhs_(t + c * h, y_stage_, k_[static_cast<size_t>(ks)]);
  };

  stage(c2, {{a21, 0}}, 1);
  stage(c3, {{a31, 0}, {a32, 1}}, 2);
  stage(c4, {{a41, 0}, {a42, 1}, {a43, 2}}, 3);
  stage(c5, {{a51, 0}, {a52, 1}, {a53, 2}, {a54, 3}}, 4);
  stage(1.0, {{a61, 0}, {a62, 1}, {a63, 2}, {a64, 3}, {a65, 4}}, 5);

  out.y_new.resize(dim_);
  for (size_t i = 0; i < dim_; ++i)
    out.y_new[i] =
        y[i] + h * (b1 * k_[0][i] + b3 * k_[2][i] + b4 * k_[3][i] + b5 * k_[4][i] +
                    b6 * k_[5][i]);
  rhs_(t + h, out.y_new, k_[6]);  // FSAL stage

  double err_norm = 0;
  for (size_t i = 0; i < dim_; ++i) {
    const double err = h * (e1 * k_[0][i] + e3 * k_[2][i] + e4 * k_[3][i] + e5 * k_[4][i] +
                            e6 * k_[5][i] + e7 * k_[6][i]);
    const double scale =
        options_.abs_tol + options_.rel_tol * std::max(std::abs(y[i]), std::abs(out.y_new[i]));
    const double ratio = err / scale;
    err_norm += ratio * ratio;
  }
  err_norm = std::sqrt(err_norm / static_cast<double>(dim_));

  if (!std::isfinite(err_norm)) {
    ++rejected_;
    out.accepted = false;
    out.h_next = h * 0.1;
    if (out.h_next < options_.min_step)
      throw SimError("integration failure: non-finite state at t = " + std::to_string(t));
    return out;
  }

  const double order_exp = 1.0 / 5.0;
  double factor = err_norm > 0 ? options_.safety * std::pow(err_norm, -order_exp) : 5.0;
  factor = std::clamp(factor, 0.2, 5.0);

  if (err_norm <= 1.0) {
    ++accepted_;
    out.accepted = true;
    out.h_taken = h;
    out.h_next = std::min(h * factor, options_.max_step);
    out.f_new = k_[6];
  } else {
    ++rejected_;
    out.accepted = false;
    out.h_next = h * factor;
    if (out.h_next < options_.min_step)
      throw SimError("integration step size underflow at t = " + std::to_string(t));
  }
  return out;
}

}  // namespace sccp
