#ifndef QLT_OPTIMIZE_HPP
#define QLT_OPTIMIZE_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qlt/core.hpp"

namespace qlt::opt {

using LossFn = std::function<double(const RVec &)>;
using GradFn = std::function<RVec(const RVec &)>;

struct AdamConfig {
  double step_size = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int max_iters = 20000;
  double grad_tolerance = 1e-7;
  int patience = 500;            // iterations without relative improvement
  double improvement_tol = 1e-9; // relative loss improvement threshold

  // Plateau schedule: when patience is exhausted, multiply the step size by
  // step_decay and continue, until it falls below min_step (then stop).
  // step_decay = 1 disables the schedule (plain stall termination).
  double step_decay = 1.0;
  double min_step = 0.0;

  void validate() const;
};

enum class TerminalReason { Converged, MaxIters, Stalled, Diverged };

std::string to_string(TerminalReason reason);

struct FitTrace {
  std::vector<double> loss_history;
  std::vector<double> grad_norm_history;
  int iterations = 0;
  TerminalReason reason = TerminalReason::MaxIters;

  double best_loss() const;
  std::string to_csv() const; // iteration, loss, grad_norm
};

struct AdamResult {
  RVec theta;
  FitTrace trace;
};

// Standard Adam with bias-corrected moments. Deterministic given inputs;
// the seed parameter is kept for interface stability and ignored. Returns
// the best-seen point.
AdamResult adam_minimize(const LossFn &loss, const GradFn &grad,
                         const RVec &theta0, const AdamConfig &config = {},
                         std::uint64_t rng_seed = 0);

// Central-difference gradient with per-coordinate step 1e-6 * max(1, |x_k|).
// Serves as the oracle all analytic gradients are verified against.
RVec numerical_gradient(const LossFn &loss, const RVec &theta);

// Max relative deviation between an analytic gradient and the
// central-difference oracle at theta.
double gradient_check(const LossFn &loss, const GradFn &grad, const RVec &theta);

} // namespace qlt::opt

#endif
