#include "qlt/optimize.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace qlt::opt {

void AdamConfig::validate() const {
  if (step_size <= 0.0)
    throw Error("AdamConfig: step_size must be positive");
  if (beta1 <= 0.0 || beta1 >= 1.0 || beta2 <= 0.0 || beta2 >= 1.0)
    throw Error("AdamConfig: beta1, beta2 must lie in (0, 1)");
  if (max_iters < 1)
    throw Error("AdamConfig: max_iters must be >= 1");
  if (step_decay <= 0.0 || step_decay > 1.0)
    throw Error("AdamConfig: step_decay must lie in (0, 1]");
}

std::string to_string(TerminalReason reason) {
  switch (reason) {
  case TerminalReason::Converged:
    return "converged";
  case TerminalReason::MaxIters:
    return "max_iters";
  case TerminalReason::Stalled:
    return "stalled";
  case TerminalReason::Diverged:
    return "diverged";
  }
  return "unknown";
}

double FitTrace::best_loss() const {
  double best = std::numeric_limits<double>::infinity();
  for (double v : loss_history)
    best = std::min(best, v);
  return best;
}

std::string FitTrace::to_csv() const {
  std::ostringstream out;
  out << "iteration,loss,grad_norm\n";
  out.precision(17);
  for (size_t k = 0; k < loss_history.size(); ++k) {
    out << k << "," << loss_history[k] << ",";
    if (k < grad_norm_history.size())
      out << grad_norm_history[k];
    out << "\n";
  }
  return out.str();
}

AdamResult adam_minimize(const LossFn &loss, const GradFn &grad,
                         const RVec &theta0, const AdamConfig &config,
                         std::uint64_t /*rng_seed*/) {
  config.validate();
  if (!theta0.allFinite())
    throw NumericalError("adam_minimize: non-finite initial point");

  const Eigen::Index n = theta0.size();
  RVec theta = theta0;
  RVec m = RVec::Zero(n);
  RVec v = RVec::Zero(n);

  FitTrace trace;
  trace.loss_history.reserve(config.max_iters + 1);
  trace.grad_norm_history.reserve(config.max_iters + 1);

  double step = config.step_size;
  double best_loss = loss(theta);
  RVec best_theta = theta;
  if (!std::isfinite(best_loss))
    throw NumericalError("adam_minimize: non-finite loss at initial point");
  trace.loss_history.push_back(best_loss);

  int since_improvement = 0;
  trace.reason = TerminalReason::MaxIters;

  for (int t = 1; t <= config.max_iters; ++t) {
    RVec g = grad(theta);
    if (!g.allFinite()) {
      trace.reason = TerminalReason::Diverged;
      break;
    }
    const double gnorm = g.cwiseAbs().maxCoeff();
    trace.grad_norm_history.push_back(gnorm);
    if (gnorm < config.grad_tolerance) {
      trace.reason = TerminalReason::Converged;
      trace.iterations = t - 1;
      break;
    }

    m = config.beta1 * m + (1.0 - config.beta1) * g;
    v = config.beta2 * v + (1.0 - config.beta2) * g.cwiseProduct(g);
    const double m_corr = 1.0 - std::pow(config.beta1, t);
    const double v_corr = 1.0 - std::pow(config.beta2, t);
    for (Eigen::Index k = 0; k < n; ++k)
      theta(k) -= step * (m(k) / m_corr) /
                  (std::sqrt(v(k) / v_corr) + config.epsilon);

    const double current = loss(theta);
    if (!std::isfinite(current)) {
      trace.reason = TerminalReason::Diverged;
      trace.iterations = t;
      break;
    }
    trace.loss_history.push_back(current);
    trace.iterations = t;

    const double rel_gain = (best_loss - current) /
                            std::max(std::abs(best_loss), 1e-300);
    if (current < best_loss) {
      best_loss = current;
      best_theta = theta;
    }
    if (rel_gain > config.improvement_tol) {
      since_improvement = 0;
    } else if (++since_improvement >= config.patience) {
      if (config.step_decay < 1.0 && step * config.step_decay >= config.min_step) {
        step *= config.step_decay;
        since_improvement = 0;
      } else {
        trace.reason = TerminalReason::Stalled;
        break;
      }
    }
  }

  return AdamResult{best_theta, std::move(trace)};
}

RVec numerical_gradient(const LossFn &loss, const RVec &theta) {
  RVec g(theta.size());
  RVec probe = theta;
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    const double h = 1e-6 * std::max(1.0, std::abs(theta(k)));
    probe(k) = theta(k) + h;
    const double up = loss(probe);
    probe(k) = theta(k) - h;
    const double down = loss(probe);
    probe(k) = theta(k);
    if (!std::isfinite(up) || !std::isfinite(down))
      throw NumericalError("numerical_gradient: non-finite loss in stencil");
    g(k) = (up - down) / (2.0 * h);
  }
  return g;
}

double gradient_check(const LossFn &loss, const GradFn &grad,
                      const RVec &theta) {
  const RVec analytic = grad(theta);
  const RVec numeric = numerical_gradient(loss, theta);
  const double scale = std::max(numeric.norm(), 1e-12);
  return (analytic - numeric).norm() / scale;
}

} // namespace qlt::opt
