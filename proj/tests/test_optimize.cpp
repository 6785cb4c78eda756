#include <doctest.h>

#include "qlt/optimize.hpp"

using namespace qlt;
using namespace qlt::opt;

TEST_CASE("numerical gradient on simple losses") {
  LossFn quadratic = [](const RVec &t) { return t.squaredNorm(); };
  RVec theta(3);
  theta << 0.5, -1.5, 2.0;
  const RVec g = numerical_gradient(quadratic, theta);
  CHECK((g - 2.0 * theta).cwiseAbs().maxCoeff() < 1e-8);

  LossFn constant = [](const RVec &) { return 3.5; };
  CHECK(numerical_gradient(constant, theta).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("adam: scalar quadratic") {
  LossFn loss = [](const RVec &t) { return (t(0) - 3.0) * (t(0) - 3.0); };
  GradFn grad = [](const RVec &t) {
    RVec g(1);
    g(0) = 2.0 * (t(0) - 3.0);
    return g;
  };
  AdamConfig config;
  config.step_size = 1e-2;
  const auto result = adam_minimize(loss, grad, RVec::Zero(1), config);
  CHECK(std::abs(result.theta(0) - 3.0) < 1e-4);
}

TEST_CASE("adam: rosenbrock reaches 1e-5 within 2e4 iterations") {
  LossFn loss = [](const RVec &t) {
    const double a = 1.0 - t(0);
    const double b = t(1) - t(0) * t(0);
    return a * a + 100.0 * b * b;
  };
  GradFn grad = [](const RVec &t) {
    RVec g(2);
    const double b = t(1) - t(0) * t(0);
    g(0) = -2.0 * (1.0 - t(0)) - 400.0 * t(0) * b;
    g(1) = 200.0 * b;
    return g;
  };
  RVec theta0(2);
  theta0 << -1.2, 1.0;
  AdamConfig config;
  config.step_size = 2e-2;
  config.max_iters = 20000;
  config.patience = 2000;
  config.step_decay = 0.5;
  config.min_step = 1e-10;
  config.grad_tolerance = 1e-12;
  const auto result = adam_minimize(loss, grad, theta0, config);
  CHECK(loss(result.theta) < 1e-5);
}

TEST_CASE("adam: bitwise determinism and monotone running minimum") {
  LossFn loss = [](const RVec &t) {
    return (t(0) - 1.0) * (t(0) - 1.0) + 0.5 * t(1) * t(1);
  };
  GradFn grad = [](const RVec &t) {
    RVec g(2);
    g(0) = 2.0 * (t(0) - 1.0);
    g(1) = t(1);
    return g;
  };
  RVec theta0(2);
  theta0 << -2.0, 4.0;
  const auto a = adam_minimize(loss, grad, theta0);
  const auto b = adam_minimize(loss, grad, theta0);
  CHECK(a.theta(0) == b.theta(0));
  CHECK(a.theta(1) == b.theta(1));
  CHECK(a.trace.loss_history == b.trace.loss_history);

  double running = std::numeric_limits<double>::infinity();
  for (double v : a.trace.loss_history) {
    const double next = std::min(running, v);
    CHECK(next <= running);
    running = next;
  }
  CHECK(loss(a.theta) == a.trace.best_loss());
}

TEST_CASE("adam: scale sanity for quadratic losses") {
  auto make = [](double c) {
    LossFn loss = [c](const RVec &t) {
      return c * ((t(0) - 2.0) * (t(0) - 2.0) + (t(1) + 1.0) * (t(1) + 1.0));
    };
    GradFn grad = [c](const RVec &t) {
      RVec g(2);
      g(0) = 2.0 * c * (t(0) - 2.0);
      g(1) = 2.0 * c * (t(1) + 1.0);
      return g;
    };
    return std::make_pair(loss, grad);
  };
  AdamConfig config;
  config.step_size = 1e-2;
  config.max_iters = 40000;
  config.step_decay = 0.5;
  config.min_step = 1e-10;
  config.patience = 300;
  const auto [loss1, grad1] = make(1.0);
  const auto [loss5, grad5] = make(5.0);
  const auto r1 = adam_minimize(loss1, grad1, RVec::Zero(2), config);
  const auto r5 = adam_minimize(loss5, grad5, RVec::Zero(2), config);
  CHECK((r1.theta - r5.theta).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("adam: divergence is reported") {
  // Gradient pointing away from the minimum blows the iterate up.
  LossFn loss = [](const RVec &t) { return std::exp(t(0)); };
  GradFn grad = [](const RVec &t) {
    RVec g(1);
    g(0) = std::exp(t(0)); // drives theta down; use +inf loss instead
    return g;
  };
  LossFn bad_loss = [](const RVec &t) {
    return t(0) < -100.0 ? std::numeric_limits<double>::quiet_NaN()
                         : std::exp(t(0));
  };
  AdamConfig config;
  config.step_size = 10.0;
  config.max_iters = 10000;
  config.patience = 10000;
  const auto result = adam_minimize(bad_loss, grad, RVec::Zero(1), config);
  CHECK(result.trace.reason == TerminalReason::Diverged);
}

TEST_CASE("gradient check utility") {
  LossFn loss = [](const RVec &t) {
    return t(0) * t(0) + std::sin(t(1)) + t(0) * t(1);
  };
  GradFn grad = [](const RVec &t) {
    RVec g(2);
    g(0) = 2.0 * t(0) + t(1);
    g(1) = std::cos(t(1)) + t(0);
    return g;
  };
  RVec theta(2);
  theta << 0.3, -0.8;
  CHECK(gradient_check(loss, grad, theta) < 1e-5);
}
