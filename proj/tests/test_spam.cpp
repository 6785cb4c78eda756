#include <doctest.h>

#include "qlt/metrics.hpp"
#include "qlt/probe.hpp"
#include "qlt/rng.hpp"
#include "qlt/spam.hpp"
#include "qlt/synth.hpp"
#include "test_util.hpp"

using namespace qlt;
using namespace qlt::spam;
using qlt_test::max_abs_diff;
using qlt_test::random_complex;

TEST_CASE("rho_param: identity, rank-1, random") {
  const DensityMatrix uniform = rho_param(CMat::Identity(4, 4));
  CHECK(max_abs_diff(uniform.mat, CMat::Identity(4, 4) / 4.0) < 1e-15);

  CMat rank1 = CMat::Zero(3, 3);
  rank1(0, 0) = 1.0;
  rank1(1, 0) = Cplx(0.5, 0.5);
  const DensityMatrix pure = rho_param(rank1);
  HermitianEig eig = hermitian_eig(pure.mat);
  int positive = 0;
  for (Eigen::Index k = 0; k < eig.values.size(); ++k)
    if (eig.values(k) > 1e-12)
      ++positive;
  CHECK(positive == 1);

  Rng rng(3);
  const DensityMatrix rho = rho_param(random_complex(4, 4, rng));
  CHECK(std::abs(rho.mat.trace().real() - 1.0) < 1e-12);
  CHECK(min_hermitian_eigenvalue(rho.mat) >= -1e-14);

  CHECK_THROWS_AS(rho_param(CMat::Zero(2, 2)), NumericalError);
}

TEST_CASE("povm_param: projector stacking, completeness, positivity") {
  const int d = 4;
  CMat theta = CMat::Zero(d * d, d);
  for (int l = 0; l < d; ++l)
    theta(l * d + l, l) = 1.0;
  const Povm ideal = povm_param(theta);
  for (int l = 0; l < d; ++l) {
    CMat proj = CMat::Zero(d, d);
    proj(l, l) = 1.0;
    CHECK(max_abs_diff(ideal.elements[l], proj) < 1e-12);
  }

  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Povm povm = povm_param(random_complex(d * d, d, rng));
    CMat sum = CMat::Zero(d, d);
    for (const auto &m : povm.elements) {
      CHECK(min_hermitian_eigenvalue(m) >= -1e-12);
      sum += m;
    }
    CHECK(max_abs_diff(sum, CMat::Identity(d, d)) < 1e-10);
  }

  CHECK_THROWS_AS(povm_param(CMat::Zero(4, 2)), NumericalError);
}

TEST_CASE("parameter packing round trip") {
  Rng rng(9);
  const CMat m = random_complex(3, 5, rng);
  CHECK(max_abs_diff(unpack_complex(pack_complex(m), 3, 5), m) == 0.0);
}

TEST_CASE("spam objective: analytic gradient matches central differences") {
  const auto configs = probe::enumerate_spam_configs(1);
  Rng rng(21);
  // Arbitrary noisy frequencies keep the residuals generic.
  SpamData data;
  data.n_qubits = 1;
  data.configs = configs;
  for (size_t i = 0; i < configs.size(); ++i) {
    const double p = 0.2 + 0.6 * rng.uniform01();
    data.freqs.push_back({p, 1.0 - p});
  }
  SpamObjective objective(data);

  opt::LossFn loss = [&](const RVec &t) { return objective.loss(t); };
  opt::GradFn grad = [&](const RVec &t) { return objective.gradient(t); };
  for (int trial = 0; trial < 5; ++trial) {
    const CMat t1 = CMat::Identity(2, 2) + 0.3 * random_complex(2, 2, rng);
    const CMat t2 = random_complex(4, 2, rng);
    const RVec theta = objective.pack(t1, t2);
    CHECK(opt::gradient_check(loss, grad, theta) < 1e-5);
  }
}

TEST_CASE("fit_spam: exact ideal data recovers ideal SPAM") {
  const DensityMatrix rho_true = ideal_state(1);
  const Povm povm_true = ideal_povm(1);
  const auto configs = probe::enumerate_spam_configs(1);
  const SpamData data = spam_data_exact(rho_true, povm_true, configs);

  SpamFitConfig config;
  config.seed = 1234;
  const SpamEstimate est = fit_spam(data, config);

  CHECK(est.loss <= est.init_loss);
  CHECK(metrics::state_fidelity(est.rho0, rho_true) >= 1.0 - 1e-6);
  CHECK(metrics::povm_fidelity(est.povm, povm_true) >= 1.0 - 1e-6);
}

TEST_CASE("fit_spam: estimates satisfy invariants on noisy data") {
  const auto configs = probe::enumerate_spam_configs(1);
  const auto [rho_true, povm_true] = synth::perturbed_spam(1, 2024);
  const auto dataset =
      probe::generate_spam_dataset(rho_true, povm_true, configs, 200, 77);

  SpamFitConfig config;
  config.seed = 99;
  config.restarts = 1;
  config.adam.max_iters = 3000;
  const SpamEstimate est = fit_spam(dataset, config);

  // Construction enforces the component invariants even on poor data.
  CHECK(std::abs(est.rho0.mat.trace().real() - 1.0) < 1e-10);
  CHECK(min_hermitian_eigenvalue(est.rho0.mat) >= -1e-10);
  CMat sum = CMat::Zero(2, 2);
  for (const auto &m : est.povm.elements)
    sum += m;
  CHECK(max_abs_diff(sum, CMat::Identity(2, 2)) < 1e-10);
  CHECK(est.loss <= est.init_loss);
}

TEST_CASE("fit_spam: dataset kind and emptiness are validated") {
  probe::PauliDataset ds;
  ds.n_qubits = 1;
  ds.shots = 10;
  ds.kind = probe::DatasetKind::Process;
  CHECK_THROWS_AS(spam_data_from(ds), Error);
  ds.kind = probe::DatasetKind::Spam;
  CHECK_THROWS_AS(spam_data_from(ds), Error); // empty records
}

TEST_CASE("gauge awareness: equal probability tables mark equivalence") {
  const auto configs = probe::enumerate_spam_configs(1);
  const SpamData data = spam_data_exact(ideal_state(1), ideal_povm(1), configs);
  SpamFitConfig config;
  config.seed = 7;
  config.restarts = 2;
  const SpamEstimate a = fit_spam(data, config);
  config.seed = 8;
  const SpamEstimate b = fit_spam(data, config);

  const auto table_a = predicted_spam_table(a, configs);
  const auto table_b = predicted_spam_table(b, configs);
  double max_dev = 0.0;
  for (size_t i = 0; i < table_a.size(); ++i)
    for (size_t l = 0; l < table_a[i].size(); ++l)
      max_dev = std::max(max_dev, std::abs(table_a[i][l] - table_b[i][l]));
  CHECK(max_dev < 1e-5); // same optimum family on clean data
}
