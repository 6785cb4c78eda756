#include <doctest.h>

#include <cstdio>

#include "qlt/probe.hpp"
#include "qlt/process.hpp"
#include "qlt/rng.hpp"
#include "qlt/synth.hpp"
#include "test_util.hpp"

using namespace qlt;
using namespace qlt::probe;
using qlt_test::max_abs_diff;

namespace {

CVec ket0() {
  CVec v(2);
  v << 1.0, 0.0;
  return v;
}

double overlap_with(const CVec &state, const CVec &target) {
  return std::abs(target.dot(state)); // |<target|state>|
}

} // namespace

TEST_CASE("rotation gates") {
  CHECK(max_abs_diff(rotation_gate(RotationLabel::Id), CMat::Identity(2, 2)) == 0.0);

  const CVec plus_x = rotation_gate(RotationLabel::RYp) * ket0();
  CVec expected(2);
  expected << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  CHECK((plus_x - expected).cwiseAbs().maxCoeff() < 1e-15);

  const CVec flipped = rotation_gate(RotationLabel::PauliX) * ket0();
  CVec one(2);
  one << 0.0, 1.0;
  CHECK(overlap_with(flipped, one) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("measurement rotations map Pauli eigenstates to |0>") {
  CHECK(max_abs_diff(measurement_rotation(MeasBasis::Z), CMat::Identity(2, 2)) ==
        0.0);

  CVec plus_x(2);
  plus_x << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  CHECK(overlap_with(measurement_rotation(MeasBasis::X) * plus_x, ket0()) ==
        doctest::Approx(1.0).epsilon(1e-12));

  CVec plus_y(2);
  plus_y << 1.0 / std::sqrt(2.0), Cplx(0.0, 1.0) / std::sqrt(2.0);
  CHECK(overlap_with(measurement_rotation(MeasBasis::Y) * plus_y, ket0()) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("config enumeration") {
  CHECK(enumerate_configs(1).size() == 18);
  CHECK(enumerate_configs(2).size() == 324);
  CHECK(enumerate_spam_configs(2).size() == 36);

  const auto a = enumerate_configs(2, ConfigSelection::random_subset(50, 1));
  const auto b = enumerate_configs(2, ConfigSelection::random_subset(50, 1));
  REQUIRE(a.size() == 50);
  CHECK(a == b);
  // Distinctness
  for (size_t i = 0; i + 1 < a.size(); ++i)
    for (size_t j = i + 1; j < a.size(); ++j)
      CHECK(!(a[i] == a[j]));

  CHECK_THROWS_AS(enumerate_configs(1, ConfigSelection::random_subset(19, 0)),
                  DimensionError);

  // Fixed total order
  CHECK(enumerate_configs(2) == enumerate_configs(2));
}

TEST_CASE("born probabilities: bit flip, z rotation, depolarizing") {
  const DensityMatrix rho0 = ideal_state(1);
  const Povm povm = ideal_povm(1);

  PauliConfig flip;
  flip.prep = {RotationLabel::PauliX};
  flip.meas = {MeasBasis::Z};
  const auto p_flip = born_probabilities(identity_superop(2), rho0, povm, flip);
  CHECK(p_flip[1] == doctest::Approx(1.0).epsilon(1e-12));

  const double t = 0.7;
  const Cplx i(0.0, 1.0);
  const CMat u = matrix_exponential(-i * t / 2.0 * pauli_sigma(3));
  PauliConfig cfg;
  cfg.prep = {RotationLabel::RYp};
  cfg.meas = {MeasBasis::X};
  const auto p_rot = born_probabilities(conjugation_superop(u), rho0, povm, cfg);
  CHECK(p_rot[0] == doctest::Approx((1.0 + std::cos(t)) / 2.0).epsilon(1e-12));

  const CVec id_vec = vectorize(CMat::Identity(2, 2));
  const Superop depol = 0.5 * id_vec * id_vec.transpose();
  for (const auto &config : enumerate_configs(1)) {
    const auto p = born_probabilities(depol, rho0, povm, config);
    for (double v : p)
      CHECK(v == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("born probabilities normalize for trace-preserving maps") {
  Rng rng(91);
  for (int trial = 0; trial < 5; ++trial) {
    const auto kraus = synth::random_kraus_map(4, 4, 700 + trial);
    const Superop map = process::kraus_to_superoperator(kraus);
    const auto [rho0, povm] = synth::perturbed_spam(2, 800 + trial);
    for (const auto &config :
         enumerate_configs(2, ConfigSelection::random_subset(10, trial))) {
      const auto p = born_probabilities(map, rho0, povm, config);
      double sum = 0.0;
      for (double v : p)
        sum += v;
      CHECK(std::abs(sum - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("spam probabilities") {
  const DensityMatrix rho0 = ideal_state(1);
  const Povm povm = ideal_povm(1);

  const auto p_id = spam_probabilities(rho0, povm, {RotationLabel::Id});
  CHECK(p_id[0] == doctest::Approx(1.0).epsilon(1e-12));

  const auto p_ry = spam_probabilities(rho0, povm, {RotationLabel::RYp});
  CHECK(p_ry[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p_ry[1] == doctest::Approx(0.5).epsilon(1e-12));

  const DensityMatrix mixed{CMat::Identity(2, 2) / 2.0};
  for (auto label : {RotationLabel::RYp, RotationLabel::RXm, RotationLabel::Id}) {
    const auto p = spam_probabilities(mixed, povm, {label});
    CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("sample counts: determinism and degenerate distribution") {
  const auto counts = sample_counts({1.0, 0.0}, 100, 42);
  CHECK(counts[0] == 100);
  CHECK(counts[1] == 0);

  const auto a = sample_counts({0.25, 0.5, 0.25}, 1000, 7);
  const auto b = sample_counts({0.25, 0.5, 0.25}, 1000, 7);
  CHECK(a == b);
  CHECK(a[0] + a[1] + a[2] == 1000);

  CHECK_THROWS_AS(sample_counts({0.7, 0.2}, 10, 0), ModelViolationError);
}

TEST_CASE("sample counts: binomial concentration") {
  const long long shots = 10000;
  int within = 0;
  const int n_seeds = 1000;
  for (int seed = 0; seed < n_seeds; ++seed) {
    const auto counts = sample_counts({0.5, 0.5}, shots, 10000 + seed);
    const double freq = double(counts[0]) / double(shots);
    if (std::abs(freq - 0.5) < 5.0 / std::sqrt(double(shots)))
      ++within;
  }
  CHECK(within >= 990);
}

TEST_CASE("empirical frequencies converge as 1/sqrt(Ns)") {
  const std::vector<double> probs = {0.3, 0.7};
  auto mean_err = [&](long long shots) {
    double total = 0.0;
    const int n_seeds = 100;
    for (int seed = 0; seed < n_seeds; ++seed) {
      const auto counts = sample_counts(probs, shots, 555000 + seed);
      double err = 0.0;
      for (size_t l = 0; l < probs.size(); ++l)
        err = std::max(err,
                       std::abs(double(counts[l]) / double(shots) - probs[l]));
      total += err;
    }
    return total / n_seeds;
  };
  const double e2 = mean_err(100);
  const double e4 = mean_err(10000);
  const double e6 = mean_err(1000000);
  CHECK(e2 / e4 > 5.0);
  CHECK(e2 / e4 < 20.0);
  CHECK(e4 / e6 > 5.0);
  CHECK(e4 / e6 < 20.0);
}

TEST_CASE("dataset generation and JSON round trip") {
  const auto [rho0, povm] = synth::perturbed_spam(1, 321);
  const auto configs = enumerate_configs(1);
  const auto ds = generate_process_dataset(identity_superop(2), rho0, povm,
                                           configs, 500, 99, 0.25);
  ds.validate();
  CHECK(ds.records.size() == 18);
  for (const auto &rec : ds.records) {
    long long sum = 0;
    for (long long c : rec.counts)
      sum += c;
    CHECK(sum == 500);
  }

  // Identical seeds give identical datasets.
  const auto ds2 = generate_process_dataset(identity_superop(2), rho0, povm,
                                            configs, 500, 99, 0.25);
  CHECK(dataset_to_json(ds) == dataset_to_json(ds2));

  const PauliDataset parsed = dataset_from_json(dataset_to_json(ds));
  CHECK(dataset_to_json(parsed) == dataset_to_json(ds));

  const std::string path = "/tmp/qlt_test_dataset.json";
  save_dataset(ds, path);
  const PauliDataset loaded = load_dataset(path);
  CHECK(dataset_to_json(loaded) == dataset_to_json(ds));
  std::remove(path.c_str());
}

TEST_CASE("spam dataset generation") {
  const auto [rho0, povm] = synth::perturbed_spam(1, 17);
  const auto configs = enumerate_spam_configs(1);
  const auto ds = generate_spam_dataset(rho0, povm, configs, 200, 5);
  CHECK(ds.kind == DatasetKind::Spam);
  CHECK(ds.records.size() == 6);
  ds.validate();
  const PauliDataset parsed = dataset_from_json(dataset_to_json(ds));
  CHECK(parsed.kind == DatasetKind::Spam);
}
