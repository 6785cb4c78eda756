#include "qlt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qlt/rng.hpp"

namespace qlt::metrics {

double state_fidelity(const CMat &a, const CMat &b, double psd_tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols())
    throw DimensionError("state_fidelity: dimension mismatch");
  const CMat root = hermitian_sqrt(a, psd_tol);
  const CMat inner = root * b * root;
  HermitianEig eig = hermitian_eig(inner);
  double sum = 0.0;
  for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
    const double v = eig.values(k);
    if (v < -psd_tol)
      throw ModelViolationError("state_fidelity: negative eigenvalue " +
                                std::to_string(v));
    sum += std::sqrt(std::max(v, 0.0));
  }
  return std::min(sum * sum, 1.0 + 1e-9);
}

double state_fidelity(const DensityMatrix &a, const DensityMatrix &b) {
  return state_fidelity(a.mat, b.mat);
}

double povm_fidelity(const Povm &a, const Povm &b) {
  if (a.n_outcomes() != b.n_outcomes())
    throw DimensionError("povm_fidelity: element count mismatch");
  if (a.dim() != b.dim())
    throw DimensionError("povm_fidelity: dimension mismatch");
  const double d = a.dim();
  double sum = 0.0;
  for (int l = 0; l < a.n_outcomes(); ++l) {
    // Tr sqrt(M N) computed through the Hermitian route
    // Tr sqrt( sqrt(M) N sqrt(M) ).
    const CMat root = hermitian_sqrt(a.elements[l], 1e-8);
    const CMat inner = root * b.elements[l] * root;
    HermitianEig eig = hermitian_eig(inner);
    for (Eigen::Index k = 0; k < eig.values.size(); ++k)
      sum += std::sqrt(std::max(eig.values(k), 0.0));
  }
  return (sum * sum) / (d * d);
}

double process_fidelity(const Superop &a, const Superop &b, double cp_tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("process_fidelity: dimension mismatch");
  const CMat choi_a = choi_matrix(a);
  const CMat choi_b = choi_matrix(b);
  if (min_hermitian_eigenvalue((choi_a + choi_a.adjoint()) / 2.0) < -cp_tol ||
      min_hermitian_eigenvalue((choi_b + choi_b.adjoint()) / 2.0) < -cp_tol)
    throw ModelViolationError("process_fidelity: Choi negativity beyond "
                              "tolerance");
  return state_fidelity(choi_a, choi_b, cp_tol);
}

double r2(const std::vector<double> &observed,
          const std::vector<double> &predicted) {
  if (observed.size() != predicted.size())
    throw DimensionError("r2: shape mismatch");
  if (observed.empty())
    throw DimensionError("r2: empty input");
  double mean = 0.0;
  for (double y : observed)
    mean += y;
  mean /= double(observed.size());

  double ss_res = 0.0, ss_tot = 0.0;
  for (size_t k = 0; k < observed.size(); ++k) {
    ss_res += (observed[k] - predicted[k]) * (observed[k] - predicted[k]);
    ss_tot += (observed[k] - mean) * (observed[k] - mean);
  }
  if (ss_tot <= 0.0)
    throw NumericalError("r2: zero total variance");
  return 1.0 - ss_res / ss_tot;
}

double r2(const std::vector<std::vector<double>> &observed,
          const std::vector<std::vector<double>> &predicted) {
  std::vector<double> flat_obs, flat_pred;
  for (const auto &row : observed)
    flat_obs.insert(flat_obs.end(), row.begin(), row.end());
  for (const auto &row : predicted)
    flat_pred.insert(flat_pred.end(), row.begin(), row.end());
  return r2(flat_obs, flat_pred);
}

SpectrumComparison spectrum_compare(const Superop &a, const Superop &b) {
  if (a.rows() != b.rows())
    throw DimensionError("spectrum_compare: dimension mismatch");
  const CVec spec_a = eigenvalues(a);
  const CVec spec_b = eigenvalues(b);
  const Eigen::Index n = spec_a.size();

  std::vector<bool> used_a(n, false), used_b(n, false);
  SpectrumComparison out;
  out.pairs.reserve(n);
  for (Eigen::Index step = 0; step < n; ++step) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index best_i = -1, best_j = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (used_a[i])
        continue;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (used_b[j])
          continue;
        const double dist = std::abs(spec_a(i) - spec_b(j));
        if (dist < best) {
          best = dist;
          best_i = i;
          best_j = j;
        }
      }
    }
    used_a[best_i] = true;
    used_b[best_j] = true;
    out.pairs.push_back({spec_a(best_i), spec_b(best_j), best});
    out.mismatch += best;
  }
  out.mismatch /= double(n);
  return out;
}

std::string SpectrumComparison::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "re,im,source,pair_id\n";
  for (size_t k = 0; k < pairs.size(); ++k) {
    out << pairs[k].a.real() << "," << pairs[k].a.imag() << ",a," << k << "\n";
    out << pairs[k].b.real() << "," << pairs[k].b.imag() << ",b," << k << "\n";
  }
  return out.str();
}

probe::PauliDataset resample_dataset(const probe::PauliDataset &dataset,
                                     std::uint64_t seed) {
  probe::PauliDataset out = dataset;
  for (size_t r = 0; r < dataset.records.size(); ++r) {
    const auto freqs = dataset.frequencies(static_cast<int>(r));
    Rng rng(Rng::derive_seed(seed, r));
    out.records[r].counts = multinomial_sample(freqs, dataset.shots, rng);
  }
  return out;
}

BootstrapReport bootstrap(const ReplayablePipeline &pipeline,
                          const std::vector<probe::PauliDataset> &datasets,
                          int m_replicas, std::uint64_t seed) {
  if (m_replicas < 2)
    throw Error("bootstrap: need at least 2 replicas");
  if (datasets.empty())
    throw Error("bootstrap: no datasets");

  BootstrapReport report;
  report.m_requested = m_replicas;
  report.original = pipeline(datasets);

  std::vector<ObservableMap> replica_results;
  for (int m = 0; m < m_replicas; ++m) {
    const std::uint64_t replica_seed = Rng::derive_seed(seed, 0xb00 + m);
    report.replica_seeds.push_back(replica_seed);
    std::vector<probe::PauliDataset> resampled;
    resampled.reserve(datasets.size());
    for (size_t k = 0; k < datasets.size(); ++k)
      resampled.push_back(
          resample_dataset(datasets[k], Rng::derive_seed(replica_seed, k)));
    try {
      replica_results.push_back(pipeline(resampled));
    } catch (const std::exception &e) {
      report.failures.push_back("replica " + std::to_string(m) + ": " +
                                e.what());
    }
  }
  report.m_effective = static_cast<int>(replica_results.size());
  if (report.m_effective == 0)
    throw NumericalError("bootstrap: every replica fit failed");

  for (const auto &[name, original_value] : report.original) {
    RMat rows(report.m_effective, original_value.size());
    for (int m = 0; m < report.m_effective; ++m) {
      const auto it = replica_results[m].find(name);
      if (it == replica_results[m].end() ||
          it->second.size() != original_value.size())
        throw Error("bootstrap: replica observables inconsistent for " + name);
      rows.row(m) = it->second.transpose();
    }
    RVec err(original_value.size());
    for (Eigen::Index k = 0; k < original_value.size(); ++k) {
      double acc = 0.0;
      for (int m = 0; m < report.m_effective; ++m) {
        const double diff = rows(m, k) - original_value(k);
        acc += diff * diff;
      }
      err(k) = std::sqrt(acc / double(report.m_effective));
    }
    report.replicas.emplace(name, std::move(rows));
    report.errors.emplace(name, std::move(err));
  }
  return report;
}

} // namespace qlt::metrics
