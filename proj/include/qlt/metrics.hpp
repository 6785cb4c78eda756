#ifndef QLT_METRICS_HPP
#define QLT_METRICS_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "qlt/core.hpp"
#include "qlt/probe.hpp"

namespace qlt::metrics {

//=============================================================================
// Fidelities
//=============================================================================

// Uhlmann fidelity Tr{ sqrt( sqrt(a) b sqrt(a) ) }^2.
double state_fidelity(const DensityMatrix &a, const DensityMatrix &b);
double state_fidelity(const CMat &a, const CMat &b, double psd_tol = 1e-8);

// (1/d^2) ( sum_l Tr sqrt(M_l N_l) )^2; element order matters.
double povm_fidelity(const Povm &a, const Povm &b);

// State fidelity of the unit-trace Choi matrices.
double process_fidelity(const Superop &a, const Superop &b,
                        double cp_tol = 1e-8);

//=============================================================================
// Coefficient of determination
//=============================================================================

// 1 - sum (y - yhat)^2 / sum (y - mean)^2 over flattened tables.
double r2(const std::vector<double> &observed,
          const std::vector<double> &predicted);
double r2(const std::vector<std::vector<double>> &observed,
          const std::vector<std::vector<double>> &predicted);

//=============================================================================
// Spectrum comparison
//=============================================================================

struct SpectrumComparison {
  struct Pair {
    Cplx a;
    Cplx b;
    double distance = 0.0;
  };
  std::vector<Pair> pairs;
  double mismatch = 0.0; // mean paired distance
  std::string to_csv() const; // re, im, source, pair_id
};

// Greedy minimal-distance bipartite pairing of the two spectra.
SpectrumComparison spectrum_compare(const Superop &a, const Superop &b);

//=============================================================================
// Bootstrap
//=============================================================================

// Named real-vector observables extracted by a replayable fit pipeline.
using ObservableMap = std::map<std::string, RVec>;
using ReplayablePipeline =
    std::function<ObservableMap(const std::vector<probe::PauliDataset> &)>;

// Parametric-multinomial resampling at the original shot counts.
probe::PauliDataset resample_dataset(const probe::PauliDataset &dataset,
                                     std::uint64_t seed);

struct BootstrapReport {
  int m_requested = 0;
  int m_effective = 0;
  std::vector<std::uint64_t> replica_seeds;
  ObservableMap original;
  std::map<std::string, RMat> replicas; // one row per successful replica
  ObservableMap errors;                 // delta O per observable entry
  std::vector<std::string> failures;    // messages of dropped replicas
};

// delta O = sqrt( (1/M) sum_m (O_m - O_orig)^2 ), centered on the
// original-dataset estimate.
BootstrapReport bootstrap(const ReplayablePipeline &pipeline,
                          const std::vector<probe::PauliDataset> &datasets,
                          int m_replicas, std::uint64_t seed);

} // namespace qlt::metrics

#endif
