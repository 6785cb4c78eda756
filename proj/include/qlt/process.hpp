#ifndef QLT_PROCESS_HPP
#define QLT_PROCESS_HPP

#include <cstdint>
#include <vector>

#include "qlt/core.hpp"
#include "qlt/optimize.hpp"
#include "qlt/probe.hpp"
#include "qlt/spam.hpp"

namespace qlt::process {

//=============================================================================
// Kraus representation
//=============================================================================

struct KrausMap {
  std::vector<CMat> ops;
  int rank() const { return static_cast<int>(ops.size()); }
  int dim() const { return ops.empty() ? 0 : static_cast<int>(ops[0].rows()); }
};
KrausMap make_kraus_map(std::vector<CMat> ops, double tol = 1e-10);

// Phase-fixed thin QR: theta = U * R with U semi-unitary and R upper
// triangular with positive real diagonal.
struct PositiveQr {
  CMat u;
  CMat r;
};
PositiveQr qr_positive(const CMat &theta);

// Adjoint of theta -> U at the phase-fixed QR point: maps a gradient with
// respect to U back to a gradient with respect to theta (convention
// d loss = 2 Re <G, dX>).
CMat qr_positive_pullback(const PositiveQr &qr, const CMat &grad_u);

// Kraus operators as the r row-blocks of the phase-fixed QR factor U of an
// unconstrained (r d) x d parameter matrix; trace preservation holds by
// semi-unitarity.
KrausMap kraus_param(const CMat &theta);

// Row-major vectorized superoperator sum_mu E_mu (x) E_mu^*.
Superop kraus_to_superoperator(const KrausMap &kraus);

//=============================================================================
// Map fitting
//=============================================================================

struct ProcessData {
  int n_qubits = 0;
  std::vector<probe::PauliConfig> configs;
  std::vector<std::vector<double>> freqs;
};
ProcessData process_data_from(const probe::PauliDataset &dataset);
ProcessData process_data_exact(const Superop &map, const DensityMatrix &rho0,
                               const Povm &povm,
                               const std::vector<probe::PauliConfig> &configs);

struct MapFitConfig {
  opt::AdamConfig adam = default_adam();
  int rank = 0; // 0 -> full rank d^2
  int restarts = 1;
  double init_jitter = 0.05;
  std::uint64_t seed = 0;
  spam::GradientMode gradient = spam::GradientMode::Analytic;

  static opt::AdamConfig default_adam();
};

struct MapEstimate {
  KrausMap kraus;
  Superop superop;
  double loss = 0.0;
  double init_loss = 0.0;
  opt::FitTrace trace;
  CMat theta;
};

// Reconstruct the map with SPAM frozen at the supplied estimate.
MapEstimate fit_map(const ProcessData &data, const spam::SpamEstimate &spam_est,
                    const MapFitConfig &config = {});
MapEstimate fit_map(const probe::PauliDataset &dataset,
                    const spam::SpamEstimate &spam_est,
                    const MapFitConfig &config = {});

// Predicted Born probabilities of a fitted map under the same SPAM.
std::vector<std::vector<double>>
predicted_process_table(const Superop &map, const spam::SpamEstimate &spam_est,
                        const std::vector<probe::PauliConfig> &configs);

// Loss/gradient pair for the Kraus-parameterized MSE objective.
struct MapObjective {
  MapObjective(ProcessData data, const DensityMatrix &rho0, const Povm &povm,
               int rank);
  double loss(const RVec &theta) const;
  RVec gradient(const RVec &theta) const;
  int rank() const { return rank_; }
  int dim() const { return d_; }

private:
  ProcessData data_;
  int d_;
  int rank_;
  double norm_;
  std::vector<CMat> rotated_inputs_;          // per unique prep
  std::vector<std::vector<CMat>> rotated_povm_; // per unique meas, per outcome
  std::vector<int> prep_index_;               // per record
  std::vector<int> meas_index_;                // per record
};

} // namespace qlt::process

#endif
