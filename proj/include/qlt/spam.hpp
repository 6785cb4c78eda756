#ifndef QLT_SPAM_HPP
#define QLT_SPAM_HPP

#include <cstdint>
#include <vector>

#include "qlt/core.hpp"
#include "qlt/optimize.hpp"
#include "qlt/probe.hpp"

namespace qlt::spam {

//=============================================================================
// Unconstrained parameterizations
//=============================================================================

// rho(theta) = theta theta^dag / Tr[theta theta^dag]; PSD with unit trace.
DensityMatrix rho_param(const CMat &theta1);

// POVM from the QR-based Kraus mapping with r = d: M_l = E_l^dag E_l.
// theta2 is (d*d) x d and must have full column rank.
Povm povm_param(const CMat &theta2);

// Parameter packing contract: complex matrices flatten row-major to
// interleaved real vectors, re before im.
RVec pack_complex(const CMat &m);
CMat unpack_complex(const RVec &v, int rows, int cols);

//=============================================================================
// Fitting
//=============================================================================

// Frequency table the fits consume; built from counts or exact probabilities.
struct SpamData {
  int n_qubits = 0;
  std::vector<probe::PauliConfig> configs;
  std::vector<std::vector<double>> freqs;
};
SpamData spam_data_from(const probe::PauliDataset &dataset);
SpamData spam_data_exact(const DensityMatrix &rho0, const Povm &povm,
                         const std::vector<probe::PauliConfig> &configs);

enum class GradientMode { Analytic, CentralDiff };

struct SpamFitConfig {
  opt::AdamConfig adam = default_adam();
  int restarts = 3;
  double init_jitter = 0.05;
  std::uint64_t seed = 0;
  GradientMode gradient = GradientMode::Analytic;

  static opt::AdamConfig default_adam();
};

struct SpamEstimate {
  DensityMatrix rho0;
  Povm povm;
  double loss = 0.0;
  double init_loss = 0.0;
  opt::FitTrace trace;
  CMat theta1; // parameters at the optimum, for replay
  CMat theta2;
};

SpamEstimate fit_spam(const SpamData &data, const SpamFitConfig &config = {});
SpamEstimate fit_spam(const probe::PauliDataset &dataset,
                      const SpamFitConfig &config = {});

// Predicted probability table of an estimate over the given configs. Two
// estimates with equal tables are gauge-equivalent.
std::vector<std::vector<double>>
predicted_spam_table(const SpamEstimate &est,
                     const std::vector<probe::PauliConfig> &configs);

// Loss and analytic gradient exposed for verification against the
// central-difference oracle.
struct SpamObjective {
  explicit SpamObjective(SpamData data);
  double loss(const RVec &theta) const;
  RVec gradient(const RVec &theta) const;
  RVec pack(const CMat &theta1, const CMat &theta2) const;
  void unpack(const RVec &theta, CMat &theta1, CMat &theta2) const;
  int dim() const { return d_; }

private:
  SpamData data_;
  int d_;
  double norm_;
  std::vector<CMat> prep_unitaries_;
};

} // namespace qlt::spam

#endif
