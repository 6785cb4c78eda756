#ifndef QLT_PROBE_HPP
#define QLT_PROBE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "qlt/core.hpp"

namespace qlt::probe {

//=============================================================================
// Probe circuit labels
//=============================================================================

// The six single-qubit preparation rotations.
enum class RotationLabel { RYp, RYm, RXp, RXm, PauliX, Id };

// Measurement bases; computational-basis readout after the basis rotation.
enum class MeasBasis { X, Y, Z };

constexpr int kNumRotationLabels = 6;
constexpr int kNumMeasBases = 3;

std::string to_string(RotationLabel label);
std::string to_string(MeasBasis basis);
RotationLabel rotation_label_from_string(const std::string &s);
MeasBasis meas_basis_from_string(const std::string &s);

// One probe circuit: per-qubit preparation rotations and measurement bases.
// SPAM circuits carry an empty meas list.
struct PauliConfig {
  std::vector<RotationLabel> prep;
  std::vector<MeasBasis> meas;

  bool operator==(const PauliConfig &other) const = default;
};

//=============================================================================
// Gates
//=============================================================================

// R_A(theta) = exp(-i theta sigma_A / 2); PauliX is the x gate, Id identity.
CMat rotation_gate(RotationLabel label);

// Basis rotation applied before computational-basis readout:
// Z -> identity, X -> R_Y(-pi/2), Y -> R_X(+pi/2).
CMat measurement_rotation(MeasBasis basis);

// Tensor products over all qubits (qubit 0 = leftmost factor).
CMat prep_unitary(const std::vector<RotationLabel> &prep);
CMat meas_unitary(const std::vector<MeasBasis> &meas);

//=============================================================================
// Config enumeration
//=============================================================================

struct ConfigSelection {
  enum class Mode { Full, RandomSubset } mode = Mode::Full;
  int n_configs = 0;        // for RandomSubset
  std::uint64_t seed = 0;   // for RandomSubset
  static ConfigSelection full() { return ConfigSelection{}; }
  static ConfigSelection random_subset(int n, std::uint64_t seed) {
    return ConfigSelection{Mode::RandomSubset, n, seed};
  }
};

// Process configs: all 6^n * 3^n (prep, meas) strings in lexicographic order,
// or a seeded subset drawn without replacement.
std::vector<PauliConfig> enumerate_configs(int n_qubits,
                                           const ConfigSelection &sel = {});

// SPAM configs: the 6^n preparation strings (no measurement rotation).
std::vector<PauliConfig> enumerate_spam_configs(int n_qubits,
                                                const ConfigSelection &sel = {});

//=============================================================================
// Born-rule probabilities
//=============================================================================

// p_l = Tr[ Lambda(R_i rho0 R_i^dag) R_j^dag M_l R_j ], clipped to [0,1].
// Accepts non-CPTP maps; raises if any entry leaves [-1e-6, 1+1e-6].
std::vector<double> born_probabilities(const Superop &map,
                                       const DensityMatrix &rho0,
                                       const Povm &povm,
                                       const PauliConfig &config);

// p_l = Tr[ R_i rho0 R_i^dag M_l ]: preparation immediately measured.
std::vector<double> spam_probabilities(const DensityMatrix &rho0,
                                       const Povm &povm,
                                       const std::vector<RotationLabel> &prep);

//=============================================================================
// Finite-shot sampling and datasets
//=============================================================================

std::vector<long long> sample_counts(const std::vector<double> &probs,
                                     long long shots, std::uint64_t rng_seed);

enum class DatasetKind { Process, Spam };

struct CountRecord {
  PauliConfig config;
  std::vector<long long> counts; // outcome l ascending
};

struct PauliDataset {
  int n_qubits = 0;
  double time_tag = 0.0;
  long long shots = 0;
  DatasetKind kind = DatasetKind::Process;
  std::vector<CountRecord> records;

  std::vector<double> frequencies(int record_index) const;
  void validate() const;
};

// Sample a full dataset from exact probabilities. Per-record seeds derive
// from (seed, record index) so workers may sample records in parallel.
PauliDataset generate_process_dataset(const Superop &map,
                                      const DensityMatrix &rho0,
                                      const Povm &povm,
                                      const std::vector<PauliConfig> &configs,
                                      long long shots, std::uint64_t seed,
                                      double time_tag);

PauliDataset generate_spam_dataset(const DensityMatrix &rho0, const Povm &povm,
                                   const std::vector<PauliConfig> &configs,
                                   long long shots, std::uint64_t seed);

// Exact-probability (infinite-shot) variants: counts hold shots * p rounded
// to nearest; used by clean-data benchmarks. Frequencies are stored exactly.
struct ProbabilityTable {
  std::vector<PauliConfig> configs;
  std::vector<std::vector<double>> probs; // per config, over outcomes
};
ProbabilityTable exact_process_table(const Superop &map,
                                     const DensityMatrix &rho0,
                                     const Povm &povm,
                                     const std::vector<PauliConfig> &configs,
                                     double time_tag = 0.0);

// JSON round trip per the dataset schema.
std::string dataset_to_json(const PauliDataset &ds);
PauliDataset dataset_from_json(const std::string &text);
void save_dataset(const PauliDataset &ds, const std::string &path);
PauliDataset load_dataset(const std::string &path);

} // namespace qlt::probe

#endif
