#include "qlt/probe.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "qlt/rng.hpp"

namespace qlt::probe {

std::string to_string(RotationLabel label) {
  switch (label) {
  case RotationLabel::RYp:
    return "RY+";
  case RotationLabel::RYm:
    return "RY-";
  case RotationLabel::RXp:
    return "RX+";
  case RotationLabel::RXm:
    return "RX-";
  case RotationLabel::PauliX:
    return "X";
  case RotationLabel::Id:
    return "I";
  }
  throw Error("to_string: bad rotation label");
}

std::string to_string(MeasBasis basis) {
  switch (basis) {
  case MeasBasis::X:
    return "X";
  case MeasBasis::Y:
    return "Y";
  case MeasBasis::Z:
    return "Z";
  }
  throw Error("to_string: bad measurement basis");
}

RotationLabel rotation_label_from_string(const std::string &s) {
  if (s == "RY+")
    return RotationLabel::RYp;
  if (s == "RY-")
    return RotationLabel::RYm;
  if (s == "RX+")
    return RotationLabel::RXp;
  if (s == "RX-")
    return RotationLabel::RXm;
  if (s == "X")
    return RotationLabel::PauliX;
  if (s == "I")
    return RotationLabel::Id;
  throw Error("unknown rotation label: " + s);
}

MeasBasis meas_basis_from_string(const std::string &s) {
  if (s == "X")
    return MeasBasis::X;
  if (s == "Y")
    return MeasBasis::Y;
  if (s == "Z")
    return MeasBasis::Z;
  throw Error("unknown measurement basis: " + s);
}

namespace {

CMat axis_rotation(int axis, double theta) {
  // exp(-i theta sigma_axis / 2) = cos(theta/2) 1 - i sin(theta/2) sigma
  const Cplx i(0.0, 1.0);
  return std::cos(theta / 2.0) * CMat::Identity(2, 2) -
         i * std::sin(theta / 2.0) * pauli_sigma(axis);
}

constexpr double kPi = 3.14159265358979323846;

} // namespace

CMat rotation_gate(RotationLabel label) {
  switch (label) {
  case RotationLabel::RYp:
    return axis_rotation(2, kPi / 2.0);
  case RotationLabel::RYm:
    return axis_rotation(2, -kPi / 2.0);
  case RotationLabel::RXp:
    return axis_rotation(1, kPi / 2.0);
  case RotationLabel::RXm:
    return axis_rotation(1, -kPi / 2.0);
  case RotationLabel::PauliX:
    return pauli_sigma(1);
  case RotationLabel::Id:
    return CMat::Identity(2, 2);
  }
  throw Error("rotation_gate: bad label");
}

CMat measurement_rotation(MeasBasis basis) {
  switch (basis) {
  case MeasBasis::Z:
    return CMat::Identity(2, 2);
  case MeasBasis::X:
    return axis_rotation(2, -kPi / 2.0);
  case MeasBasis::Y:
    return axis_rotation(1, kPi / 2.0);
  }
  throw Error("measurement_rotation: bad basis");
}

CMat prep_unitary(const std::vector<RotationLabel> &prep) {
  if (prep.empty())
    throw DimensionError("prep_unitary: empty label list");
  CMat u = rotation_gate(prep[0]);
  for (size_t q = 1; q < prep.size(); ++q)
    u = kron(u, rotation_gate(prep[q]));
  return u;
}

CMat meas_unitary(const std::vector<MeasBasis> &meas) {
  if (meas.empty())
    throw DimensionError("meas_unitary: empty basis list");
  CMat u = measurement_rotation(meas[0]);
  for (size_t q = 1; q < meas.size(); ++q)
    u = kron(u, measurement_rotation(meas[q]));
  return u;
}

namespace {

// Decode a flat index into per-qubit labels; prep digits are most
// significant, then meas digits. Matches the full lexicographic order.
PauliConfig decode_config(std::uint64_t index, int n_qubits) {
  std::uint64_t n_meas = 1;
  for (int q = 0; q < n_qubits; ++q)
    n_meas *= kNumMeasBases;
  const std::uint64_t meas_part = index % n_meas;
  std::uint64_t prep_part = index / n_meas;

  PauliConfig cfg;
  cfg.prep.resize(n_qubits);
  cfg.meas.resize(n_qubits);
  std::uint64_t m = meas_part;
  for (int q = n_qubits - 1; q >= 0; --q) {
    cfg.meas[q] = static_cast<MeasBasis>(m % kNumMeasBases);
    m /= kNumMeasBases;
  }
  std::uint64_t p = prep_part;
  for (int q = n_qubits - 1; q >= 0; --q) {
    cfg.prep[q] = static_cast<RotationLabel>(p % kNumRotationLabels);
    p /= kNumRotationLabels;
  }
  return cfg;
}

std::vector<std::uint64_t> draw_distinct(std::uint64_t total, int n,
                                         std::uint64_t seed) {
  Rng rng(seed);
  std::set<std::uint64_t> picked;
  while (static_cast<int>(picked.size()) < n)
    picked.insert(rng.next_u64() % total);
  return {picked.begin(), picked.end()};
}

} // namespace

std::vector<PauliConfig> enumerate_configs(int n_qubits,
                                           const ConfigSelection &sel) {
  if (n_qubits < 1)
    throw DimensionError("enumerate_configs: n_qubits must be >= 1");
  std::uint64_t total = 1;
  for (int q = 0; q < n_qubits; ++q)
    total *= kNumRotationLabels * kNumMeasBases;

  std::vector<PauliConfig> configs;
  if (sel.mode == ConfigSelection::Mode::Full) {
    configs.reserve(total);
    for (std::uint64_t idx = 0; idx < total; ++idx)
      configs.push_back(decode_config(idx, n_qubits));
  } else {
    if (sel.n_configs <= 0 || static_cast<std::uint64_t>(sel.n_configs) > total)
      throw DimensionError("enumerate_configs: subset size out of range");
    for (std::uint64_t idx : draw_distinct(total, sel.n_configs, sel.seed))
      configs.push_back(decode_config(idx, n_qubits));
  }
  return configs;
}

std::vector<PauliConfig> enumerate_spam_configs(int n_qubits,
                                                const ConfigSelection &sel) {
  if (n_qubits < 1)
    throw DimensionError("enumerate_spam_configs: n_qubits must be >= 1");
  std::uint64_t total = 1;
  for (int q = 0; q < n_qubits; ++q)
    total *= kNumRotationLabels;

  std::vector<std::uint64_t> indices;
  if (sel.mode == ConfigSelection::Mode::Full) {
    indices.resize(total);
    for (std::uint64_t i = 0; i < total; ++i)
      indices[i] = i;
  } else {
    if (sel.n_configs <= 0 || static_cast<std::uint64_t>(sel.n_configs) > total)
      throw DimensionError("enumerate_spam_configs: subset size out of range");
    indices = draw_distinct(total, sel.n_configs, sel.seed);
  }

  std::vector<PauliConfig> configs;
  configs.reserve(indices.size());
  for (std::uint64_t idx : indices) {
    PauliConfig cfg;
    cfg.prep.resize(n_qubits);
    std::uint64_t p = idx;
    for (int q = n_qubits - 1; q >= 0; --q) {
      cfg.prep[q] = static_cast<RotationLabel>(p % kNumRotationLabels);
      p /= kNumRotationLabels;
    }
    configs.push_back(std::move(cfg));
  }
  return configs;
}

namespace {

std::vector<double> finalize_probabilities(std::vector<double> probs) {
  double sum = 0.0;
  for (double &p : probs) {
    if (p < -1e-6 || p > 1.0 + 1e-6)
      throw ModelViolationError("probability " + std::to_string(p) +
                                " outside [0,1] beyond tolerance");
    p = std::min(std::max(p, 0.0), 1.0);
    sum += p;
  }
  (void)sum;
  return probs;
}

} // namespace

std::vector<double> born_probabilities(const Superop &map,
                                       const DensityMatrix &rho0,
                                       const Povm &povm,
                                       const PauliConfig &config) {
  const int d = rho0.dim();
  if (map.rows() != static_cast<Eigen::Index>(d) * d)
    throw DimensionError("born_probabilities: map/state dimension mismatch");
  if (povm.dim() != d)
    throw DimensionError("born_probabilities: POVM dimension mismatch");
  if (config.meas.empty())
    throw DimensionError("born_probabilities: config has no measurement bases");

  const CMat r_prep = prep_unitary(config.prep);
  const CMat r_meas = meas_unitary(config.meas);
  const CMat rho_in = r_prep * rho0.mat * r_prep.adjoint();
  const CMat evolved = apply_superop(map, rho_in);

  std::vector<double> probs(povm.n_outcomes());
  for (int l = 0; l < povm.n_outcomes(); ++l) {
    const CMat m_rot = r_meas.adjoint() * povm.elements[l] * r_meas;
    probs[l] = (evolved * m_rot).trace().real();
  }
  return finalize_probabilities(std::move(probs));
}

std::vector<double> spam_probabilities(const DensityMatrix &rho0,
                                       const Povm &povm,
                                       const std::vector<RotationLabel> &prep) {
  if (povm.dim() != rho0.dim())
    throw DimensionError("spam_probabilities: POVM dimension mismatch");
  const CMat r_prep = prep_unitary(prep);
  const CMat rho_in = r_prep * rho0.mat * r_prep.adjoint();
  std::vector<double> probs(povm.n_outcomes());
  for (int l = 0; l < povm.n_outcomes(); ++l)
    probs[l] = (rho_in * povm.elements[l]).trace().real();
  return finalize_probabilities(std::move(probs));
}

std::vector<long long> sample_counts(const std::vector<double> &probs,
                                     long long shots, std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  return multinomial_sample(probs, shots, rng);
}

std::vector<double> PauliDataset::frequencies(int record_index) const {
  const auto &counts = records.at(record_index).counts;
  std::vector<double> freqs(counts.size());
  for (size_t l = 0; l < counts.size(); ++l)
    freqs[l] = static_cast<double>(counts[l]) / static_cast<double>(shots);
  return freqs;
}

void PauliDataset::validate() const {
  if (n_qubits < 1)
    throw DimensionError("dataset: n_qubits must be >= 1");
  if (shots < 1)
    throw DimensionError("dataset: shots must be >= 1");
  const size_t n_outcomes = size_t(1) << n_qubits;
  for (const auto &rec : records) {
    if (static_cast<int>(rec.config.prep.size()) != n_qubits)
      throw DimensionError("dataset: prep length mismatch");
    if (kind == DatasetKind::Process &&
        static_cast<int>(rec.config.meas.size()) != n_qubits)
      throw DimensionError("dataset: meas length mismatch");
    if (rec.counts.size() != n_outcomes)
      throw DimensionError("dataset: counts length mismatch");
    long long total = 0;
    for (long long c : rec.counts) {
      if (c < 0)
        throw ModelViolationError("dataset: negative count");
      total += c;
    }
    if (total != shots)
      throw ModelViolationError("dataset: counts sum " + std::to_string(total) +
                                " != shots " + std::to_string(shots));
  }
}

PauliDataset generate_process_dataset(const Superop &map,
                                      const DensityMatrix &rho0,
                                      const Povm &povm,
                                      const std::vector<PauliConfig> &configs,
                                      long long shots, std::uint64_t seed,
                                      double time_tag) {
  PauliDataset ds;
  ds.n_qubits = static_cast<int>(std::llround(std::log2(double(rho0.dim()))));
  ds.time_tag = time_tag;
  ds.shots = shots;
  ds.kind = DatasetKind::Process;
  ds.records.reserve(configs.size());
  for (size_t idx = 0; idx < configs.size(); ++idx) {
    const auto probs = born_probabilities(map, rho0, povm, configs[idx]);
    CountRecord rec;
    rec.config = configs[idx];
    rec.counts = sample_counts(probs, shots, Rng::derive_seed(seed, idx));
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

PauliDataset generate_spam_dataset(const DensityMatrix &rho0, const Povm &povm,
                                   const std::vector<PauliConfig> &configs,
                                   long long shots, std::uint64_t seed) {
  PauliDataset ds;
  ds.n_qubits = static_cast<int>(std::llround(std::log2(double(rho0.dim()))));
  ds.time_tag = 0.0;
  ds.shots = shots;
  ds.kind = DatasetKind::Spam;
  ds.records.reserve(configs.size());
  for (size_t idx = 0; idx < configs.size(); ++idx) {
    const auto probs = spam_probabilities(rho0, povm, configs[idx].prep);
    CountRecord rec;
    rec.config = configs[idx];
    rec.counts = sample_counts(probs, shots, Rng::derive_seed(seed, idx));
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

ProbabilityTable exact_process_table(const Superop &map,
                                     const DensityMatrix &rho0,
                                     const Povm &povm,
                                     const std::vector<PauliConfig> &configs,
                                     double time_tag) {
  (void)time_tag;
  ProbabilityTable table;
  table.configs = configs;
  table.probs.reserve(configs.size());
  for (const auto &cfg : configs)
    table.probs.push_back(born_probabilities(map, rho0, povm, cfg));
  return table;
}

//=============================================================================
// JSON serialization
//=============================================================================

std::string dataset_to_json(const PauliDataset &ds) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["n_qubits"] = ds.n_qubits;
  j["time_tag"] = ds.time_tag;
  j["shots"] = ds.shots;
  j["kind"] = (ds.kind == DatasetKind::Process) ? "process" : "spam";
  nlohmann::json records = nlohmann::json::array();
  for (const auto &rec : ds.records) {
    nlohmann::json r;
    nlohmann::json prep = nlohmann::json::array();
    for (auto label : rec.config.prep)
      prep.push_back(to_string(label));
    nlohmann::json meas = nlohmann::json::array();
    for (auto basis : rec.config.meas)
      meas.push_back(to_string(basis));
    r["prep"] = prep;
    r["meas"] = meas;
    r["counts"] = rec.counts;
    records.push_back(std::move(r));
  }
  j["records"] = std::move(records);
  return j.dump(2);
}

PauliDataset dataset_from_json(const std::string &text) {
  const auto j = nlohmann::json::parse(text);
  PauliDataset ds;
  ds.n_qubits = j.at("n_qubits").get<int>();
  ds.time_tag = j.at("time_tag").get<double>();
  ds.shots = j.at("shots").get<long long>();
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "process")
    ds.kind = DatasetKind::Process;
  else if (kind == "spam")
    ds.kind = DatasetKind::Spam;
  else
    throw Error("dataset_from_json: unknown kind " + kind);
  for (const auto &r : j.at("records")) {
    CountRecord rec;
    for (const auto &p : r.at("prep"))
      rec.config.prep.push_back(rotation_label_from_string(p.get<std::string>()));
    for (const auto &m : r.at("meas"))
      rec.config.meas.push_back(meas_basis_from_string(m.get<std::string>()));
    rec.counts = r.at("counts").get<std::vector<long long>>();
    ds.records.push_back(std::move(rec));
  }
  ds.validate();
  return ds;
}

void save_dataset(const PauliDataset &ds, const std::string &path) {
  std::ofstream out(path);
  if (!out)
    throw Error("save_dataset: cannot open " + path);
  out << dataset_to_json(ds) << "\n";
}

PauliDataset load_dataset(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw Error("load_dataset: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return dataset_from_json(text);
}

} // namespace qlt::probe
