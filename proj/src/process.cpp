#include "qlt/process.hpp"

#include <cmath>
#include <map>

#include "qlt/rng.hpp"

namespace qlt::process {

KrausMap make_kraus_map(std::vector<CMat> ops, double tol) {
  if (ops.empty())
    throw DimensionError("make_kraus_map: no operators");
  const Eigen::Index d = ops[0].rows();
  CMat sum = CMat::Zero(d, d);
  for (const auto &e : ops) {
    if (e.rows() != d || e.cols() != d)
      throw DimensionError("make_kraus_map: inconsistent dimensions");
    sum += e.adjoint() * e;
  }
  const double err = (sum - CMat::Identity(d, d)).cwiseAbs().maxCoeff();
  if (err > tol)
    throw ModelViolationError("make_kraus_map: trace preservation violated by " +
                              std::to_string(err));
  return KrausMap{std::move(ops)};
}

PositiveQr qr_positive(const CMat &theta) {
  const Eigen::Index m = theta.rows();
  const Eigen::Index n = theta.cols();
  if (m < n)
    throw DimensionError("qr_positive: need at least as many rows as columns");

  Eigen::HouseholderQR<CMat> qr(theta);
  CMat q = qr.householderQ() * CMat::Identity(m, n);
  CMat r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();

  // Fix the phase ambiguity: force the diagonal of R to be real positive.
  CVec phases(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mag = std::abs(r(i, i));
    if (mag < 1e-14)
      throw NumericalError("qr_positive: rank-deficient parameter matrix "
                           "(diagonal of R vanishes)");
    phases(i) = r(i, i) / mag;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    q.col(i) *= phases(i);
    r.row(i) *= std::conj(phases(i));
  }
  return PositiveQr{std::move(q), std::move(r)};
}

CMat qr_positive_pullback(const PositiveQr &qr, const CMat &grad_u) {
  const CMat &u = qr.u;
  const Eigen::Index n = u.cols();

  // B = U^dag G; project onto the tangent directions allowed by the
  // positive-diagonal QR: A = tril_strict(B - B^dag) + diag(B - B^dag)/2.
  const CMat b = u.adjoint() * grad_u;
  const CMat skew = b - b.adjoint();
  CMat a = CMat::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j)
      a(i, j) = skew(i, j);
    a(i, i) = 0.5 * skew(i, i);
  }

  const CMat core = u * a + (grad_u - u * (u.adjoint() * grad_u));
  // G_theta = core * R^{-dag}; solve X R^dag = core.
  const CMat x_adj = qr.r.triangularView<Eigen::Upper>().solve(core.adjoint());
  return x_adj.adjoint();
}

KrausMap kraus_param(const CMat &theta) {
  const Eigen::Index d = theta.cols();
  if (theta.rows() % d != 0)
    throw DimensionError("kraus_param: rows must be a multiple of columns");
  const Eigen::Index r = theta.rows() / d;
  const PositiveQr qr = qr_positive(theta);
  std::vector<CMat> ops;
  ops.reserve(r);
  for (Eigen::Index mu = 0; mu < r; ++mu)
    ops.push_back(qr.u.block(mu * d, 0, d, d));
  return KrausMap{std::move(ops)};
}

Superop kraus_to_superoperator(const KrausMap &kraus) {
  const int d = kraus.dim();
  Superop s = Superop::Zero(static_cast<Eigen::Index>(d) * d,
                            static_cast<Eigen::Index>(d) * d);
  for (const auto &e : kraus.ops)
    s += kron(e, e.conjugate());
  return s;
}

ProcessData process_data_from(const probe::PauliDataset &dataset) {
  if (dataset.kind != probe::DatasetKind::Process)
    throw Error("process_data_from: dataset kind is not process");
  if (dataset.records.empty())
    throw Error("process_data_from: empty dataset");
  dataset.validate();
  ProcessData data;
  data.n_qubits = dataset.n_qubits;
  data.configs.reserve(dataset.records.size());
  data.freqs.reserve(dataset.records.size());
  for (size_t r = 0; r < dataset.records.size(); ++r) {
    data.configs.push_back(dataset.records[r].config);
    data.freqs.push_back(dataset.frequencies(static_cast<int>(r)));
  }
  return data;
}

ProcessData process_data_exact(const Superop &map, const DensityMatrix &rho0,
                               const Povm &povm,
                               const std::vector<probe::PauliConfig> &configs) {
  ProcessData data;
  data.n_qubits = static_cast<int>(std::llround(std::log2(double(rho0.dim()))));
  data.configs = configs;
  data.freqs.reserve(configs.size());
  for (const auto &cfg : configs)
    data.freqs.push_back(probe::born_probabilities(map, rho0, povm, cfg));
  return data;
}

opt::AdamConfig MapFitConfig::default_adam() {
  opt::AdamConfig adam;
  adam.step_size = 1e-2;
  adam.max_iters = 20000;
  adam.grad_tolerance = 1e-10;
  adam.patience = 250;
  adam.step_decay = 0.5;
  adam.min_step = 1e-8;
  return adam;
}

namespace {

std::string prep_key(const std::vector<probe::RotationLabel> &prep) {
  std::string key;
  for (auto l : prep)
    key += probe::to_string(l) + ",";
  return key;
}

std::string meas_key(const std::vector<probe::MeasBasis> &meas) {
  std::string key;
  for (auto b : meas)
    key += probe::to_string(b) + ",";
  return key;
}

} // namespace

MapObjective::MapObjective(ProcessData data, const DensityMatrix &rho0,
                           const Povm &povm, int rank)
    : data_(std::move(data)), rank_(rank) {
  if (data_.configs.empty())
    throw Error("MapObjective: empty data");
  d_ = 1 << data_.n_qubits;
  if (rank_ < 1 || rank_ > d_ * d_)
    throw DimensionError("MapObjective: rank must lie in [1, d^2]");
  norm_ = 1.0 / (double(d_) * double(data_.configs.size()));

  std::map<std::string, int> prep_ids;
  std::map<std::string, int> meas_ids;
  prep_index_.reserve(data_.configs.size());
  meas_index_.reserve(data_.configs.size());
  for (const auto &cfg : data_.configs) {
    const std::string pk = prep_key(cfg.prep);
    auto pit = prep_ids.find(pk);
    if (pit == prep_ids.end()) {
      pit = prep_ids.emplace(pk, static_cast<int>(rotated_inputs_.size())).first;
      const CMat r_prep = probe::prep_unitary(cfg.prep);
      rotated_inputs_.push_back(r_prep * rho0.mat * r_prep.adjoint());
    }
    prep_index_.push_back(pit->second);

    const std::string mk = meas_key(cfg.meas);
    auto mit = meas_ids.find(mk);
    if (mit == meas_ids.end()) {
      mit = meas_ids.emplace(mk, static_cast<int>(rotated_povm_.size())).first;
      const CMat r_meas = probe::meas_unitary(cfg.meas);
      std::vector<CMat> rotated(povm.n_outcomes());
      for (int l = 0; l < povm.n_outcomes(); ++l)
        rotated[l] = r_meas.adjoint() * povm.elements[l] * r_meas;
      rotated_povm_.push_back(std::move(rotated));
    }
    meas_index_.push_back(mit->second);
  }
}

double MapObjective::loss(const RVec &theta) const {
  const CMat t = spam::unpack_complex(theta, rank_ * d_, d_);
  const PositiveQr qr = qr_positive(t);

  // Evolved state per unique preparation.
  std::vector<CMat> evolved(rotated_inputs_.size(), CMat::Zero(d_, d_));
  for (int mu = 0; mu < rank_; ++mu) {
    const CMat e = qr.u.block(mu * d_, 0, d_, d_);
    for (size_t p = 0; p < rotated_inputs_.size(); ++p)
      evolved[p] += e * rotated_inputs_[p] * e.adjoint();
  }

  double total = 0.0;
  for (size_t rec = 0; rec < data_.configs.size(); ++rec) {
    const CMat &sigma = evolved[prep_index_[rec]];
    const auto &ms = rotated_povm_[meas_index_[rec]];
    for (int l = 0; l < d_; ++l) {
      const double p = (sigma * ms[l]).trace().real();
      const double r = p - data_.freqs[rec][l];
      total += r * r;
    }
  }
  return norm_ * total;
}

RVec MapObjective::gradient(const RVec &theta) const {
  const CMat t = spam::unpack_complex(theta, rank_ * d_, d_);
  const PositiveQr qr = qr_positive(t);

  const size_t n_preps = rotated_inputs_.size();
  std::vector<CMat> kraus(rank_);
  for (int mu = 0; mu < rank_; ++mu)
    kraus[mu] = qr.u.block(mu * d_, 0, d_, d_);

  // Forward pass caching E_mu rho_p.
  std::vector<std::vector<CMat>> e_rho(rank_, std::vector<CMat>(n_preps));
  std::vector<CMat> evolved(n_preps, CMat::Zero(d_, d_));
  for (int mu = 0; mu < rank_; ++mu)
    for (size_t p = 0; p < n_preps; ++p) {
      e_rho[mu][p] = kraus[mu] * rotated_inputs_[p];
      evolved[p] += e_rho[mu][p] * kraus[mu].adjoint();
    }

  // W_p = sum over records with prep p of sum_l w * M_lj.
  std::vector<CMat> w_per_prep(n_preps, CMat::Zero(d_, d_));
  for (size_t rec = 0; rec < data_.configs.size(); ++rec) {
    const CMat &sigma = evolved[prep_index_[rec]];
    const auto &ms = rotated_povm_[meas_index_[rec]];
    CMat &acc = w_per_prep[prep_index_[rec]];
    for (int l = 0; l < d_; ++l) {
      const double p = (sigma * ms[l]).trace().real();
      const double w = 2.0 * norm_ * (p - data_.freqs[rec][l]);
      acc += w * ms[l];
    }
  }

  CMat grad_u = CMat::Zero(rank_ * d_, d_);
  for (int mu = 0; mu < rank_; ++mu) {
    CMat g = CMat::Zero(d_, d_);
    for (size_t p = 0; p < n_preps; ++p)
      g += w_per_prep[p] * e_rho[mu][p];
    grad_u.block(mu * d_, 0, d_, d_) = g;
  }

  const CMat grad_theta = qr_positive_pullback(qr, grad_u);
  return 2.0 * spam::pack_complex(grad_theta);
}

namespace {

CMat identity_channel_theta(int rank, int d) {
  CMat t = CMat::Zero(rank * d, d);
  t.topRows(d) = CMat::Identity(d, d);
  return t;
}

} // namespace

MapEstimate fit_map(const ProcessData &data, const spam::SpamEstimate &spam_est,
                    const MapFitConfig &config) {
  const int d = 1 << data.n_qubits;
  const int rank = (config.rank == 0) ? d * d : config.rank;
  if (rank < 1 || rank > d * d)
    throw DimensionError("fit_map: rank must lie in [1, d^2]");
  if (spam_est.rho0.dim() != d)
    throw DimensionError("fit_map: SPAM dimension mismatch");

  MapObjective objective(data, spam_est.rho0, spam_est.povm, rank);
  opt::LossFn loss = [&](const RVec &t) { return objective.loss(t); };
  opt::GradFn grad;
  if (config.gradient == spam::GradientMode::Analytic)
    grad = [&](const RVec &t) { return objective.gradient(t); };
  else
    grad = [&](const RVec &t) { return opt::numerical_gradient(loss, t); };

  MapEstimate best;
  bool have_best = false;
  for (int restart = 0; restart < std::max(1, config.restarts); ++restart) {
    Rng rng(Rng::derive_seed(config.seed, 0x9a30u + restart));
    CMat theta0_mat = identity_channel_theta(rank, d);
    for (Eigen::Index i = 0; i < theta0_mat.rows(); ++i)
      for (Eigen::Index j = 0; j < theta0_mat.cols(); ++j)
        theta0_mat(i, j) += config.init_jitter * Cplx(rng.normal(), rng.normal());
    const RVec theta0 = spam::pack_complex(theta0_mat);

    const double init_loss = objective.loss(theta0);
    opt::AdamResult result = opt::adam_minimize(loss, grad, theta0, config.adam);
    const double final_loss = objective.loss(result.theta);

    if (!have_best || final_loss < best.loss) {
      const CMat theta_star = spam::unpack_complex(result.theta, rank * d, d);
      best.kraus = kraus_param(theta_star);
      best.superop = kraus_to_superoperator(best.kraus);
      best.loss = final_loss;
      best.init_loss = init_loss;
      best.trace = std::move(result.trace);
      best.theta = theta_star;
      have_best = true;
    }
  }
  return best;
}

MapEstimate fit_map(const probe::PauliDataset &dataset,
                    const spam::SpamEstimate &spam_est,
                    const MapFitConfig &config) {
  return fit_map(process_data_from(dataset), spam_est, config);
}

std::vector<std::vector<double>>
predicted_process_table(const Superop &map, const spam::SpamEstimate &spam_est,
                        const std::vector<probe::PauliConfig> &configs) {
  std::vector<std::vector<double>> table;
  table.reserve(configs.size());
  for (const auto &cfg : configs)
    table.push_back(
        probe::born_probabilities(map, spam_est.rho0, spam_est.povm, cfg));
  return table;
}

} // namespace qlt::process
