#include "qlt/spam.hpp"

#include <cmath>

#include "qlt/process.hpp"
#include "qlt/rng.hpp"

namespace qlt::spam {

DensityMatrix rho_param(const CMat &theta1) {
  if (theta1.rows() != theta1.cols())
    throw DimensionError("rho_param: parameter matrix must be square");
  const CMat s = theta1 * theta1.adjoint();
  const double trace = s.trace().real();
  if (trace < 1e-300)
    throw NumericalError("rho_param: zero parameter matrix");
  return DensityMatrix{s / trace};
}

Povm povm_param(const CMat &theta2) {
  const Eigen::Index d = theta2.cols();
  if (theta2.rows() != d * d)
    throw DimensionError("povm_param: parameter must be d^2 x d");
  const process::KrausMap kraus = process::kraus_param(theta2);
  std::vector<CMat> elements;
  elements.reserve(kraus.ops.size());
  for (const auto &e : kraus.ops)
    elements.push_back(e.adjoint() * e);
  return Povm{std::move(elements)};
}

RVec pack_complex(const CMat &m) {
  RVec v(2 * m.rows() * m.cols());
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      v(k++) = m(i, j).real();
      v(k++) = m(i, j).imag();
    }
  return v;
}

CMat unpack_complex(const RVec &v, int rows, int cols) {
  if (v.size() != 2 * static_cast<Eigen::Index>(rows) * cols)
    throw DimensionError("unpack_complex: size mismatch");
  CMat m(rows, cols);
  Eigen::Index k = 0;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      m(i, j) = Cplx(v(k), v(k + 1));
      k += 2;
    }
  return m;
}

SpamData spam_data_from(const probe::PauliDataset &dataset) {
  if (dataset.kind != probe::DatasetKind::Spam)
    throw Error("spam_data_from: dataset kind is not spam");
  if (dataset.records.empty())
    throw Error("spam_data_from: empty dataset");
  dataset.validate();
  SpamData data;
  data.n_qubits = dataset.n_qubits;
  data.configs.reserve(dataset.records.size());
  data.freqs.reserve(dataset.records.size());
  for (size_t r = 0; r < dataset.records.size(); ++r) {
    data.configs.push_back(dataset.records[r].config);
    data.freqs.push_back(dataset.frequencies(static_cast<int>(r)));
  }
  return data;
}

SpamData spam_data_exact(const DensityMatrix &rho0, const Povm &povm,
                         const std::vector<probe::PauliConfig> &configs) {
  SpamData data;
  data.n_qubits = static_cast<int>(std::llround(std::log2(double(rho0.dim()))));
  data.configs = configs;
  data.freqs.reserve(configs.size());
  for (const auto &cfg : configs)
    data.freqs.push_back(probe::spam_probabilities(rho0, povm, cfg.prep));
  return data;
}

opt::AdamConfig SpamFitConfig::default_adam() {
  opt::AdamConfig adam;
  adam.step_size = 1e-2;
  adam.max_iters = 20000;
  adam.grad_tolerance = 1e-10;
  adam.patience = 250;
  adam.step_decay = 0.5;
  adam.min_step = 1e-8;
  return adam;
}

SpamObjective::SpamObjective(SpamData data) : data_(std::move(data)) {
  if (data_.configs.empty())
    throw Error("SpamObjective: empty data");
  d_ = 1 << data_.n_qubits;
  norm_ = 1.0 / (double(d_) * double(data_.configs.size()));
  prep_unitaries_.reserve(data_.configs.size());
  for (const auto &cfg : data_.configs)
    prep_unitaries_.push_back(probe::prep_unitary(cfg.prep));
}

RVec SpamObjective::pack(const CMat &theta1, const CMat &theta2) const {
  RVec a = pack_complex(theta1);
  RVec b = pack_complex(theta2);
  RVec out(a.size() + b.size());
  out << a, b;
  return out;
}

void SpamObjective::unpack(const RVec &theta, CMat &theta1, CMat &theta2) const {
  const Eigen::Index n1 = 2 * d_ * d_;
  theta1 = unpack_complex(theta.head(n1), d_, d_);
  theta2 = unpack_complex(theta.tail(theta.size() - n1), d_ * d_, d_);
}

double SpamObjective::loss(const RVec &theta) const {
  CMat theta1, theta2;
  unpack(theta, theta1, theta2);
  const CMat s = theta1 * theta1.adjoint();
  const double trace = s.trace().real();
  if (trace < 1e-300)
    return std::numeric_limits<double>::infinity();
  const CMat rho = s / trace;
  const process::PositiveQr qr = process::qr_positive(theta2);

  double total = 0.0;
  for (size_t i = 0; i < data_.configs.size(); ++i) {
    const CMat &r_prep = prep_unitaries_[i];
    const CMat rho_i = r_prep * rho * r_prep.adjoint();
    for (int l = 0; l < d_; ++l) {
      const CMat e = qr.u.block(l * d_, 0, d_, d_);
      const double p = (rho_i * (e.adjoint() * e)).trace().real();
      const double r = p - data_.freqs[i][l];
      total += r * r;
    }
  }
  return norm_ * total;
}

RVec SpamObjective::gradient(const RVec &theta) const {
  CMat theta1, theta2;
  unpack(theta, theta1, theta2);
  const CMat s = theta1 * theta1.adjoint();
  const double trace = s.trace().real();
  if (trace < 1e-300)
    throw NumericalError("SpamObjective: zero rho parameter");
  const CMat rho = s / trace;
  const process::PositiveQr qr = process::qr_positive(theta2);

  std::vector<CMat> povm_elems(d_);
  std::vector<CMat> kraus(d_);
  for (int l = 0; l < d_; ++l) {
    kraus[l] = qr.u.block(l * d_, 0, d_, d_);
    povm_elems[l] = kraus[l].adjoint() * kraus[l];
  }

  CMat rho_acc = CMat::Zero(d_, d_);               // d loss / d rho pullback
  std::vector<CMat> povm_acc(d_, CMat::Zero(d_, d_)); // B_l = sum_i w_il rho_i
  for (size_t i = 0; i < data_.configs.size(); ++i) {
    const CMat &r_prep = prep_unitaries_[i];
    const CMat rho_i = r_prep * rho * r_prep.adjoint();
    CMat inner = CMat::Zero(d_, d_);
    for (int l = 0; l < d_; ++l) {
      const double p = (rho_i * povm_elems[l]).trace().real();
      const double w = 2.0 * norm_ * (p - data_.freqs[i][l]);
      inner += w * (povm_elems[l] - p * CMat::Identity(d_, d_));
      povm_acc[l] += w * rho_i;
    }
    rho_acc += r_prep.adjoint() * inner * r_prep;
  }

  const CMat grad_theta1 = (rho_acc * theta1) / trace;

  CMat grad_u = CMat::Zero(d_ * d_, d_);
  for (int l = 0; l < d_; ++l)
    grad_u.block(l * d_, 0, d_, d_) = kraus[l] * povm_acc[l];
  const CMat grad_theta2 = process::qr_positive_pullback(qr, grad_u);

  RVec g(theta.size());
  g << 2.0 * pack_complex(grad_theta1), 2.0 * pack_complex(grad_theta2);
  return g;
}

namespace {

CMat ideal_theta1(int d) {
  CMat t = CMat::Zero(d, d);
  t(0, 0) = 1.0;
  return t;
}

CMat ideal_theta2(int d) {
  CMat t = CMat::Zero(d * d, d);
  for (int l = 0; l < d; ++l)
    t(l * d + l, l) = 1.0;
  return t;
}

CMat jittered(const CMat &m, double scale, Rng &rng) {
  CMat out = m;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      out(i, j) += scale * Cplx(rng.normal(), rng.normal());
  return out;
}

} // namespace

SpamEstimate fit_spam(const SpamData &data, const SpamFitConfig &config) {
  SpamObjective objective(data);
  const int d = objective.dim();

  opt::LossFn loss = [&](const RVec &t) { return objective.loss(t); };
  opt::GradFn grad;
  if (config.gradient == GradientMode::Analytic)
    grad = [&](const RVec &t) { return objective.gradient(t); };
  else
    grad = [&](const RVec &t) { return opt::numerical_gradient(loss, t); };

  SpamEstimate best;
  bool have_best = false;
  for (int restart = 0; restart < std::max(1, config.restarts); ++restart) {
    Rng rng(Rng::derive_seed(config.seed, 0x5a50u + restart));
    const CMat t1 = jittered(ideal_theta1(d), config.init_jitter, rng);
    const CMat t2 = jittered(ideal_theta2(d), config.init_jitter, rng);
    const RVec theta0 = objective.pack(t1, t2);

    const double init_loss = objective.loss(theta0);
    opt::AdamResult result = opt::adam_minimize(loss, grad, theta0, config.adam);
    const double final_loss = objective.loss(result.theta);

    if (!have_best || final_loss < best.loss) {
      CMat theta1, theta2;
      objective.unpack(result.theta, theta1, theta2);
      best.rho0 = rho_param(theta1);
      best.povm = make_povm(povm_param(theta2).elements);
      best.loss = final_loss;
      best.init_loss = init_loss;
      best.trace = std::move(result.trace);
      best.theta1 = theta1;
      best.theta2 = theta2;
      have_best = true;
    }
  }
  return best;
}

SpamEstimate fit_spam(const probe::PauliDataset &dataset,
                      const SpamFitConfig &config) {
  return fit_spam(spam_data_from(dataset), config);
}

std::vector<std::vector<double>>
predicted_spam_table(const SpamEstimate &est,
                     const std::vector<probe::PauliConfig> &configs) {
  std::vector<std::vector<double>> table;
  table.reserve(configs.size());
  for (const auto &cfg : configs)
    table.push_back(probe::spam_probabilities(est.rho0, est.povm, cfg.prep));
  return table;
}

} // namespace qlt::spam
