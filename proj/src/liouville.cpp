#include "qlt/liouville.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace qlt::liou {

namespace {

// Real flattening [Re(vec); Im(vec)] of a superoperator, used to express the
// generator parameterization as a real linear system.
RVec superop_to_real(const Superop &s) {
  const Eigen::Index n = s.size();
  RVec v(2 * n);
  const Cplx *data = s.data();
  for (Eigen::Index k = 0; k < n; ++k) {
    v(k) = data[k].real();
    v(n + k) = data[k].imag();
  }
  return v;
}

struct SplitCache {
  RMat design; // columns: h basis then gamma basis (diag, sym, asym)
  Eigen::CompleteOrthogonalDecomposition<RMat> cod;
};

std::map<int, GeneratorBasis> g_basis_cache;
std::map<int, SplitCache> g_split_cache;
std::mutex g_cache_mutex;

int pair_count(int n_traceless) { return n_traceless * (n_traceless - 1) / 2; }

// x layout: [h (n_t) | diag a (n_t) | sym b (P) | asym c (P)], pairs (mu<nu)
// in row-major order.
int x_size(int n_traceless) { return 2 * n_traceless + 2 * pair_count(n_traceless); }

CMat gamma_from_coeffs(const RVec &x, int n_t) {
  CMat gamma = CMat::Zero(n_t, n_t);
  int idx = n_t; // skip h block
  for (int mu = 0; mu < n_t; ++mu)
    gamma(mu, mu) = x(idx++);
  int sym = idx;
  int asym = idx + pair_count(n_t);
  for (int mu = 0; mu < n_t; ++mu)
    for (int nu = mu + 1; nu < n_t; ++nu) {
      const double b = x(sym++);
      const double c = x(asym++);
      gamma(mu, nu) = Cplx(b, c);
      gamma(nu, mu) = Cplx(b, -c);
    }
  return gamma;
}

RVec coeffs_from_h_gamma(const RVec &h, const CMat &gamma) {
  const int n_t = static_cast<int>(h.size());
  RVec x(x_size(n_t));
  x.head(n_t) = h;
  int idx = n_t;
  for (int mu = 0; mu < n_t; ++mu)
    x(idx++) = gamma(mu, mu).real();
  int sym = idx;
  int asym = idx + pair_count(n_t);
  for (int mu = 0; mu < n_t; ++mu)
    for (int nu = mu + 1; nu < n_t; ++nu) {
      x(sym++) = gamma(mu, nu).real();
      x(asym++) = gamma(mu, nu).imag();
    }
  return x;
}

} // namespace

const GeneratorBasis &generator_basis(int n_qubits) {
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  auto it = g_basis_cache.find(n_qubits);
  if (it != g_basis_cache.end())
    return it->second;

  GeneratorBasis gb;
  gb.basis = pauli_basis(n_qubits);
  const int d = gb.basis.dim();
  const int n_t = d * d - 1;
  gb.n_traceless = n_t;

  const CMat id = CMat::Identity(d, d);
  gb.ham_ops.reserve(n_t);
  const Cplx im(0.0, 1.0);
  for (int mu = 1; mu <= n_t; ++mu) {
    const CMat &g = gb.basis.elements[mu];
    gb.ham_ops.push_back(-im * (kron(g, id) - kron(id, g.transpose())));
  }

  gb.diss_ops.reserve(static_cast<size_t>(n_t) * n_t);
  gb.pair_products.reserve(static_cast<size_t>(n_t) * n_t);
  for (int mu = 1; mu <= n_t; ++mu)
    for (int nu = 1; nu <= n_t; ++nu) {
      const CMat &gm = gb.basis.elements[mu];
      const CMat &gn = gb.basis.elements[nu];
      const CMat prod = gn.adjoint() * gm; // G_nu^dag G_mu
      Superop op = kron(gm, gn.conjugate()) -
                   0.5 * (kron(prod, id) + kron(id, prod.transpose()));
      gb.pair_products.push_back(prod);
      gb.diss_ops.push_back(std::move(op));
    }

  return g_basis_cache.emplace(n_qubits, std::move(gb)).first->second;
}

Superop liouvillian_superoperator(const LiouvillianParams &params,
                                  const PauliBasis &basis) {
  const GeneratorBasis &gb = generator_basis(basis.n_qubits);
  const int n_t = gb.n_traceless;
  if (params.h.size() != n_t || params.k.rows() != n_t || params.k.cols() != n_t)
    throw DimensionError("liouvillian_superoperator: parameter size mismatch");

  const int d = basis.dim();
  Superop l = Superop::Zero(static_cast<Eigen::Index>(d) * d,
                            static_cast<Eigen::Index>(d) * d);
  for (int mu = 0; mu < n_t; ++mu)
    if (params.h(mu) != 0.0)
      l += params.h(mu) * gb.ham_ops[mu];
  const CMat gamma = params.gamma();
  for (int mu = 0; mu < n_t; ++mu)
    for (int nu = 0; nu < n_t; ++nu) {
      const Cplx g = gamma(mu, nu);
      if (g != Cplx(0.0, 0.0))
        l += g * gb.diss(mu, nu);
    }
  return l;
}

namespace {

const SplitCache &split_cache(int n_qubits) {
  {
    std::lock_guard<std::mutex> lock(g_cache_mutex);
    auto it = g_split_cache.find(n_qubits);
    if (it != g_split_cache.end())
      return it->second;
  }
  const GeneratorBasis &gb = generator_basis(n_qubits);
  const int n_t = gb.n_traceless;
  const int cols = x_size(n_t);
  const Eigen::Index rows = 2 * gb.ham_ops[0].size();

  SplitCache cache;
  cache.design.resize(rows, cols);
  int col = 0;
  for (int mu = 0; mu < n_t; ++mu)
    cache.design.col(col++) = superop_to_real(gb.ham_ops[mu]);
  for (int mu = 0; mu < n_t; ++mu)
    cache.design.col(col++) = superop_to_real(gb.diss(mu, mu));
  for (int mu = 0; mu < n_t; ++mu)
    for (int nu = mu + 1; nu < n_t; ++nu)
      cache.design.col(col++) =
          superop_to_real(gb.diss(mu, nu) + gb.diss(nu, mu));
  const Cplx im(0.0, 1.0);
  for (int mu = 0; mu < n_t; ++mu)
    for (int nu = mu + 1; nu < n_t; ++nu)
      cache.design.col(col++) =
          superop_to_real(im * (gb.diss(mu, nu) - gb.diss(nu, mu)));
  cache.cod.compute(cache.design);

  std::lock_guard<std::mutex> lock(g_cache_mutex);
  return g_split_cache.emplace(n_qubits, std::move(cache)).first->second;
}

} // namespace

std::pair<RVec, CMat> canonical_split(const Superop &l,
                                      const PauliBasis &basis) {
  const GeneratorBasis &gb = generator_basis(basis.n_qubits);
  const int n_t = gb.n_traceless;
  const int d = basis.dim();
  if (l.rows() != static_cast<Eigen::Index>(d) * d || l.cols() != l.rows())
    throw DimensionError("canonical_split: dimension mismatch");

  const SplitCache &cache = split_cache(basis.n_qubits);
  const RVec target = superop_to_real(l);
  const RVec x = cache.cod.solve(target);

  const RVec h = x.head(n_t);
  const CMat gamma = gamma_from_coeffs(x, n_t);

  LiouvillianParams params{h, gamma / 2.0};
  const Superop rebuilt = liouvillian_superoperator(params, basis);
  const double residual = (rebuilt - l).cwiseAbs().maxCoeff();
  if (residual > 1e-6)
    throw ModelViolationError(
        "canonical_split: input is not of Lindblad-like form (residual " +
        std::to_string(residual) + ")");
  return {h, gamma};
}

CanonicalLiouvillian canonical_decomposition_gamma(const CMat &gamma,
                                                   const RVec &h,
                                                   const PauliBasis &basis) {
  const int n_t = basis.size() - 1;
  if (gamma.rows() != n_t || gamma.cols() != n_t || h.size() != n_t)
    throw DimensionError("canonical_decomposition: size mismatch");
  if (hermiticity_error(gamma) > 1e-9)
    throw ModelViolationError("canonical_decomposition: gamma not Hermitian");

  const int d = basis.dim();
  CanonicalLiouvillian out;
  out.h = h;
  out.hamiltonian = CMat::Zero(d, d);
  for (int mu = 0; mu < n_t; ++mu)
    out.hamiltonian += h(mu) * basis.elements[mu + 1];

  HermitianEig eig = hermitian_eig(gamma);
  out.rates.resize(n_t);
  out.jump_coeffs.resize(n_t, n_t);
  out.jumps.reserve(n_t);
  for (int r = 0; r < n_t; ++r) {
    const int src = n_t - 1 - r; // descending rates
    out.rates(r) = eig.values(src);
    CVec vec = eig.vectors.col(src);
    // Phase convention: largest-magnitude component real positive.
    Eigen::Index top = 0;
    vec.cwiseAbs().maxCoeff(&top);
    const double mag = std::abs(vec(top));
    if (mag > 1e-14)
      vec *= std::conj(vec(top)) / mag;
    out.jump_coeffs.row(r) = vec.transpose();
    CMat jump = CMat::Zero(d, d);
    for (int delta = 0; delta < n_t; ++delta)
      jump += vec(delta) * basis.elements[delta + 1];
    out.jumps.push_back(std::move(jump));
  }
  for (int r = 0; r + 1 < n_t; ++r)
    if (std::abs(out.rates(r) - out.rates(r + 1)) < 1e-8)
      out.degenerate = true;
  return out;
}

CanonicalLiouvillian canonical_decomposition(const LiouvillianParams &params,
                                             const PauliBasis &basis) {
  return canonical_decomposition_gamma(params.gamma(), params.h, basis);
}

std::string witness_to_string(Witness w) {
  switch (w) {
  case Witness::MarkovianConsistent:
    return "markovian_consistent";
  case Witness::NonMarkovian:
    return "non_markovian";
  case Witness::Inconclusive:
    return "inconclusive";
  }
  return "unknown";
}

Witness markovianity_witness(const RVec &rates, const RVec &rate_errors,
                             double tolerance) {
  if (rates.size() != rate_errors.size())
    throw DimensionError("markovianity_witness: length mismatch");
  bool non_markovian = false;
  bool consistent = true;
  for (Eigen::Index k = 0; k < rates.size(); ++k) {
    if (rates(k) + rate_errors(k) < 0.0)
      non_markovian = true;
    if (rates(k) - rate_errors(k) <= -tolerance)
      consistent = false;
  }
  if (non_markovian)
    return Witness::NonMarkovian;
  return consistent ? Witness::MarkovianConsistent : Witness::Inconclusive;
}

//=============================================================================
// Derivatives
//=============================================================================

std::string scheme_to_string(Scheme s) {
  return s == Scheme::Central ? "central" : "forward";
}

Scheme scheme_from_string(const std::string &s) {
  if (s == "central")
    return Scheme::Central;
  if (s == "forward")
    return Scheme::Forward;
  throw Error("unknown derivative scheme: " + s);
}

namespace {

void check_matching(const probe::PauliDataset &a, const probe::PauliDataset &b) {
  if (a.n_qubits != b.n_qubits)
    throw DimensionError("estimate_derivatives: qubit count mismatch");
  if (a.shots != b.shots)
    throw DimensionError("estimate_derivatives: shot count mismatch");
  if (a.records.size() != b.records.size())
    throw DimensionError("estimate_derivatives: config sets differ in size");
  for (size_t r = 0; r < a.records.size(); ++r)
    if (!(a.records[r].config == b.records[r].config))
      throw DimensionError("estimate_derivatives: config mismatch at record " +
                           std::to_string(r));
}

} // namespace

DerivativeTable estimate_derivatives(std::vector<probe::PauliDataset> datasets,
                                     Scheme scheme) {
  const size_t expected = (scheme == Scheme::Central) ? 3 : 2;
  if (datasets.size() != expected)
    throw DimensionError("estimate_derivatives: need " +
                         std::to_string(expected) + " datasets");
  std::sort(datasets.begin(), datasets.end(),
            [](const auto &a, const auto &b) { return a.time_tag < b.time_tag; });
  for (size_t k = 1; k < datasets.size(); ++k)
    check_matching(datasets[0], datasets[k]);

  DerivativeTable table;
  table.n_qubits = datasets[0].n_qubits;
  table.scheme = scheme;
  table.shots = datasets[0].shots;
  for (const auto &ds : datasets)
    table.source_times.push_back(ds.time_tag);
  for (const auto &rec : datasets[0].records)
    table.configs.push_back(rec.config);

  if (scheme == Scheme::Central) {
    const double lo = datasets[1].time_tag - datasets[0].time_tag;
    const double hi = datasets[2].time_tag - datasets[1].time_tag;
    if (lo <= 0.0 || hi <= 0.0)
      throw DimensionError("estimate_derivatives: dt must be positive");
    if (std::abs(lo - hi) > 1e-9 * std::max(1.0, std::abs(lo)))
      throw DimensionError("estimate_derivatives: non-uniform time spacing "
                           "for the central scheme");
    table.dt = lo;
    table.time = datasets[1].time_tag;
    for (size_t r = 0; r < datasets[0].records.size(); ++r) {
      const auto plus = datasets[2].frequencies(static_cast<int>(r));
      const auto minus = datasets[0].frequencies(static_cast<int>(r));
      std::vector<double> row(plus.size());
      for (size_t l = 0; l < plus.size(); ++l)
        row[l] = (plus[l] - minus[l]) / (2.0 * table.dt);
      table.dpdt.push_back(std::move(row));
    }
  } else {
    const double dt = datasets[1].time_tag - datasets[0].time_tag;
    if (dt <= 0.0)
      throw DimensionError("estimate_derivatives: dt must be positive");
    table.dt = dt;
    table.time = datasets[0].time_tag;
    for (size_t r = 0; r < datasets[0].records.size(); ++r) {
      const auto next = datasets[1].frequencies(static_cast<int>(r));
      const auto now = datasets[0].frequencies(static_cast<int>(r));
      std::vector<double> row(next.size());
      for (size_t l = 0; l < next.size(); ++l)
        row[l] = (next[l] - now[l]) / dt;
      table.dpdt.push_back(std::move(row));
    }
  }
  return table;
}

DerivativeTable derivatives_from_tables(
    const std::vector<probe::PauliConfig> &configs,
    const std::vector<std::vector<std::vector<double>>> &tables,
    const std::vector<double> &times, Scheme scheme, long long shots) {
  const size_t expected = (scheme == Scheme::Central) ? 3 : 2;
  if (tables.size() != expected || times.size() != expected)
    throw DimensionError("derivatives_from_tables: need " +
                         std::to_string(expected) + " tables");
  DerivativeTable table;
  table.configs = configs;
  table.n_qubits = static_cast<int>(configs.empty() ? 0 : configs[0].prep.size());
  table.scheme = scheme;
  table.shots = shots;
  table.source_times = times;
  if (scheme == Scheme::Central) {
    table.dt = times[1] - times[0];
    table.time = times[1];
    for (size_t r = 0; r < configs.size(); ++r) {
      std::vector<double> row(tables[0][r].size());
      for (size_t l = 0; l < row.size(); ++l)
        row[l] = (tables[2][r][l] - tables[0][r][l]) / (2.0 * table.dt);
      table.dpdt.push_back(std::move(row));
    }
  } else {
    table.dt = times[1] - times[0];
    table.time = times[0];
    for (size_t r = 0; r < configs.size(); ++r) {
      std::vector<double> row(tables[0][r].size());
      for (size_t l = 0; l < row.size(); ++l)
        row[l] = (tables[1][r][l] - tables[0][r][l]) / table.dt;
      table.dpdt.push_back(std::move(row));
    }
  }
  return table;
}

DtAdequacy dt_adequacy(const std::vector<probe::PauliDataset> &datasets,
                       long long n_shots) {
  if (datasets.size() != 2 && datasets.size() != 3)
    throw DimensionError("dt_adequacy: need two or three datasets");
  std::vector<probe::PauliDataset> sorted = datasets;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto &a, const auto &b) { return a.time_tag < b.time_tag; });
  for (size_t k = 1; k < sorted.size(); ++k)
    check_matching(sorted[0], sorted[k]);

  const auto &first = sorted.front();
  const auto &last = sorted.back();
  double acc = 0.0;
  long long count = 0;
  for (size_t r = 0; r < first.records.size(); ++r) {
    const auto f0 = first.frequencies(static_cast<int>(r));
    const auto f1 = last.frequencies(static_cast<int>(r));
    for (size_t l = 0; l < f0.size(); ++l) {
      acc += std::abs(f1[l] - f0[l]);
      ++count;
    }
  }
  DtAdequacy report;
  report.mean_abs_diff = (count > 0) ? acc / double(count) : 0.0;
  report.shot_noise_floor = 1.0 / std::sqrt(double(n_shots));
  report.adequate = report.mean_abs_diff > report.shot_noise_floor;
  return report;
}

//=============================================================================
// Regression
//=============================================================================

opt::AdamConfig LiouvillianFitConfig::default_adam() {
  opt::AdamConfig adam;
  adam.step_size = 1e-2;
  adam.max_iters = 200000;
  adam.grad_tolerance = 1e-13;
  adam.patience = 200;
  adam.step_decay = 0.5;
  adam.min_step = 1e-10;
  return adam;
}

RVec LiouvillianDesign::pack(const LiouvillianParams &params) const {
  return coeffs_from_h_gamma(params.h, params.gamma());
}

LiouvillianParams LiouvillianDesign::unpack(const RVec &x) const {
  LiouvillianParams params;
  params.h = x.head(n_traceless);
  params.k = gamma_from_coeffs(x, n_traceless) / 2.0;
  return params;
}

double LiouvillianDesign::loss(const RVec &x) const {
  return norm * (design * x - target).squaredNorm();
}

LiouvillianDesign build_liouvillian_design(const DerivativeTable &derivs,
                                           const Superop &map_superop,
                                           const DensityMatrix &rho0,
                                           const Povm &povm) {
  if (derivs.configs.empty())
    throw Error("build_liouvillian_design: empty derivative table");
  const GeneratorBasis &gb = generator_basis(derivs.n_qubits);
  const int n_t = gb.n_traceless;
  const int d = gb.basis.dim();
  if (rho0.dim() != d || povm.dim() != d ||
      map_superop.rows() != static_cast<Eigen::Index>(d) * d)
    throw DimensionError("build_liouvillian_design: dimension mismatch");

  const size_t n_records = derivs.configs.size();
  const int n_outcomes = povm.n_outcomes();

  // Unique rotated inputs and measurement operators.
  std::map<std::string, int> prep_ids, meas_ids;
  std::vector<CMat> sigmas;                 // Lambda(rho_i)
  std::vector<std::vector<CMat>> meas_ops;  // per meas string, per outcome
  std::vector<int> prep_of(n_records), meas_of(n_records);
  for (size_t rec = 0; rec < n_records; ++rec) {
    const auto &cfg = derivs.configs[rec];
    std::string pk, mk;
    for (auto lbl : cfg.prep)
      pk += probe::to_string(lbl) + ",";
    for (auto b : cfg.meas)
      mk += probe::to_string(b) + ",";
    auto pit = prep_ids.find(pk);
    if (pit == prep_ids.end()) {
      pit = prep_ids.emplace(pk, static_cast<int>(sigmas.size())).first;
      const CMat r_prep = probe::prep_unitary(cfg.prep);
      const CMat rho_i = r_prep * rho0.mat * r_prep.adjoint();
      sigmas.push_back(apply_superop(map_superop, rho_i));
    }
    prep_of[rec] = pit->second;
    auto mit = meas_ids.find(mk);
    if (mit == meas_ids.end()) {
      mit = meas_ids.emplace(mk, static_cast<int>(meas_ops.size())).first;
      const CMat r_meas = probe::meas_unitary(cfg.meas);
      std::vector<CMat> rotated(n_outcomes);
      for (int l = 0; l < n_outcomes; ++l)
        rotated[l] = r_meas.adjoint() * povm.elements[l] * r_meas;
      meas_ops.push_back(std::move(rotated));
    }
    meas_of[rec] = mit->second;
  }

  const int cols = x_size(n_t);
  const int pair_cols = pair_count(n_t);
  LiouvillianDesign out;
  out.n_traceless = n_t;
  out.norm = 1.0 / (double(n_outcomes) * double(n_records));
  out.design.resize(static_cast<Eigen::Index>(n_records) * n_outcomes, cols);
  out.target.resize(static_cast<Eigen::Index>(n_records) * n_outcomes);

  const Cplx im(0.0, 1.0);
  std::vector<CMat> actions(cols, CMat(d, d));
  std::vector<CMat> left(n_t);  // G_mu sigma
  std::vector<CMat> right(n_t); // sigma G_mu
  for (size_t rec = 0; rec < n_records; ++rec) {
    const CMat &sigma = sigmas[prep_of[rec]];
    for (int mu = 0; mu < n_t; ++mu) {
      left[mu] = gb.basis.elements[mu + 1] * sigma;
      right[mu] = sigma * gb.basis.elements[mu + 1];
    }
    for (int mu = 0; mu < n_t; ++mu)
      actions[mu] = -im * (left[mu] - right[mu]);

    // Dissipator actions D_{mu nu}(sigma); assembled in the x layout.
    int diag_base = n_t, sym_base = 2 * n_t, asym_base = 2 * n_t + pair_cols;
    int pair = 0;
    for (int mu = 0; mu < n_t; ++mu) {
      const CMat &g_mu = gb.basis.elements[mu + 1];
      for (int nu = mu; nu < n_t; ++nu) {
        const CMat &g_nu = gb.basis.elements[nu + 1];
        const CMat &p_mn = gb.pair_products[static_cast<size_t>(mu) * n_t + nu];
        const CMat d_mn =
            left[mu] * g_nu - 0.5 * (p_mn * sigma + sigma * p_mn);
        if (nu == mu) {
          actions[diag_base + mu] = d_mn;
        } else {
          const CMat &p_nm = gb.pair_products[static_cast<size_t>(nu) * n_t + mu];
          const CMat d_nm =
              left[nu] * g_mu - 0.5 * (p_nm * sigma + sigma * p_nm);
          actions[sym_base + pair] = d_mn + d_nm;
          actions[asym_base + pair] = im * (d_mn - d_nm);
          ++pair;
        }
      }
    }

    const auto &ms = meas_ops[meas_of[rec]];
    for (int l = 0; l < n_outcomes; ++l) {
      const Eigen::Index row = static_cast<Eigen::Index>(rec) * n_outcomes + l;
      out.target(row) = derivs.dpdt[rec][l];
      for (int col = 0; col < cols; ++col)
        out.design(row, col) = (ms[l] * actions[col]).trace().real();
    }
  }
  return out;
}

namespace {

// Gradient pullback from x = [h; a; b; c] coordinates to (h, Re K, Im K).
RVec x_grad_to_theta(const RVec &gx, int n_t) {
  const int pairs = pair_count(n_t);
  RVec gt(n_t + 2 * n_t * n_t);
  gt.head(n_t) = gx.head(n_t);
  // Re K block (row-major), then Im K block.
  auto re_index = [&](int mu, int nu) { return n_t + mu * n_t + nu; };
  auto im_index = [&](int mu, int nu) { return n_t + n_t * n_t + mu * n_t + nu; };
  gt.tail(2 * n_t * n_t).setZero();
  for (int mu = 0; mu < n_t; ++mu)
    gt(re_index(mu, mu)) = 2.0 * gx(n_t + mu); // a_mu = 2 Re K_mumu
  int pair = 0;
  for (int mu = 0; mu < n_t; ++mu)
    for (int nu = mu + 1; nu < n_t; ++nu) {
      const double gb_ = gx(2 * n_t + pair);
      const double gc = gx(2 * n_t + pairs + pair);
      gt(re_index(mu, nu)) += gb_; // b = Re K_munu + Re K_numu
      gt(re_index(nu, mu)) += gb_;
      gt(im_index(mu, nu)) += gc; // c = Im K_munu - Im K_numu
      gt(im_index(nu, mu)) -= gc;
      ++pair;
    }
  return gt;
}

RVec theta_to_x(const RVec &theta, int n_t) {
  RVec h = theta.head(n_t);
  CMat k(n_t, n_t);
  for (int mu = 0; mu < n_t; ++mu)
    for (int nu = 0; nu < n_t; ++nu)
      k(mu, nu) = Cplx(theta(n_t + mu * n_t + nu),
                       theta(n_t + n_t * n_t + mu * n_t + nu));
  return coeffs_from_h_gamma(h, k + k.adjoint());
}

LiouvillianParams theta_to_params(const RVec &theta, int n_t) {
  LiouvillianParams params;
  params.h = theta.head(n_t);
  params.k.resize(n_t, n_t);
  for (int mu = 0; mu < n_t; ++mu)
    for (int nu = 0; nu < n_t; ++nu)
      params.k(mu, nu) = Cplx(theta(n_t + mu * n_t + nu),
                              theta(n_t + n_t * n_t + mu * n_t + nu));
  return params;
}

} // namespace

LiouvillianEstimate fit_liouvillian(const DerivativeTable &derivs,
                                    const Superop &map_superop,
                                    const DensityMatrix &rho0, const Povm &povm,
                                    const LiouvillianFitConfig &config) {
  const LiouvillianDesign design =
      build_liouvillian_design(derivs, map_superop, rho0, povm);
  const int n_t = design.n_traceless;
  const GeneratorBasis &gb = generator_basis(derivs.n_qubits);

  LiouvillianEstimate est;
  if (config.method == FitMethod::LeastSquares) {
    Eigen::CompleteOrthogonalDecomposition<RMat> cod(design.design);
    const RVec x = cod.solve(design.target);
    est.design_rank = static_cast<int>(cod.rank());
    est.nullspace_dim = static_cast<int>(design.design.cols()) - est.design_rank;
    est.params = design.unpack(x);
    est.loss = design.loss(x);
  } else {
    // Quadratic loss evaluated through its normal form; identical value and
    // gradient, much cheaper per iteration.
    const RMat normal = design.design.transpose() * design.design;
    const RVec proj = design.design.transpose() * design.target;
    const double const_term = design.target.squaredNorm();
    const double norm = design.norm;

    opt::LossFn loss = [&](const RVec &theta) {
      const RVec x = theta_to_x(theta, n_t);
      return norm * (x.dot(normal * x) - 2.0 * proj.dot(x) + const_term);
    };
    opt::GradFn grad = [&](const RVec &theta) {
      const RVec x = theta_to_x(theta, n_t);
      const RVec gx = 2.0 * norm * (normal * x - proj);
      return x_grad_to_theta(gx, n_t);
    };

    const RVec theta0 = RVec::Zero(n_t + 2 * n_t * n_t);
    opt::AdamResult result =
        opt::adam_minimize(loss, grad, theta0, config.adam, config.seed);
    est.params = theta_to_params(result.theta, n_t);
    est.loss = design.loss(theta_to_x(result.theta, n_t));
    est.trace = std::move(result.trace);
    Eigen::CompleteOrthogonalDecomposition<RMat> cod(design.design);
    est.design_rank = static_cast<int>(cod.rank());
    est.nullspace_dim = static_cast<int>(design.design.cols()) - est.design_rank;
  }

  est.superop = liouvillian_superoperator(est.params, gb.basis);
  const RVec predicted = design.design * design.pack(est.params);
  est.predicted.assign(predicted.data(), predicted.data() + predicted.size());
  est.observed.assign(design.target.data(),
                      design.target.data() + design.target.size());
  return est;
}

LiouvillianEstimate fit_liouvillian(const DerivativeTable &derivs,
                                    const process::MapEstimate &map_est,
                                    const spam::SpamEstimate &spam_est,
                                    const LiouvillianFitConfig &config) {
  return fit_liouvillian(derivs, map_est.superop, spam_est.rho0, spam_est.povm,
                         config);
}

} // namespace qlt::liou
