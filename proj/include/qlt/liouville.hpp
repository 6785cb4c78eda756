#ifndef QLT_LIOUVILLE_HPP
#define QLT_LIOUVILLE_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "qlt/core.hpp"
#include "qlt/optimize.hpp"
#include "qlt/probe.hpp"
#include "qlt/process.hpp"
#include "qlt/spam.hpp"

namespace qlt::liou {

//=============================================================================
// Generator parameterization
//=============================================================================

// Unconstrained generator parameters: h real of length d^2-1 and K complex
// (d^2-1) x (d^2-1); the dissipation matrix is gamma = K + K^dag.
struct LiouvillianParams {
  RVec h;
  CMat k;
  CMat gamma() const { return k + k.adjoint(); }
};

// Cached per-dimension design data: the Hamiltonian and dissipator
// superoperator basis elements entering the generator parameterization.
struct GeneratorBasis {
  PauliBasis basis;
  int n_traceless = 0;            // d^2 - 1
  std::vector<Superop> ham_ops;   // -i(G_mu (x) 1 - 1 (x) G_mu^T)
  std::vector<Superop> diss_ops;  // (mu,nu) row-major, identity excluded
  std::vector<CMat> pair_products; // G_nu G_mu, same layout as diss_ops

  const Superop &diss(int mu, int nu) const {
    return diss_ops[static_cast<size_t>(mu) * n_traceless + nu];
  }
};
const GeneratorBasis &generator_basis(int n_qubits);

// L(h, K) built from the basis; linear in (h, Re K, Im K), trace-annihilating
// and Hermiticity-preserving for any parameters.
Superop liouvillian_superoperator(const LiouvillianParams &params,
                                  const PauliBasis &basis);

// Inverse of the parameterization: express a trace- and Hermiticity-
// preserving generator as (h, gamma). Raises if the representation residual
// exceeds 1e-6.
std::pair<RVec, CMat> canonical_split(const Superop &l, const PauliBasis &basis);

//=============================================================================
// Canonical form
//=============================================================================

struct CanonicalLiouvillian {
  CMat hamiltonian;        // traceless Hermitian
  RVec h;                  // basis coefficients of the Hamiltonian
  RVec rates;              // eigenvalues of gamma, descending
  std::vector<CMat> jumps; // traceless, unit Hilbert-Schmidt norm
  CMat jump_coeffs;        // row mu = coefficients of jump mu in the basis
  bool degenerate = false; // some eigenvalue gap below 1e-8
};

CanonicalLiouvillian canonical_decomposition(const LiouvillianParams &params,
                                             const PauliBasis &basis);
CanonicalLiouvillian canonical_decomposition_gamma(const CMat &gamma,
                                                   const RVec &h,
                                                   const PauliBasis &basis);

enum class Witness { MarkovianConsistent, NonMarkovian, Inconclusive };
std::string witness_to_string(Witness w);

// Verdict from rates and matching one-sigma error bars.
Witness markovianity_witness(const RVec &rates, const RVec &rate_errors,
                             double tolerance = 1e-9);

//=============================================================================
// Probability derivatives
//=============================================================================

enum class Scheme { Forward, Central };
std::string scheme_to_string(Scheme s);
Scheme scheme_from_string(const std::string &s);

struct DerivativeTable {
  int n_qubits = 0;
  Scheme scheme = Scheme::Central;
  double dt = 0.0;
  double time = 0.0;                 // the tag derivatives refer to
  std::vector<double> source_times;
  long long shots = 0;
  std::vector<probe::PauliConfig> configs;
  std::vector<std::vector<double>> dpdt;
};

// Datasets must share configs and shots; two for forward ({t, t+dt}),
// three for central ({t-dt, t, t+dt}, uniformly spaced). Any order accepted;
// records are matched positionally after sorting by time tag.
DerivativeTable estimate_derivatives(std::vector<probe::PauliDataset> datasets,
                                     Scheme scheme);

// Exact-probability variant for clean-data studies.
DerivativeTable derivatives_from_tables(
    const std::vector<probe::PauliConfig> &configs,
    const std::vector<std::vector<std::vector<double>>> &tables,
    const std::vector<double> &times, Scheme scheme, long long shots);

struct DtAdequacy {
  double mean_abs_diff = 0.0;
  double shot_noise_floor = 0.0;
  bool adequate = false;
};
DtAdequacy dt_adequacy(const std::vector<probe::PauliDataset> &datasets,
                       long long n_shots);

//=============================================================================
// Regression
//=============================================================================

enum class FitMethod { Adam, LeastSquares };

struct LiouvillianFitConfig {
  opt::AdamConfig adam = default_adam();
  FitMethod method = FitMethod::Adam;
  std::uint64_t seed = 0;

  static opt::AdamConfig default_adam();
};

struct LiouvillianEstimate {
  LiouvillianParams params;
  Superop superop;
  double loss = 0.0;
  opt::FitTrace trace;       // empty for the least-squares path
  int design_rank = 0;
  int nullspace_dim = 0;
  std::vector<double> predicted; // model derivatives, row-major over (rec, l)
  std::vector<double> observed;
};

// Minimize the regression MSE between observed derivative estimates and
// Tr{ L(theta) Lambda(rho_i) M_lj }. The least-squares path solves the
// normal problem directly (minimum-norm on rank deficiency) and serves as
// the oracle for the Adam path.
LiouvillianEstimate fit_liouvillian(const DerivativeTable &derivs,
                                    const Superop &map_superop,
                                    const DensityMatrix &rho0, const Povm &povm,
                                    const LiouvillianFitConfig &config = {});
LiouvillianEstimate fit_liouvillian(const DerivativeTable &derivs,
                                    const process::MapEstimate &map_est,
                                    const spam::SpamEstimate &spam_est,
                                    const LiouvillianFitConfig &config = {});

// The real linear design underlying the fit, exposed for oracle checks:
// model = design * x with x = [h; gamma packed into its Hermitian basis].
struct LiouvillianDesign {
  RMat design;
  RVec target;
  double norm = 0.0; // 1 / (2^n N_p)
  int n_traceless = 0;

  RVec pack(const LiouvillianParams &params) const;
  LiouvillianParams unpack(const RVec &x) const; // K = gamma / 2
  double loss(const RVec &x) const;
};
LiouvillianDesign build_liouvillian_design(const DerivativeTable &derivs,
                                           const Superop &map_superop,
                                           const DensityMatrix &rho0,
                                           const Povm &povm);

} // namespace qlt::liou

#endif
