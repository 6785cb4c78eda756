#ifndef QLT_SYNTH_HPP
#define QLT_SYNTH_HPP

#include <cstdint>
#include <memory>
#include <vector>

#include "qlt/core.hpp"
#include "qlt/liouville.hpp"
#include "qlt/process.hpp"

namespace qlt::synth {

//=============================================================================
// Random ensembles
//=============================================================================

// GUE draw H = (A + A^dag)/2 with A entries standard complex Gaussian
// (independent N(0,1) real and imaginary parts).
CMat sample_gue(int dim, std::uint64_t rng_seed);

// Environment jump operator A + iB with standard Gaussian entries.
CMat sample_env_jump(int dim_env, std::uint64_t rng_seed);

// Random CPTP map of the requested Kraus rank from a Gaussian parameter
// matrix pushed through the QR parameterization.
process::KrausMap random_kraus_map(int rank, int dim, std::uint64_t rng_seed);

// Randomly perturbed SPAM set:
// rho0 = 0.9|0><0| + 0.1 drho,  M_l = 0.8|l><l| + 0.2 dM_l,
// with drho and {dM_l} drawn from the unconstrained parameterizations.
std::pair<DensityMatrix, Povm> perturbed_spam(int n_qubits,
                                              std::uint64_t rng_seed);

//=============================================================================
// Reservoir model (system + finite environment + Markovian bath)
//=============================================================================

struct ReservoirModel {
  int n_sys = 0;
  int n_env = 0;
  CMat h_sys;                  // dim 2^n_sys
  CMat h_env;                  // dim 2^n_env
  CMat h_int;                  // joint dim
  std::vector<CMat> env_jumps; // 4^n_env - 1 operators on the environment
  double alpha = 1.0;          // dissipative coupling
  double g = 0.5;              // interaction coupling
  DensityMatrix rho_env;       // defaults to maximally mixed

  int dim_sys() const { return 1 << n_sys; }
  int dim_env() const { return 1 << n_env; }
  int dim_joint() const { return dim_sys() * dim_env(); }
  void validate() const;
};

// Draw a full model; Hamiltonians GUE, jumps Gaussian, couplings as given.
ReservoirModel sample_reservoir_model(int n_sys, int n_env, double alpha,
                                      double g, std::uint64_t rng_seed);

// Vectorized joint Liouvillian: Hamiltonian commutator plus the dissipator
// with prefactor alpha / (4^n_sys - 1) over jumps acting trivially on the
// system factor.
Superop build_joint_liouvillian(const ReservoirModel &model);

// Reduced system map Lambda_t from propagating basis elements tensored with
// rho_env through exp(t L) and tracing out the environment.
Superop reduced_map(const ReservoirModel &model, double t);

// Time-local generator L_t = [Lambda_{t+dt} - Lambda_{t-dt}] / (2 dt)
// Lambda_t^{-1}; O(dt^2) accurate.
Superop ground_truth_generator(const ReservoirModel &model, double t,
                               double dt);

// Same operations backed by a one-time eigendecomposition of the joint
// Liouvillian; falls back to direct exponentials if ill-conditioned.
class JointPropagator {
public:
  explicit JointPropagator(const ReservoirModel &model);
  Superop map_at(double t) const;
  Superop generator_at(double t, double dt = 1e-3) const;
  const Superop &joint_liouvillian() const { return joint_l_; }

private:
  CMat joint_exp(double t) const;
  ReservoirModel model_;
  Superop joint_l_;
  bool use_eig_ = false;
  CMat eig_vectors_;
  CMat eig_vectors_inv_;
  CVec eig_values_;
};

// Exact generator applied on top of an existing map: static-generator
// semigroup ground truth for closed-form tests.
Superop semigroup_map(const Superop &generator, double t);

//=============================================================================
// Packaged ground truth
//=============================================================================

struct GroundTruth {
  ReservoirModel model;
  std::shared_ptr<JointPropagator> propagator;

  static GroundTruth from_model(ReservoirModel model);
  Superop map_at(double t) const { return propagator->map_at(t); }
  Superop generator_at(double t, double dt = 1e-3) const {
    return propagator->generator_at(t, dt);
  }
  liou::CanonicalLiouvillian canonical_at(double t, double dt = 1e-3) const;
};

} // namespace qlt::synth

#endif
