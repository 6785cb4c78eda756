#include "qlt/synth.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "qlt/rng.hpp"
#include "qlt/spam.hpp"

namespace qlt::synth {

namespace {

CMat complex_gaussian(int rows, int cols, Rng &rng) {
  CMat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      m(i, j) = Cplx(rng.normal(), rng.normal());
  return m;
}

} // namespace

CMat sample_gue(int dim, std::uint64_t rng_seed) {
  if (dim < 2)
    throw DimensionError("sample_gue: dim must be >= 2");
  Rng rng(rng_seed);
  const CMat a = complex_gaussian(dim, dim, rng);
  return (a + a.adjoint()) / 2.0;
}

CMat sample_env_jump(int dim_env, std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  return complex_gaussian(dim_env, dim_env, rng);
}

process::KrausMap random_kraus_map(int rank, int dim, std::uint64_t rng_seed) {
  if (rank < 1 || rank > dim * dim)
    throw DimensionError("random_kraus_map: rank must lie in [1, d^2]");
  Rng rng(rng_seed);
  const CMat theta = complex_gaussian(rank * dim, dim, rng);
  return process::kraus_param(theta);
}

std::pair<DensityMatrix, Povm> perturbed_spam(int n_qubits,
                                              std::uint64_t rng_seed) {
  const int d = 1 << n_qubits;
  Rng rng_state(Rng::derive_seed(rng_seed, 1));
  Rng rng_povm(Rng::derive_seed(rng_seed, 2));

  const DensityMatrix delta_rho =
      spam::rho_param(complex_gaussian(d, d, rng_state));
  CMat rho = 0.9 * ideal_state(n_qubits).mat + 0.1 * delta_rho.mat;

  const Povm delta_povm =
      spam::povm_param(complex_gaussian(d * d, d, rng_povm));
  std::vector<CMat> elements(d);
  const Povm ideal = ideal_povm(n_qubits);
  for (int l = 0; l < d; ++l)
    elements[l] = 0.8 * ideal.elements[l] + 0.2 * delta_povm.elements[l];

  return {make_density_matrix(rho), make_povm(std::move(elements))};
}

void ReservoirModel::validate() const {
  if (n_sys < 1 || n_env < 1)
    throw DimensionError("ReservoirModel: qubit counts must be >= 1");
  if (alpha < 0.0)
    throw ModelViolationError("ReservoirModel: alpha must be >= 0");
  const int ds = dim_sys(), de = dim_env(), dj = dim_joint();
  if (h_sys.rows() != ds || h_sys.cols() != ds)
    throw DimensionError("ReservoirModel: H_S dimension mismatch");
  if (h_env.rows() != de || h_env.cols() != de)
    throw DimensionError("ReservoirModel: H_E dimension mismatch");
  if (h_int.rows() != dj || h_int.cols() != dj)
    throw DimensionError("ReservoirModel: H_int dimension mismatch");
  if (static_cast<int>(env_jumps.size()) != de * de - 1)
    throw DimensionError("ReservoirModel: expected 4^n_env - 1 jump operators");
  for (const auto &j : env_jumps)
    if (j.rows() != de || j.cols() != de)
      throw DimensionError("ReservoirModel: jump operator dimension mismatch");
  if (rho_env.dim() != de)
    throw DimensionError("ReservoirModel: rho_env dimension mismatch");
}

ReservoirModel sample_reservoir_model(int n_sys, int n_env, double alpha,
                                      double g, std::uint64_t rng_seed) {
  ReservoirModel model;
  model.n_sys = n_sys;
  model.n_env = n_env;
  model.alpha = alpha;
  model.g = g;
  model.h_sys = sample_gue(1 << n_sys, Rng::derive_seed(rng_seed, 10));
  model.h_env = sample_gue(1 << n_env, Rng::derive_seed(rng_seed, 11));
  model.h_int = sample_gue((1 << n_sys) * (1 << n_env),
                           Rng::derive_seed(rng_seed, 12));
  const int de = 1 << n_env;
  model.env_jumps.reserve(de * de - 1);
  for (int mu = 0; mu < de * de - 1; ++mu)
    model.env_jumps.push_back(
        sample_env_jump(de, Rng::derive_seed(rng_seed, 100 + mu)));
  model.rho_env =
      DensityMatrix{CMat::Identity(de, de) / double(de)}; // maximally mixed
  model.validate();
  return model;
}

Superop build_joint_liouvillian(const ReservoirModel &model) {
  model.validate();
  const int ds = model.dim_sys();
  const int de = model.dim_env();
  const int dj = model.dim_joint();
  const CMat id_s = CMat::Identity(ds, ds);
  const CMat id_j = CMat::Identity(dj, dj);

  const CMat h = kron(model.h_sys, CMat::Identity(de, de)) +
                 kron(id_s, model.h_env) + 2.0 * model.g * model.h_int;

  const Cplx im(0.0, 1.0);
  Superop l = -im * (kron(h, id_j) - kron(id_j, h.transpose()));

  const double prefactor =
      model.alpha / (std::pow(4.0, model.n_sys) - 1.0);
  for (const auto &j_env : model.env_jumps) {
    const CMat j = kron(id_s, j_env);
    const CMat jj = j.adjoint() * j;
    l += prefactor * (kron(j, j.conjugate()) -
                      0.5 * (kron(jj, id_j) + kron(id_j, jj.transpose())));
  }
  return l;
}

JointPropagator::JointPropagator(const ReservoirModel &model)
    : model_(model), joint_l_(build_joint_liouvillian(model)) {
  Eigen::ComplexEigenSolver<CMat> solver(joint_l_, true);
  if (solver.info() == Eigen::Success) {
    eig_vectors_ = solver.eigenvectors();
    eig_values_ = solver.eigenvalues();
    Eigen::PartialPivLU<CMat> lu(eig_vectors_);
    eig_vectors_inv_ = lu.solve(CMat::Identity(eig_vectors_.rows(),
                                               eig_vectors_.cols()));
    const double residual =
        (eig_vectors_ * eig_vectors_inv_ -
         CMat::Identity(eig_vectors_.rows(), eig_vectors_.cols()))
            .cwiseAbs()
            .maxCoeff();
    use_eig_ = residual < 1e-9;
  }
}

CMat JointPropagator::joint_exp(double t) const {
  if (use_eig_) {
    CVec phases(eig_values_.size());
    for (Eigen::Index k = 0; k < eig_values_.size(); ++k)
      phases(k) = std::exp(t * eig_values_(k));
    return eig_vectors_ * phases.asDiagonal() * eig_vectors_inv_;
  }
  return matrix_exponential(t * joint_l_);
}

Superop JointPropagator::map_at(double t) const {
  if (t < 0.0)
    throw Error("JointPropagator: t must be >= 0");
  const int ds = model_.dim_sys();
  const int de = model_.dim_env();
  const CMat propagator = joint_exp(t);

  Superop map(static_cast<Eigen::Index>(ds) * ds,
              static_cast<Eigen::Index>(ds) * ds);
  for (int a = 0; a < ds; ++a)
    for (int b = 0; b < ds; ++b) {
      CMat basis_elem = CMat::Zero(ds, ds);
      basis_elem(a, b) = 1.0;
      const CMat joint_in = kron(basis_elem, model_.rho_env.mat);
      const CMat joint_out = devectorize(propagator * vectorize(joint_in));
      const CMat reduced = partial_trace_env(joint_out, ds, de);
      map.col(a * ds + b) = vectorize(reduced);
    }
  return map;
}

Superop JointPropagator::generator_at(double t, double dt) const {
  if (dt <= 0.0)
    throw Error("JointPropagator: dt must be positive");
  if (t - dt < 0.0)
    throw Error("JointPropagator: need t - dt >= 0 for the central stencil");
  const Superop plus = map_at(t + dt);
  const Superop minus = map_at(t - dt);
  const Superop lambda = map_at(t);
  const Superop diff = (plus - minus) / (2.0 * dt);

  Eigen::PartialPivLU<CMat> lu(lambda);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-12))
    throw NumericalError("generator_at: map is numerically singular (rcond " +
                         std::to_string(rcond) + ")");
  // L = diff * Lambda^{-1}  <=>  Lambda^T L^T = diff^T
  Eigen::PartialPivLU<CMat> lu_t(lambda.transpose());
  return lu_t.solve(diff.transpose()).transpose();
}

Superop reduced_map(const ReservoirModel &model, double t) {
  return JointPropagator(model).map_at(t);
}

Superop ground_truth_generator(const ReservoirModel &model, double t,
                               double dt) {
  return JointPropagator(model).generator_at(t, dt);
}

Superop semigroup_map(const Superop &generator, double t) {
  return matrix_exponential(t * generator);
}

GroundTruth GroundTruth::from_model(ReservoirModel model) {
  GroundTruth gt;
  gt.model = std::move(model);
  gt.propagator = std::make_shared<JointPropagator>(gt.model);
  return gt;
}

liou::CanonicalLiouvillian GroundTruth::canonical_at(double t,
                                                     double dt) const {
  const Superop l = generator_at(t, dt);
  const PauliBasis &basis = liou::generator_basis(model.n_sys).basis;
  auto [h, gamma] = liou::canonical_split(l, basis);
  return liou::canonical_decomposition_gamma(gamma, h, basis);
}

} // namespace qlt::synth
