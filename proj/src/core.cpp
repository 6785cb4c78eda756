#include "qlt/core.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "qlt/rng.hpp"

namespace qlt {

std::vector<long long> multinomial_sample(const std::vector<double> &probs,
                                          long long n_shots, Rng &rng,
                                          double sum_tol) {
  double sum = 0.0;
  for (double p : probs) {
    if (p < -1e-10)
      throw ModelViolationError("multinomial_sample: negative probability " +
                                std::to_string(p));
    sum += std::max(p, 0.0);
  }
  if (std::abs(sum - 1.0) > sum_tol)
    throw ModelViolationError("multinomial_sample: probabilities sum to " +
                              std::to_string(sum));
  std::vector<double> cdf(probs.size());
  double acc = 0.0;
  for (size_t k = 0; k < probs.size(); ++k) {
    acc += std::max(probs[k], 0.0) / sum;
    cdf[k] = acc;
  }
  cdf.back() = 1.0;

  std::vector<long long> counts(probs.size(), 0);
  for (long long s = 0; s < n_shots; ++s) {
    const double u = rng.uniform01();
    size_t k = 0;
    while (k + 1 < cdf.size() && u >= cdf[k])
      ++k;
    ++counts[k];
  }
  return counts;
}

CMat pauli_sigma(int axis) {
  CMat m(2, 2);
  const Cplx i(0.0, 1.0);
  switch (axis) {
  case 0:
    m << 1, 0, 0, 1;
    break;
  case 1:
    m << 0, 1, 1, 0;
    break;
  case 2:
    m << 0, -i, i, 0;
    break;
  case 3:
    m << 1, 0, 0, -1;
    break;
  default:
    throw DimensionError("pauli_sigma: axis must be 0..3");
  }
  return m;
}

CMat kron(const CMat &a, const CMat &b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CVec vectorize(const CMat &op) {
  if (op.rows() != op.cols())
    throw DimensionError("vectorize: operator must be square");
  const Eigen::Index d = op.rows();
  CVec v(d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      v(i * d + j) = op(i, j);
  return v;
}

CMat devectorize(const CVec &v) {
  const auto n = v.size();
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(double(n))));
  if (d * d != n)
    throw DimensionError("devectorize: length " + std::to_string(n) +
                         " is not a perfect square");
  CMat m(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      m(i, j) = v(i * d + j);
  return m;
}

double hermiticity_error(const CMat &m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

HermitianOperator make_hermitian(const CMat &m, double tol) {
  if (m.rows() != m.cols())
    throw DimensionError("make_hermitian: matrix must be square");
  const double err = hermiticity_error(m);
  if (err > tol)
    throw ModelViolationError("make_hermitian: hermiticity violated by " +
                              std::to_string(err));
  return HermitianOperator{(m + m.adjoint()) / 2.0};
}

DensityMatrix make_density_matrix(const CMat &m, double trace_tol,
                                  double eig_tol) {
  HermitianOperator h = make_hermitian(m, 1e-10);
  const double tr_err = std::abs(h.mat.trace().real() - 1.0) +
                        std::abs(h.mat.trace().imag());
  if (tr_err > trace_tol)
    throw ModelViolationError("make_density_matrix: trace deviates by " +
                              std::to_string(tr_err));
  const double min_eig = min_hermitian_eigenvalue(h.mat);
  if (min_eig < -eig_tol)
    throw ModelViolationError("make_density_matrix: min eigenvalue " +
                              std::to_string(min_eig));
  return DensityMatrix{h.mat};
}

Povm make_povm(std::vector<CMat> elements, double tol) {
  if (elements.empty())
    throw DimensionError("make_povm: no elements");
  const Eigen::Index d = elements[0].rows();
  CMat sum = CMat::Zero(d, d);
  for (const auto &e : elements) {
    if (e.rows() != d || e.cols() != d)
      throw DimensionError("make_povm: inconsistent element dimensions");
    if (min_hermitian_eigenvalue((e + e.adjoint()) / 2.0) < -tol)
      throw ModelViolationError("make_povm: element not PSD");
    sum += e;
  }
  const double completeness =
      (sum - CMat::Identity(d, d)).cwiseAbs().maxCoeff();
  if (completeness > tol)
    throw ModelViolationError("make_povm: completeness violated by " +
                              std::to_string(completeness));
  return Povm{std::move(elements)};
}

Povm ideal_povm(int n_qubits) {
  const int d = 1 << n_qubits;
  std::vector<CMat> elems(d);
  for (int l = 0; l < d; ++l) {
    elems[l] = CMat::Zero(d, d);
    elems[l](l, l) = 1.0;
  }
  return Povm{std::move(elems)};
}

DensityMatrix ideal_state(int n_qubits) {
  const int d = 1 << n_qubits;
  CMat m = CMat::Zero(d, d);
  m(0, 0) = 1.0;
  return DensityMatrix{m};
}

std::vector<int> PauliBasis::labels(int mu) const {
  std::vector<int> lab(n_qubits);
  for (int q = n_qubits - 1; q >= 0; --q) {
    lab[q] = mu % 4;
    mu /= 4;
  }
  return lab;
}

PauliBasis pauli_basis(int n_qubits) {
  if (n_qubits < 1)
    throw DimensionError("pauli_basis: n_qubits must be >= 1");
  const int d = 1 << n_qubits;
  const int n_elems = d * d;
  const double scale = 1.0 / std::sqrt(double(d));

  PauliBasis basis;
  basis.n_qubits = n_qubits;
  basis.elements.reserve(n_elems);
  for (int mu = 0; mu < n_elems; ++mu) {
    std::vector<int> lab(n_qubits);
    int m = mu;
    for (int q = n_qubits - 1; q >= 0; --q) {
      lab[q] = m % 4;
      m /= 4;
    }
    CMat g = pauli_sigma(lab[0]);
    for (int q = 1; q < n_qubits; ++q)
      g = kron(g, pauli_sigma(lab[q]));
    basis.elements.push_back(scale * g);
  }
  return basis;
}

CMat choi_matrix(const Superop &map) {
  const Eigen::Index d2 = map.rows();
  if (map.cols() != d2)
    throw DimensionError("choi_matrix: map must be square");
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(double(d2))));
  if (d * d != d2)
    throw DimensionError("choi_matrix: dimension is not a perfect square");

  // Phi[(a,b),(c,e)] = S[(a,c),(b,e)] / d
  CMat choi(d2, d2);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b)
      for (Eigen::Index c = 0; c < d; ++c)
        for (Eigen::Index e = 0; e < d; ++e)
          choi(a * d + b, c * d + e) = map(a * d + c, b * d + e) / double(d);

  const double tr = choi.trace().real();
  if (std::abs(tr) > 1e-12)
    choi /= tr;
  return choi;
}

Superop conjugation_superop(const CMat &u) {
  return kron(u, u.conjugate());
}

Superop identity_superop(int dim) {
  return Superop::Identity(static_cast<Eigen::Index>(dim) * dim,
                           static_cast<Eigen::Index>(dim) * dim);
}

double trace_preservation_error(const Superop &s) {
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(double(s.rows()))));
  const CVec id_vec = vectorize(CMat::Identity(d, d));
  return (s.adjoint() * id_vec - id_vec).cwiseAbs().maxCoeff();
}

double trace_annihilation_error(const Superop &s) {
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(double(s.rows()))));
  const CVec id_vec = vectorize(CMat::Identity(d, d));
  return (s.adjoint() * id_vec).cwiseAbs().maxCoeff();
}

double hermiticity_preservation_error(const Superop &s) {
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(double(s.rows()))));
  // P permutes vec indices (i,j) -> (j,i); condition S = P conj(S) P.
  double err = 0.0;
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index k = 0; k < d; ++k)
        for (Eigen::Index l = 0; l < d; ++l) {
          const Cplx lhs = s(i * d + j, k * d + l);
          const Cplx rhs = std::conj(s(j * d + i, l * d + k));
          err = std::max(err, std::abs(lhs - rhs));
        }
  return err;
}

CMat apply_superop(const Superop &s, const CMat &op) {
  return devectorize(s * vectorize(op));
}

CMat partial_trace_env(const CMat &joint, int dim_sys, int dim_env) {
  const Eigen::Index d = static_cast<Eigen::Index>(dim_sys) * dim_env;
  if (joint.rows() != d || joint.cols() != d)
    throw DimensionError("partial_trace_env: joint dimension mismatch");
  CMat out = CMat::Zero(dim_sys, dim_sys);
  for (int a = 0; a < dim_sys; ++a)
    for (int b = 0; b < dim_sys; ++b)
      for (int e = 0; e < dim_env; ++e)
        out(a, b) += joint(a * dim_env + e, b * dim_env + e);
  return out;
}

CMat matrix_exponential(const CMat &a) {
  if (!a.allFinite())
    throw NumericalError("matrix_exponential: non-finite entries");
  return a.exp();
}

CMat hermitian_sqrt(const CMat &a, double clip_tol) {
  if (!a.allFinite())
    throw NumericalError("hermitian_sqrt: non-finite entries");
  HermitianEig eig = hermitian_eig(a);
  RVec roots(eig.values.size());
  for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
    double v = eig.values(k);
    if (v < -clip_tol)
      throw ModelViolationError("hermitian_sqrt: eigenvalue " +
                                std::to_string(v) + " below -" +
                                std::to_string(clip_tol));
    roots(k) = std::sqrt(std::max(v, 0.0));
  }
  return eig.vectors * roots.asDiagonal() * eig.vectors.adjoint();
}

CVec eigenvalues(const CMat &a) {
  if (!a.allFinite())
    throw NumericalError("eigenvalues: non-finite entries");
  Eigen::ComplexEigenSolver<CMat> solver(a, /*computeEigenvectors=*/false);
  return solver.eigenvalues();
}

HermitianEig hermitian_eig(const CMat &a) {
  Eigen::SelfAdjointEigenSolver<CMat> solver((a + a.adjoint()) / 2.0);
  return HermitianEig{solver.eigenvalues(), solver.eigenvectors()};
}

double min_hermitian_eigenvalue(const CMat &a) {
  return hermitian_eig(a).values.minCoeff();
}

} // namespace qlt
