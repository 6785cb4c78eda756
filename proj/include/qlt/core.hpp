#ifndef QLT_CORE_HPP
#define QLT_CORE_HPP

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "qlt/errors.hpp"

namespace qlt {

using Cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

// A superoperator is a d^2 x d^2 complex matrix acting on row-major
// vectorized operators.
using Superop = Eigen::MatrixXcd;

//=============================================================================
// Elementary matrices
//=============================================================================

CMat pauli_sigma(int axis); // 0 -> identity, 1 -> x, 2 -> y, 3 -> z

CMat kron(const CMat &a, const CMat &b);

inline CMat dag(const CMat &a) { return a.adjoint(); }

//=============================================================================
// Vectorization (row-major): vec(A rho B) = (A (x) B^T) vec(rho)
//=============================================================================

CVec vectorize(const CMat &op);
CMat devectorize(const CVec &v);

//=============================================================================
// Domain types
//=============================================================================

// Hermitian d x d operator; construction validates A = A^dag elementwise.
struct HermitianOperator {
  CMat mat;
  int dim() const { return static_cast<int>(mat.rows()); }
};
HermitianOperator make_hermitian(const CMat &m, double tol = 1e-12);

double hermiticity_error(const CMat &m);

// Density matrix: Hermitian, unit trace, positive semidefinite.
struct DensityMatrix {
  CMat mat;
  int dim() const { return static_cast<int>(mat.rows()); }
};
DensityMatrix make_density_matrix(const CMat &m, double trace_tol = 1e-10,
                                  double eig_tol = 1e-10);

// POVM: ordered set of PSD operators summing to identity.
struct Povm {
  std::vector<CMat> elements;
  int dim() const { return elements.empty() ? 0 : static_cast<int>(elements[0].rows()); }
  int n_outcomes() const { return static_cast<int>(elements.size()); }
};
Povm make_povm(std::vector<CMat> elements, double tol = 1e-10);

// Computational-basis projective POVM {|l><l|}.
Povm ideal_povm(int n_qubits);
DensityMatrix ideal_state(int n_qubits); // |0...0><0...0|

// Orthonormal Hermitian product-Pauli basis. d^2 elements, each a tensor
// product of {1, sx, sy, sz} scaled by 1/sqrt(d); lexicographic in the
// per-qubit labels with element 0 proportional to identity.
struct PauliBasis {
  int n_qubits = 0;
  std::vector<CMat> elements;
  int dim() const { return 1 << n_qubits; }
  int size() const { return static_cast<int>(elements.size()); }
  // Per-qubit axis labels of element mu, most significant qubit first.
  std::vector<int> labels(int mu) const;
};
PauliBasis pauli_basis(int n_qubits);

//=============================================================================
// Superoperator helpers
//=============================================================================

// Choi state Phi = (Lambda (x) id)(|Omega><Omega|), normalized to unit trace.
CMat choi_matrix(const Superop &map);

// Superoperator of rho -> U rho U^dag.
Superop conjugation_superop(const CMat &u);

Superop identity_superop(int dim);

// || vec(1)^dag S - vec(1)^dag ||_inf : zero for trace-preserving maps.
double trace_preservation_error(const Superop &s);
// || vec(1)^dag S ||_inf : zero for trace-annihilating generators.
double trace_annihilation_error(const Superop &s);
// Deviation from S = P conj(S) P with P the vec-transpose permutation;
// zero iff S maps Hermitian operators to Hermitian operators.
double hermiticity_preservation_error(const Superop &s);

// Apply superoperator to an operator (vectorize, act, devectorize).
CMat apply_superop(const Superop &s, const CMat &op);

//=============================================================================
// Partial trace
//=============================================================================

// Trace out the environment (right tensor factor) of a joint operator on
// H_sys (x) H_env.
CMat partial_trace_env(const CMat &joint, int dim_sys, int dim_env);

//=============================================================================
// Matrix functions
//=============================================================================

CMat matrix_exponential(const CMat &a);

// Square root of a Hermitian PSD matrix via eigendecomposition. Eigenvalues
// in [-clip_tol, 0) are clipped to zero; anything below raises.
CMat hermitian_sqrt(const CMat &a, double clip_tol = 1e-10);

// Eigenvalues of a general complex matrix.
CVec eigenvalues(const CMat &a);

// Eigendecomposition of a Hermitian matrix; eigenvalues ascending.
struct HermitianEig {
  RVec values;
  CMat vectors; // columns
};
HermitianEig hermitian_eig(const CMat &a);

double min_hermitian_eigenvalue(const CMat &a);

} // namespace qlt

#endif
