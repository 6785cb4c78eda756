#include <doctest.h>

#include "qlt/core.hpp"
#include "qlt/process.hpp"
#include "qlt/rng.hpp"
#include "qlt/synth.hpp"
#include "test_util.hpp"

using namespace qlt;
using qlt_test::max_abs_diff;
using qlt_test::random_complex;
using qlt_test::random_density;
using qlt_test::random_hermitian;

TEST_CASE("pauli basis: one qubit") {
  const PauliBasis basis = pauli_basis(1);
  REQUIRE(basis.size() == 4);
  // G_3 = sigma_z / sqrt(2)
  CHECK(max_abs_diff(basis.elements[3], pauli_sigma(3) / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs((basis.elements[3] * basis.elements[3]).trace().real() - 1.0) < 1e-12);
  CHECK(std::abs((basis.elements[1] * basis.elements[2]).trace()) < 1e-12);
}

TEST_CASE("pauli basis: two qubits, (z,x) element") {
  const PauliBasis basis = pauli_basis(2);
  REQUIRE(basis.size() == 16);
  const int mu = 4 * 3 + 1; // labels (z, x)
  REQUIRE(basis.labels(mu) == std::vector<int>{3, 1});
  const CMat expected = kron(pauli_sigma(3), pauli_sigma(1)) / 2.0;
  CHECK(max_abs_diff(basis.elements[mu], expected) < 1e-15);
}

TEST_CASE("pauli basis: orthonormality and tracelessness") {
  for (int n : {1, 2}) {
    const PauliBasis basis = pauli_basis(n);
    for (int mu = 0; mu < basis.size(); ++mu) {
      if (mu >= 1)
        CHECK(std::abs(basis.elements[mu].trace()) < 1e-12);
      for (int nu = 0; nu < basis.size(); ++nu) {
        const Cplx overlap = (basis.elements[mu] * basis.elements[nu]).trace();
        const double expected = (mu == nu) ? 1.0 : 0.0;
        CHECK(std::abs(overlap - expected) < 1e-12);
      }
    }
  }
}

TEST_CASE("vectorize: row-major read-off and round trip") {
  CHECK(vectorize(pauli_sigma(3)).isApprox(
      (CVec(4) << 1.0, 0.0, 0.0, -1.0).finished()));

  Rng rng(7);
  const CMat h = random_hermitian(4, rng);
  CHECK(max_abs_diff(devectorize(vectorize(h)), h) == 0.0);

  CVec bad(3);
  bad << 1.0, 2.0, 3.0;
  CHECK_THROWS_AS(devectorize(bad), DimensionError);
}

TEST_CASE("vectorize: vec(A rho B) = (A kron B^T) vec(rho)") {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = (trial % 2 == 0) ? 2 : 4;
    const CMat a = random_complex(d, d, rng);
    const CMat b = random_complex(d, d, rng);
    const CMat rho = random_complex(d, d, rng);
    const CVec lhs = kron(a, b.transpose()) * vectorize(rho);
    const CVec rhs = vectorize(a * rho * b);
    const double scale = std::max(rhs.cwiseAbs().maxCoeff(), 1e-30);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() / scale < 1e-12);
  }
}

TEST_CASE("vectorize: commutator identity") {
  Rng rng(13);
  const CMat h = random_hermitian(4, rng);
  const CMat rho = random_density(4, rng).mat;
  const CMat id = CMat::Identity(4, 4);
  const CVec lhs = (kron(h, id) - kron(id, h.transpose())) * vectorize(rho);
  const CVec rhs = vectorize(h * rho - rho * h);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("choi: identity channel is the maximally entangled projector") {
  const CMat choi = choi_matrix(identity_superop(2));
  CHECK(std::abs(choi.trace().real() - 1.0) < 1e-12);
  // |Omega><Omega| with |Omega> = (|00> + |11>)/sqrt(2)
  CVec omega = CVec::Zero(4);
  omega(0) = 1.0 / std::sqrt(2.0);
  omega(3) = 1.0 / std::sqrt(2.0);
  CHECK(max_abs_diff(choi, omega * omega.adjoint()) < 1e-12);
  HermitianEig eig = hermitian_eig(choi);
  int rank = 0;
  for (Eigen::Index k = 0; k < eig.values.size(); ++k)
    if (eig.values(k) > 1e-12)
      ++rank;
  CHECK(rank == 1);
}

TEST_CASE("choi: completely depolarizing channel") {
  // Lambda(rho) = Tr[rho] 1/2, i.e. S = vec(1/2) vec(1)^T.
  const CVec id_vec = vectorize(CMat::Identity(2, 2));
  const Superop s = 0.5 * id_vec * id_vec.transpose();
  // Oracle: (Lambda kron id)(|Omega><Omega|) = (1/2) sum_i (1/2) kron E_ii.
  CMat oracle = CMat::Zero(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      CMat e = CMat::Zero(2, 2);
      e(i, j) = 1.0;
      const CMat mapped = (i == j) ? CMat(CMat::Identity(2, 2) / 2.0)
                                   : CMat(CMat::Zero(2, 2));
      oracle += 0.5 * kron(mapped, e);
    }
  CHECK(max_abs_diff(choi_matrix(s), oracle) < 1e-14);
  CHECK(max_abs_diff(choi_matrix(s), CMat::Identity(4, 4) / 4.0) < 1e-14);
}

TEST_CASE("choi: random CPTP maps give PSD unit-trace Choi matrices") {
  for (int trial = 0; trial < 20; ++trial) {
    const auto kraus = synth::random_kraus_map(3, 2, 500 + trial);
    const CMat choi = choi_matrix(process::kraus_to_superoperator(kraus));
    CHECK(std::abs(choi.trace().real() - 1.0) < 1e-10);
    CHECK(min_hermitian_eigenvalue(choi) >= -1e-9);
  }
}

TEST_CASE("partial trace: product states, Bell state, contraction oracle") {
  Rng rng(17);
  const CMat rho_s = random_density(4, rng).mat;
  const CMat rho_e = random_density(4, rng).mat;
  CHECK(max_abs_diff(partial_trace_env(kron(rho_s, rho_e), 4, 4), rho_s) < 1e-13);

  CVec bell = CVec::Zero(4);
  bell(0) = 1.0 / std::sqrt(2.0);
  bell(3) = 1.0 / std::sqrt(2.0);
  const CMat bell_state = bell * bell.adjoint();
  CHECK(max_abs_diff(partial_trace_env(bell_state, 2, 2),
                     CMat::Identity(2, 2) / 2.0) < 1e-14);

  const CMat joint = random_density(16, rng).mat;
  CMat oracle = CMat::Zero(4, 4);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int e = 0; e < 4; ++e)
        oracle(a, b) += joint(a * 4 + e, b * 4 + e);
  CHECK(max_abs_diff(partial_trace_env(joint, 4, 4), oracle) == 0.0);

  CHECK_THROWS_AS(partial_trace_env(joint, 4, 3), DimensionError);
}

TEST_CASE("matrix exponential: closed forms and semigroup property") {
  CHECK(max_abs_diff(matrix_exponential(CMat::Zero(3, 3)), CMat::Identity(3, 3)) <
        1e-14);

  const Cplx i(0.0, 1.0);
  const double pi = 3.14159265358979323846;
  const CMat rot = matrix_exponential(-i * pi / 2.0 * pauli_sigma(1));
  CHECK(max_abs_diff(rot, -i * pauli_sigma(1)) < 1e-13);

  Rng rng(23);
  const CMat a = random_hermitian(4, rng);
  const double s = 0.37, t = 0.89;
  const CMat lhs = matrix_exponential(a * (s + t));
  const CMat rhs = matrix_exponential(a * s) * matrix_exponential(a * t);
  CHECK(max_abs_diff(lhs, rhs) / lhs.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("hermitian sqrt: diagonal case, residual, clipping") {
  CMat diag = CMat::Zero(2, 2);
  diag(0, 0) = 4.0;
  diag(1, 1) = 9.0;
  CMat expected = CMat::Zero(2, 2);
  expected(0, 0) = 2.0;
  expected(1, 1) = 3.0;
  CHECK(max_abs_diff(hermitian_sqrt(diag), expected) < 1e-14);

  Rng rng(29);
  const CMat psd = random_density(4, rng).mat;
  const CMat root = hermitian_sqrt(psd);
  CHECK(max_abs_diff(root * root, psd) <= 1e-9 * psd.cwiseAbs().maxCoeff() + 1e-12);

  CMat negative = CMat::Identity(2, 2);
  negative(1, 1) = -1e-3;
  CHECK_THROWS_AS(hermitian_sqrt(negative), ModelViolationError);
  // Tiny negativity is clipped instead.
  negative(1, 1) = -5e-11;
  CHECK_NOTHROW(hermitian_sqrt(negative));
}

TEST_CASE("superoperator predicates") {
  const Superop id = identity_superop(2);
  CHECK(trace_preservation_error(id) < 1e-15);
  CHECK(hermiticity_preservation_error(id) < 1e-15);

  Rng rng(31);
  const CMat u = matrix_exponential(Cplx(0, -1) * random_hermitian(2, rng));
  const Superop conj = conjugation_superop(u);
  CHECK(trace_preservation_error(conj) < 1e-12);
  CHECK(hermiticity_preservation_error(conj) < 1e-12);
}
