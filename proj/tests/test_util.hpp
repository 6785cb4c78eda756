#ifndef QLT_TEST_UTIL_HPP
#define QLT_TEST_UTIL_HPP

#include "qlt/core.hpp"
#include "qlt/rng.hpp"

namespace qlt_test {

inline qlt::CMat random_complex(int rows, int cols, qlt::Rng &rng) {
  qlt::CMat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      m(i, j) = qlt::Cplx(rng.normal(), rng.normal());
  return m;
}

inline qlt::CMat random_hermitian(int dim, qlt::Rng &rng) {
  const qlt::CMat a = random_complex(dim, dim, rng);
  return (a + a.adjoint()) / 2.0;
}

inline qlt::DensityMatrix random_density(int dim, qlt::Rng &rng) {
  const qlt::CMat a = random_complex(dim, dim, rng);
  const qlt::CMat s = a * a.adjoint();
  return qlt::DensityMatrix{s / s.trace().real()};
}

inline double max_abs_diff(const qlt::CMat &a, const qlt::CMat &b) {
  return (a - b).cwiseAbs().maxCoeff();
}

} // namespace qlt_test

#endif
