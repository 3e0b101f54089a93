#ifndef LRC_SVD_HPP
#define LRC_SVD_HPP

#include <vector>

#include "lrc/matrix.hpp"

namespace lrc {

// A = U * diag(S) * V^T with k = min(rows, cols) columns in U and V,
// S sorted descending. Sign convention: the first entry of each U column
// whose magnitude exceeds 1e-10 is non-negative (V flipped to match), so
// factorizations are unique and golden values stay stable.
struct SvdFactors {
    Matrix u;               // m x k, orthonormal columns
    std::vector<double> s;  // k, descending, >= 0
    Matrix v;               // n x k, orthonormal columns
};

// One-sided Jacobi. Convergence: max column-pair cosine <= 1e-12; cap 100
// sweeps, non-convergence raises NumericalFailure carrying the residual.
SvdFactors svd(const Matrix& a);

// Largest singular value.
double spectral_norm(const Matrix& a);

}  // namespace lrc

#endif
