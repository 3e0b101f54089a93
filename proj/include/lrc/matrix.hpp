#ifndef LRC_MATRIX_HPP
#define LRC_MATRIX_HPP

#include <cstddef>
#include <vector>

#include "lrc/common.hpp"
#include "lrc/rng.hpp"

namespace lrc {

// Dense row-major matrix of 64-bit reals. The single numeric carrier for the
// whole project; vectors are 1xN matrices.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> v;

    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols)
        : rows(rows), cols(cols), v(rows * cols, 0.0) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    double& operator()(std::size_t i, std::size_t j) { return v[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return v[i * cols + j]; }

    double* row(std::size_t i) { return v.data() + i * cols; }
    const double* row(std::size_t i) const { return v.data() + i * cols; }

    std::size_t size() const { return rows * cols; }
    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
    void fill(double x) { std::fill(v.begin(), v.end(), x); }
};

// Throws NumericalFailure if any entry is NaN/Inf.
void check_finite(const Matrix& a, const char* what);

// C = A*B. OpenMP-parallel over rows of C; every C(i,j) is accumulated by a
// single thread in ascending-k order, so the result is bit-identical for any
// thread count and matches the serial reference exactly.
Matrix matmul(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);
void add_inplace(Matrix& a, const Matrix& b, double s = 1.0);  // a += s*b

double frobenius_norm(const Matrix& a);
double dot(const Matrix& a, const Matrix& b);  // entrywise inner product

Matrix random_gaussian(RngState& rng, std::size_t rows, std::size_t cols);
// Columns orthonormal (cols <= rows), via modified Gram-Schmidt with
// re-orthogonalization.
Matrix random_orthonormal(RngState& rng, std::size_t rows, std::size_t cols);

namespace ref {
// Serial reference kernel: naive i-j-k triple loop. Kept as the oracle for
// the parallel kernel and for the benchmark comparison.
Matrix matmul(const Matrix& a, const Matrix& b);
}  // namespace ref

}  // namespace lrc

#endif
