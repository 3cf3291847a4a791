#pragma once

#include <span>

#include "dtcx/matrix.hpp"

// Dense linear-algebra kernels used by the network and the explainers.
//
// Two implementations share one contract: `serial` is the reference, `omp`
// distributes output elements across OpenMP threads. Each output element is
// accumulated by exactly one thread in the same order as the serial loop, so
// both produce bit-identical results for any thread count. The unqualified
// functions in `dtcx::kernels` dispatch to `omp` when OpenMP is enabled.
namespace dtcx::kernels {

namespace serial {
// out = a * b + bias (bias broadcast over rows; may be empty)
void affine(const Matrix& a, const Matrix& b, std::span<const double> bias, Matrix& out);
// out = a^T * b
void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out);
// out = a * b^T
void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out);
// out[c] = sum_r a(r, c)
void column_sums(const Matrix& a, std::span<double> out);
}  // namespace serial

namespace omp {
void affine(const Matrix& a, const Matrix& b, std::span<const double> bias, Matrix& out);
void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out);
void column_sums(const Matrix& a, std::span<double> out);
}  // namespace omp

void affine(const Matrix& a, const Matrix& b, std::span<const double> bias, Matrix& out);
void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out);
void column_sums(const Matrix& a, std::span<double> out);

// Number of threads the omp kernels will use (1 without OpenMP).
int max_threads() noexcept;

}  // namespace dtcx::kernels
