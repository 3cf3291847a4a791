#include "dtcx/kernels.hpp"

#include <cstddef>
#include <string>

#include "dtcx/error.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dtcx::kernels {
namespace {

// Below this many multiply-adds the thread fork costs more than it saves.
constexpr std::size_t kParallelWork = 1U << 15;

void check(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::DimensionMismatch, what);
}

void check_affine(const Matrix& a, const Matrix& b, std::span<const double> bias, Matrix& out) {
  check(a.cols() == b.rows(), "affine: inner dimensions differ");
  check(bias.empty() || bias.size() == b.cols(), "affine: bias length");
  if (out.rows() != a.rows() || out.cols() != b.cols()) out.resize(a.rows(), b.cols());
}

// The element kernels below are shared by both variants so the floating-point
// operation order is identical.
inline void affine_row(const Matrix& a, const Matrix& b, std::span<const double> bias, Matrix& out,
                       std::size_t i) {
  const std::size_t n = b.cols();
  const std::size_t k = a.cols();
  double* o = out.data() + i * n;
  for (std::size_t j = 0; j < n; ++j) o[j] = bias.empty() ? 0.0 : bias[j];
  const double* arow = a.data() + i * k;
  for (std::size_t p = 0; p < k; ++p) {
    const double av = arow[p];
    const double* brow = b.data() + p * n;
    for (std::size_t j = 0; j < n; ++j) o[j] += av * brow[j];
  }
}

inline void at_b_row(const Matrix& a, const Matrix& b, Matrix& out, std::size_t i) {
  // out row i corresponds to column i of a.
  const std::size_t n = b.cols();
  double* o = out.data() + i * n;
  for (std::size_t j = 0; j < n; ++j) o[j] = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double av = a(r, i);
    const double* brow = b.data() + r * n;
    for (std::size_t j = 0; j < n; ++j) o[j] += av * brow[j];
  }
}

inline void a_bt_row(const Matrix& a, const Matrix& b, Matrix& out, std::size_t i) {
  const std::size_t k = a.cols();
  const double* arow = a.data() + i * k;
  for (std::size_t j = 0; j < b.rows(); ++j) {
    const double* brow = b.data() + j * k;
    double acc = 0.0;
    for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
    out(i, j) = acc;
  }
}

inline double column_sum(const Matrix& a, std::size_t c) {
  double acc = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r) acc += a(r, c);
  return acc;
}

}  // namespace

namespace serial {

void affine(const Matrix& a, const Matrix& b, std::span<const double> bias, Matrix& out) {
  check_affine(a, b, bias, out);
  for (std::size_t i = 0; i < a.rows(); ++i) affine_row(a, b, bias, out, i);
}

void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out) {
  check(a.rows() == b.rows(), "matmul_at_b: row counts differ");
  if (out.rows() != a.cols() || out.cols() != b.cols()) out.resize(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.cols(); ++i) at_b_row(a, b, out, i);
}

void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out) {
  check(a.cols() == b.cols(), "matmul_a_bt: column counts differ");
  if (out.rows() != a.rows() || out.cols() != b.rows()) out.resize(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) a_bt_row(a, b, out, i);
}

void column_sums(const Matrix& a, std::span<double> out) {
  check(out.size() == a.cols(), "column_sums: output length");
  for (std::size_t c = 0; c < a.cols(); ++c) out[c] = column_sum(a, c);
}

}  // namespace serial

namespace omp {

void affine(const Matrix& a, const Matrix& b, std::span<const double> bias, Matrix& out) {
  check_affine(a, b, bias, out);
  const auto rows = static_cast<std::ptrdiff_t>(a.rows());
  [[maybe_unused]] const bool big = a.rows() * a.cols() * b.cols() >= kParallelWork;
#pragma omp parallel for schedule(static) if (big)
  for (std::ptrdiff_t i = 0; i < rows; ++i) affine_row(a, b, bias, out, static_cast<std::size_t>(i));
}

void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out) {
  check(a.rows() == b.rows(), "matmul_at_b: row counts differ");
  if (out.rows() != a.cols() || out.cols() != b.cols()) out.resize(a.cols(), b.cols());
  const auto rows = static_cast<std::ptrdiff_t>(a.cols());
  [[maybe_unused]] const bool big = a.rows() * a.cols() * b.cols() >= kParallelWork;
#pragma omp parallel for schedule(static) if (big)
  for (std::ptrdiff_t i = 0; i < rows; ++i) at_b_row(a, b, out, static_cast<std::size_t>(i));
}

void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out) {
  check(a.cols() == b.cols(), "matmul_a_bt: column counts differ");
  if (out.rows() != a.rows() || out.cols() != b.rows()) out.resize(a.rows(), b.rows());
  const auto rows = static_cast<std::ptrdiff_t>(a.rows());
  [[maybe_unused]] const bool big = a.rows() * a.cols() * b.rows() >= kParallelWork;
#pragma omp parallel for schedule(static) if (big)
  for (std::ptrdiff_t i = 0; i < rows; ++i) a_bt_row(a, b, out, static_cast<std::size_t>(i));
}

void column_sums(const Matrix& a, std::span<double> out) {
  check(out.size() == a.cols(), "column_sums: output length");
  const auto cols = static_cast<std::ptrdiff_t>(a.cols());
  [[maybe_unused]] const bool big = a.rows() * a.cols() >= kParallelWork;
#pragma omp parallel for schedule(static) if (big)
  for (std::ptrdiff_t c = 0; c < cols; ++c) {
    out[static_cast<std::size_t>(c)] = column_sum(a, static_cast<std::size_t>(c));
  }
}

}  // namespace omp

#ifdef _OPENMP
namespace impl = omp;
#else
namespace impl = serial;
#endif

void affine(const Matrix& a, const Matrix& b, std::span<const double> bias, Matrix& out) {
  impl::affine(a, b, bias, out);
}
void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out) { impl::matmul_at_b(a, b, out); }
void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out) { impl::matmul_a_bt(a, b, out); }
void column_sums(const Matrix& a, std::span<double> out) { impl::column_sums(a, out); }

int max_threads() noexcept {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace dtcx::kernels
