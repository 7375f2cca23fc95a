#include "chebycf/kernels.hpp"

#include <cstdint>

#ifdef CHEBYCF_HAVE_OPENMP
#include <omp.h>
#endif

namespace chebycf::kernels {
namespace {

// One CSR row against a node-major block. Shared by both variants so the
// accumulation order is identical.
inline void csr_row(const CsrMatrix& a, std::size_t r, const double* x,
                    double* y, std::size_t width) {
  double* out = y + r * width;
  for (std::size_t j = 0; j < width; ++j) out[j] = 0.0;
  for (std::int64_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) {
    const double v = a.values[p];
    const double* in = x + static_cast<std::size_t>(a.col_idx[p]) * width;
    for (std::size_t j = 0; j < width; ++j) out[j] += v * in[j];
  }
}

// Below this many elements the OpenMP fork costs more than the loop.
constexpr std::ptrdiff_t kParallelThreshold = 1 << 14;

}  // namespace

namespace serial {

void csr_block_product(const CsrMatrix& a, std::span<const double> x,
                       std::span<double> y, std::size_t width) {
  for (std::size_t r = 0; r < a.rows; ++r) {
    csr_row(a, r, x.data(), y.data(), width);
  }
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

void scale_into(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a * x[i];
}

void reflect_into(std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] - 2.0 * y[i];
}

void chebyshev_step(std::span<const double> prev, std::span<double> lt) {
  for (std::size_t i = 0; i < lt.size(); ++i) lt[i] = 2.0 * lt[i] - prev[i];
}

void scale_rows(std::span<const double> d, std::span<double> x,
                std::size_t width) {
  for (std::size_t r = 0; r < d.size(); ++r) {
    for (std::size_t j = 0; j < width; ++j) x[r * width + j] *= d[r];
  }
}

}  // namespace serial

namespace omp {

void csr_block_product(const CsrMatrix& a, std::span<const double> x,
                       std::span<double> y, std::size_t width) {
  const auto rows = static_cast<std::ptrdiff_t>(a.rows);
  const bool parallel =
      static_cast<std::ptrdiff_t>(a.nnz() * width) > kParallelThreshold;
#pragma omp parallel for schedule(dynamic, 64) if (parallel)
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    csr_row(a, static_cast<std::size_t>(r), x.data(), y.data(), width);
  }
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  const auto n = static_cast<std::ptrdiff_t>(y.size());
#pragma omp parallel for schedule(static) if (n > kParallelThreshold)
  for (std::ptrdiff_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_into(double a, std::span<const double> x, std::span<double> y) {
  const auto n = static_cast<std::ptrdiff_t>(y.size());
#pragma omp parallel for schedule(static) if (n > kParallelThreshold)
  for (std::ptrdiff_t i = 0; i < n; ++i) y[i] = a * x[i];
}

void reflect_into(std::span<const double> x, std::span<double> y) {
  const auto n = static_cast<std::ptrdiff_t>(y.size());
#pragma omp parallel for schedule(static) if (n > kParallelThreshold)
  for (std::ptrdiff_t i = 0; i < n; ++i) y[i] = x[i] - 2.0 * y[i];
}

void chebyshev_step(std::span<const double> prev, std::span<double> lt) {
  const auto n = static_cast<std::ptrdiff_t>(lt.size());
#pragma omp parallel for schedule(static) if (n > kParallelThreshold)
  for (std::ptrdiff_t i = 0; i < n; ++i) lt[i] = 2.0 * lt[i] - prev[i];
}

void scale_rows(std::span<const double> d, std::span<double> x,
                std::size_t width) {
  const auto rows = static_cast<std::ptrdiff_t>(d.size());
  const bool parallel =
      static_cast<std::ptrdiff_t>(d.size() * width) > kParallelThreshold;
#pragma omp parallel for schedule(static) if (parallel)
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < width; ++j) x[r * width + j] *= d[r];
  }
}

}  // namespace omp

int max_threads() {
#ifdef CHEBYCF_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int n) {
#ifdef CHEBYCF_HAVE_OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace chebycf::kernels
