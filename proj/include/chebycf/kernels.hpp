#pragma once

// Data-parallel inner loops. Every kernel has a serial reference and an OpenMP
// version with the same per-element operation order, so the two produce
// bit-identical output for any thread count. Library code calls the `omp`
// versions; tests and the benchmark compare them against `serial`.

#include <cstddef>
#include <span>

#include "chebycf/sparse.hpp"

namespace chebycf::kernels {

namespace serial {

// y = A x for a node-major block x of `width` columns.
void csr_block_product(const CsrMatrix& a, std::span<const double> x,
                       std::span<double> y, std::size_t width);
// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);
// y = a * x
void scale_into(double a, std::span<const double> x, std::span<double> y);
// y = x - 2 * y   (in place on y)
void reflect_into(std::span<const double> x, std::span<double> y);
// next = 2 * lt - prev  (in place on lt)
void chebyshev_step(std::span<const double> prev, std::span<double> lt);
// Row r of the node-major block is multiplied by d[r].
void scale_rows(std::span<const double> d, std::span<double> x,
                std::size_t width);

}  // namespace serial

namespace omp {

void csr_block_product(const CsrMatrix& a, std::span<const double> x,
                       std::span<double> y, std::size_t width);
void axpy(double a, std::span<const double> x, std::span<double> y);
void scale_into(double a, std::span<const double> x, std::span<double> y);
void reflect_into(std::span<const double> x, std::span<double> y);
void chebyshev_step(std::span<const double> prev, std::span<double> lt);
void scale_rows(std::span<const double> d, std::span<double> x,
                std::size_t width);

}  // namespace omp

// Number of OpenMP threads the kernels will use (1 without OpenMP).
int max_threads();
void set_threads(int n);

}  // namespace chebycf::kernels
