#include <doctest.h>

#include <vector>

#include "chebycf/kernels.hpp"
#include "test_util.hpp"

using namespace chebycf;

namespace {

std::vector<double> random_buffer(std::size_t n, std::uint64_t seed) {
  const Eigen::VectorXd v = testutil::random_vector(static_cast<Eigen::Index>(n), seed);
  return {v.data(), v.data() + v.size()};
}

struct ThreadGuard {
  int saved = kernels::max_threads();
  explicit ThreadGuard(int n) { kernels::set_threads(n); }
  ~ThreadGuard() { kernels::set_threads(saved); }
};

}  // namespace

TEST_CASE("omp kernels are bit-identical to the serial reference") {
  ThreadGuard threads(4);
  const NormalizedGraph g = normalize(testutil::random_graph(3000, 2500, 0.004, 11));
  const CsrMatrix& a = g.r_tilde_t();

  for (const std::size_t width : {1u, 7u, 64u}) {
    CAPTURE(width);
    const auto x = random_buffer(a.cols * width, 1 + width);
    std::vector<double> ys(a.rows * width), yo(a.rows * width);
    kernels::serial::csr_block_product(a, x, ys, width);
    kernels::omp::csr_block_product(a, x, yo, width);
    CHECK(ys == yo);

    auto d = random_buffer(a.rows, 5);
    auto rs = ys, ro = yo;
    kernels::serial::scale_rows(d, rs, width);
    kernels::omp::scale_rows(d, ro, width);
    CHECK(rs == ro);
  }

  const std::size_t n = 100000;
  const auto x = random_buffer(n, 21);
  const auto base = random_buffer(n, 22);

  auto s = base, o = base;
  kernels::serial::axpy(0.3, x, s);
  kernels::omp::axpy(0.3, x, o);
  CHECK(s == o);

  kernels::serial::scale_into(-1.7, x, s);
  kernels::omp::scale_into(-1.7, x, o);
  CHECK(s == o);

  s = base;
  o = base;
  kernels::serial::reflect_into(x, s);
  kernels::omp::reflect_into(x, o);
  CHECK(s == o);

  s = base;
  o = base;
  kernels::serial::chebyshev_step(x, s);
  kernels::omp::chebyshev_step(x, o);
  CHECK(s == o);
}

TEST_CASE("kernel arithmetic") {
  std::vector<double> y{1.0, 2.0};
  const std::vector<double> x{3.0, 4.0};
  kernels::serial::axpy(2.0, x, y);
  CHECK(y == std::vector<double>{7.0, 10.0});
  kernels::serial::reflect_into(x, y);  // x - 2y
  CHECK(y == std::vector<double>{-11.0, -16.0});
  kernels::serial::chebyshev_step(x, y);  // 2y - x
  CHECK(y == std::vector<double>{-25.0, -36.0});
  std::vector<double> block{1, 2, 3, 4, 5, 6};
  kernels::serial::scale_rows(std::vector<double>{2.0, 0.5}, block, 3);
  CHECK(block == std::vector<double>{2, 4, 6, 2, 2.5, 3});
}

TEST_CASE("batched filtering does not depend on the thread count") {
  const NormalizedGraph g = normalize(testutil::random_graph(400, 300, 0.03, 3));
  SignalBlock x(300, 50);
  for (Eigen::Index j = 0; j < x.cols(); ++j) x.col(j) = testutil::random_vector(300, 100 + j);
  SignalBlock one, four;
  {
    ThreadGuard t(1);
    one = apply_rescaled_laplacian(g, x);
  }
  {
    ThreadGuard t(4);
    four = apply_rescaled_laplacian(g, x);
  }
  CHECK(one == four);
}
