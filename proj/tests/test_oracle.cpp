#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "chebycf/error.hpp"
#include "chebycf/oracle.hpp"
#include "chebycf/verify.hpp"
#include "test_util.hpp"

using namespace chebycf;
using testutil::max_abs;

TEST_CASE("dense spectrum: identity and empty interaction") {
  const oracle::DenseSpectrum id = oracle::dense_spectrum(normalize(testutil::identity_dataset(4)));
  CHECK(max_abs(id.eigenvalues) <= 1e-15);

  // one interacting pair plus three inert items: L* = I on the inert part
  const InteractionDataset d = make_dataset(1, 4, {{0, 0}}, {});
  const oracle::DenseSpectrum s = oracle::dense_spectrum(normalize(d));
  CHECK(s.eigenvalues[0] == doctest::Approx(0.0));
  for (Eigen::Index i = 1; i < 4; ++i) CHECK(s.eigenvalues[i] == 1.0);
}

TEST_CASE("dense spectrum reconstructs L* and pairs with the SVD") {
  const NormalizedGraph g = normalize(testutil::random_graph(70, 50, 0.08, 1));
  const oracle::DenseSpectrum s = oracle::dense_spectrum(g);
  const Eigen::MatrixXd l = oracle::dense_laplacian(g);
  const Eigen::MatrixXd rebuilt =
      s.eigenvectors * s.eigenvalues.asDiagonal() * s.eigenvectors.transpose();
  CHECK((rebuilt - l).norm() / l.norm() <= 1e-7);
  for (Eigen::Index i = 1; i < s.eigenvalues.size(); ++i) {
    CHECK(s.eigenvalues[i] >= s.eigenvalues[i - 1]);
  }
  const oracle::PairingCheck p = oracle::verify_singular_eigen_pairing(s);
  CHECK(p.max_value_deviation <= 1e-9);
  CHECK(p.max_subspace_angle <= 1e-6);
}

TEST_CASE("dense filter examples") {
  const NormalizedGraph g = normalize(testutil::random_graph(70, 50, 0.08, 2));
  const oracle::DenseSpectrum s = oracle::dense_spectrum(g);
  const Signal x = testutil::random_vector(50, 3);
  CHECK(max_abs(oracle::dense_filter(s, [](double) { return 1.0; }, x) - x) <= 1e-12);
  CHECK(max_abs(oracle::dense_filter(s, [](double l) { return 1.0 - l; }, x) -
                apply_gram(g, x)) <= 1e-9);
}

TEST_CASE("low-rank equivalence check: examples") {
  const NormalizedGraph toy = normalize(testutil::toy_2x2());
  CHECK(oracle::verify_lowrank_equivalence(toy, 1).max_deviation <= 1e-10);
  CHECK(oracle::verify_lowrank_equivalence(toy, 2).max_deviation <= 1e-8);

  const NormalizedGraph g = normalize(testutil::random_graph(30, 50, 0.1, 4));
  const oracle::LowRankEquivalenceCheck c = oracle::verify_lowrank_equivalence(g, 5);
  CHECK(c.max_deviation <= 1e-8);
  CHECK(c.requested_d == 5);
  // full rank: no cutoff
  CHECK(oracle::verify_lowrank_equivalence(g, 30).max_deviation <= 1e-8);
}

TEST_CASE("low-rank equivalence check reports degenerate truncations") {
  // identity(4): all singular values equal, so any 1 <= d < 4 is ambiguous
  const NormalizedGraph id = normalize(testutil::identity_dataset(4));
  const oracle::LowRankEquivalenceCheck c = oracle::verify_lowrank_equivalence(id, 2);
  CHECK(c.degenerate);
  CHECK(c.effective_d != 2);
  CHECK(c.max_deviation <= 1e-8);
}

TEST_CASE("low-rank residual equals the tail of the singular values") {
  const NormalizedGraph g = normalize(testutil::random_graph(40, 60, 0.1, 5));
  for (const std::size_t d : {1u, 3u, 8u, 40u}) {
    CHECK(oracle::verify_eckart_young(g, d).deviation() <= 1e-8);
  }
}

TEST_CASE("linear low-pass filter") {
  const NormalizedGraph g = normalize(testutil::random_graph(70, 50, 0.08, 6));
  const oracle::DenseSpectrum s = oracle::dense_spectrum(g);
  const Signal x = testutil::random_vector(50, 7);
  CHECK(max_abs(oracle::linear_lowpass_filter(g, 1, x) - apply_gram(g, x)) <= 1e-15);
  for (int layers = 1; layers <= 4; ++layers) {
    CHECK(max_abs(oracle::linear_lowpass_filter(g, layers, x) -
                  oracle::dense_filter(s, oracle::linear_lowpass_transfer(layers), x)) <= 1e-9);
  }
  const Signal q = s.eigenvectors.col(10);
  const double lambda = s.eigenvalues[10];
  const double gain = ((1 - lambda) + std::pow(1 - lambda, 2) + std::pow(1 - lambda, 3)) / 3;
  CHECK(max_abs(oracle::linear_lowpass_filter(g, 3, q) - gain * q) <= 1e-12);
  CHECK_THROWS_AS(oracle::linear_lowpass_filter(g, 0, x), InvalidArgument);
}

TEST_CASE("truncated filter") {
  const NormalizedGraph g = normalize(testutil::random_graph(70, 50, 0.08, 8));
  const oracle::DenseSpectrum s = oracle::dense_spectrum(g);
  const auto h = oracle::chebyshev_transfer(ChebyFilterSpec::plateau(3.0, 8));
  const Signal x = testutil::random_vector(50, 9);
  CHECK(max_abs(oracle::truncated_filter(s, h, 1.0, x) - oracle::dense_filter(s, h, x)) <=
        1e-14);
  // keep a single component
  const Signal q0 = s.eigenvectors.col(0);
  const Signal one = oracle::truncated_filter(s, h, 1e-6, x);
  CHECK(max_abs(one - h(s.eigenvalues[0]) * q0.dot(x) * q0) <= 1e-12);
  CHECK_THROWS_AS(oracle::truncated_filter(s, h, 0.0, x), InvalidArgument);
}

TEST_CASE("generalised-Laplacian filter reduces to the plain filter at beta = 0") {
  const NormalizedGraph g = normalize(testutil::random_graph(70, 50, 0.08, 10));
  const oracle::DenseSpectrum s = oracle::dense_spectrum(g);
  const auto spec = ChebyFilterSpec::plateau(2.0, 8);
  const Eigen::MatrixXd a = oracle::generalized_laplacian_filter(g, spec, 0.0, 4, 0.0);
  const Eigen::MatrixXd b = oracle::dense_filter_matrix(s, oracle::chebyshev_transfer(spec));
  CHECK(max_abs(a - b) <= 1e-9);
}

TEST_CASE("principal angle") {
  const Eigen::MatrixXd e = Eigen::MatrixXd::Identity(4, 2);
  CHECK(oracle::principal_angle(e, e) <= 1e-15);
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(4, 2);
  f(0, 0) = 1;
  f(2, 1) = 1;
  CHECK(oracle::principal_angle(e, f) == doctest::Approx(M_PI / 2));
}

TEST_CASE("oracle item cap") {
  const NormalizedGraph g = normalize(testutil::random_graph(70, 50, 0.08, 11));
  oracle::OracleOptions o;
  o.item_cap = 40;
  CHECK_THROWS_AS(oracle::dense_spectrum(g, o), InvalidArgument);
}

TEST_CASE("verification suite passes on a few instances") {
  verify::VerifyOptions o;
  o.instances = 3;
  o.seed = 5;
  for (const auto& r : verify::run_verification(o)) {
    CAPTURE(r.name);
    CHECK(r.passed());
  }
}
