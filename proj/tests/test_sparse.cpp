#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "chebycf/error.hpp"
#include "chebycf/oracle.hpp"
#include "chebycf/sparse.hpp"
#include "test_util.hpp"

using namespace chebycf;
using testutil::max_abs;

namespace {

InteractionDataset parse(const std::string& train, const std::string& test) {
  std::istringstream a(train), b(test);
  return parse_interactions(a, b);
}

}  // namespace

TEST_CASE("load: adjacency-list example") {
  const InteractionDataset d = parse("0 1 2\n1 0\n", "0 0\n1 2\n");
  CHECK(d.num_users == 2);
  CHECK(d.num_items == 3);
  CHECK(d.train.nnz() == 3);
  CHECK(d.test.nnz() == 2);
  CHECK(d.train.contains(0, 1));
  CHECK(d.train.contains(0, 2));
  CHECK(d.train.contains(1, 0));
  CHECK(d.test.contains(0, 0));
  CHECK(d.test.contains(1, 2));
}

TEST_CASE("load: empty train file gives an empty dataset that fit rejects") {
  const InteractionDataset d = parse("", "");
  CHECK(d.num_users == 0);
  CHECK(d.empty());
  CHECK_THROWS_AS(normalize(d), InvalidArgument);
}

TEST_CASE("load: external ids are remapped to dense ascending indices") {
  const InteractionDataset d = parse("10 7 3\n4 7\n", "4 99\n");
  CHECK(d.user_ids == std::vector<std::int64_t>{4, 10});
  CHECK(d.item_ids == std::vector<std::int64_t>{3, 7, 99});
  CHECK(d.train.contains(1, 0));  // user 10, item 3
  CHECK(d.train.contains(0, 1));  // user 4, item 7
  CHECK(d.test.contains(0, 2));   // user 4, item 99
}

TEST_CASE("load: duplicates collapse, blank lines are skipped") {
  const InteractionDataset d = parse("0 1 1 2\n\n0 2\n", "");
  CHECK(d.train.nnz() == 2);
  CHECK(d.duplicates_dropped == 2);
}

TEST_CASE("load: a user line without items creates a zero-degree user") {
  const InteractionDataset d = parse("0 1\n5\n", "");
  CHECK(d.num_users == 2);
  const NormalizedGraph g = normalize(d);
  CHECK(g.user_degrees()[1] == 0.0);
  CHECK(g.r_tilde().row_ptr[2] == g.r_tilde().row_ptr[1]);
}

TEST_CASE("load: malformed input reports the line") {
  try {
    parse("0 1\n1 x2\n", "");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse("0 -1\n", ""), ParseError);
  CHECK_THROWS_AS(parse("0 1.5\n", ""), ParseError);
}

TEST_CASE("load: a pair present in both splits is rejected") {
  CHECK_THROWS_AS(parse("0 1\n", "0 1\n"), ValidationError);
}

TEST_CASE("load: missing file is an I/O error") {
  CHECK_THROWS_AS(load_interactions("/nonexistent/train.txt", "/nonexistent/test.txt"),
                  IoError);
}

TEST_CASE("normalize: 2x2 hand example") {
  const NormalizedGraph g = normalize(testutil::toy_2x2());
  CHECK(g.user_degrees() == std::vector<double>{2, 1});
  CHECK(g.item_degrees() == std::vector<double>{2, 1});
  const Eigen::MatrixXd r = oracle::densify(g.r_tilde());
  Eigen::MatrixXd expected(2, 2);
  expected << 0.5, 1 / std::sqrt(2.0), 1 / std::sqrt(2.0), 0.0;
  CHECK(max_abs(r - expected) <= 1e-15);

  const Signal y = apply_r_tilde(g, Signal::Unit(2, 0));
  CHECK(y[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(y[1] == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("normalize: identity stays identity") {
  const NormalizedGraph g = normalize(testutil::identity_dataset(3));
  CHECK(oracle::densify(g.r_tilde()) == Eigen::MatrixXd::Identity(3, 3));
  const Signal x = testutil::random_vector(3, 1);
  CHECK(apply_r_tilde(g, x) == x);
  CHECK(apply_gram(g, x) == x);
  CHECK(apply_rescaled_laplacian(g, x) == -x);
}

TEST_CASE("normalize: largest singular value of a random graph is 1") {
  const NormalizedGraph g = normalize(testutil::random_graph(50, 80, 0.1, 7));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(oracle::densify(g.r_tilde()));
  CHECK(std::abs(svd.singularValues()[0] - 1.0) <= 1e-10);
}

TEST_CASE("degree consistency") {
  const InteractionDataset d = testutil::random_graph(70, 90, 0.05, 9);
  const NormalizedGraph g = normalize(d);
  const double su = std::accumulate(g.user_degrees().begin(), g.user_degrees().end(), 0.0);
  const double si = std::accumulate(g.item_degrees().begin(), g.item_degrees().end(), 0.0);
  CHECK(su == static_cast<double>(d.train.nnz()));
  CHECK(si == static_cast<double>(d.train.nnz()));
}

TEST_CASE("matrix-free operators match the dense reference") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const NormalizedGraph g = normalize(testutil::random_graph(60, 45, 0.08, seed));
    const Eigen::MatrixXd r = oracle::densify(g.r_tilde());
    const Eigen::MatrixXd l = oracle::dense_laplacian(g);
    const Signal x = testutil::random_vector(45, seed * 10);
    const Signal u = testutil::random_vector(60, seed * 10 + 1);
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(45, 45);
    CHECK(max_abs(apply_r_tilde(g, x) - r * x) <= 1e-12);
    CHECK(max_abs(apply_r_tilde_t(g, u) - r.transpose() * u) <= 1e-12);
    CHECK(max_abs(apply_gram(g, x) - r.transpose() * r * x) <= 1e-12);
    CHECK(max_abs(apply_rescaled_laplacian(g, x) - (2 * l - eye) * x) <= 1e-12);
    CHECK(apply_gram(g, Signal(Signal::Zero(45))) == Signal::Zero(45));
  }
}

TEST_CASE("batched operators equal the column-wise single-signal ones") {
  const NormalizedGraph g = normalize(testutil::random_graph(60, 45, 0.08, 3));
  SignalBlock x(45, 5);
  for (Eigen::Index j = 0; j < 5; ++j) x.col(j) = testutil::random_vector(45, 40 + j);
  const SignalBlock gx = apply_gram(g, x);
  const SignalBlock lx = apply_rescaled_laplacian(g, x);
  for (Eigen::Index j = 0; j < 5; ++j) {
    const Signal col = x.col(j);
    CHECK(Signal(gx.col(j)) == apply_gram(g, col));
    CHECK(Signal(lx.col(j)) == apply_rescaled_laplacian(g, col));
  }
}

TEST_CASE("gram is symmetric and the Laplacian Rayleigh quotient lies in [0, 1]") {
  const NormalizedGraph g = normalize(testutil::random_graph(80, 70, 0.06, 4));
  for (std::uint64_t s = 0; s < 100; ++s) {
    Signal x = testutil::random_vector(70, 1000 + s);
    const Signal y = testutil::random_vector(70, 2000 + s);
    CHECK(std::abs(apply_gram(g, x).dot(y) - x.dot(apply_gram(g, y))) <= 1e-10);
    x.normalize();
    const double q = x.dot(x - apply_gram(g, x));
    CHECK(q >= -1e-10);
    CHECK(q <= 1.0 + 1e-10);
  }
}

TEST_CASE("rescaled Laplacian plus twice the gram recovers x") {
  // L~x = x - 2Gx is evaluated as such, so the identity holds to rounding of
  // the final addition only.
  const NormalizedGraph g = normalize(testutil::random_graph(80, 70, 0.06, 5));
  const Signal x = testutil::random_vector(70, 6);
  const Signal back = apply_rescaled_laplacian(g, x) + 2.0 * apply_gram(g, x);
  CHECK(max_abs(back - x) <= 1e-14 * std::max(1.0, x.cwiseAbs().maxCoeff()) * 4);
}

TEST_CASE("rescaled Laplacian maps an eigenvector to (2 lambda - 1) times itself") {
  const NormalizedGraph g = normalize(testutil::random_graph(40, 30, 0.1, 8));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(oracle::dense_laplacian(g));
  for (Eigen::Index i = 0; i < 30; i += 7) {
    const Signal q = es.eigenvectors().col(i);
    const double lambda = es.eigenvalues()[i];
    CHECK(max_abs(apply_rescaled_laplacian(g, q) - (2 * lambda - 1) * q) <= 1e-12);
  }
}

TEST_CASE("zero-degree items keep an all-zero column") {
  // item 2 never appears in train
  const InteractionDataset d = make_dataset(2, 3, {{0, 0}, {1, 1}}, {{0, 2}});
  const NormalizedGraph g = normalize(d);
  CHECK(g.item_degrees()[2] == 0.0);
  const Eigen::MatrixXd r = oracle::densify(g.r_tilde());
  CHECK(r.col(2).isZero());
  CHECK(r.allFinite());
}

TEST_CASE("csr pattern from pairs validates ranges") {
  CHECK_THROWS_AS(CsrPattern::from_pairs(2, 2, {{0, 2}}), InvalidArgument);
  std::size_t dups = 0;
  const CsrPattern p = CsrPattern::from_pairs(2, 3, {{1, 2}, {0, 1}, {1, 2}, {1, 0}}, &dups);
  CHECK(dups == 1);
  CHECK(p.row_ptr == std::vector<std::int64_t>{0, 1, 3});
  CHECK(p.col_idx == std::vector<Index>{1, 0, 2});
}

TEST_CASE("dataset checksum distinguishes splits") {
  const InteractionDataset a = make_dataset(2, 2, {{0, 0}, {1, 1}}, {{0, 1}});
  const InteractionDataset b = make_dataset(2, 2, {{0, 0}, {0, 1}}, {{1, 1}});
  CHECK(a.checksum() != b.checksum());
  CHECK(a.checksum() == make_dataset(2, 2, {{1, 1}, {0, 0}}, {{0, 1}}).checksum());
}
