#include <doctest.h>

#include <cmath>

#include "chebycf/error.hpp"
#include "chebycf/oracle.hpp"
#include "chebycf/pipeline.hpp"
#include "test_util.hpp"

using namespace chebycf;
using testutil::max_abs;

TEST_CASE("hyper-parameter validation") {
  CHECK_NOTHROW(HyperParams{}.validate());
  CHECK_THROWS_AS((HyperParams{0.0, 0.0, 128, 0.0, 8}.validate()), InvalidArgument);
  CHECK_THROWS_AS((HyperParams{1.0, -0.1, 128, 0.0, 8}.validate()), InvalidArgument);
  CHECK_THROWS_AS((HyperParams{1.0, 0.1, 0, 0.0, 8}.validate()), InvalidArgument);
  CHECK_THROWS_AS((HyperParams{1.0, 0.0, 128, -0.5, 8}.validate()), InvalidArgument);
}

TEST_CASE("fit: alpha = 0 builds no ideal basis and predicts the plain filter") {
  const InteractionDataset d = testutil::random_graph(60, 50, 0.08, 1);
  const ChebyCFModel m = fit(d, {3.0, 0.0, 8, 0.0, 8});
  CHECK_FALSE(m.ideal.has_value());
  const Signal r = d.train_signal(0);
  CHECK(predict(m, r) == apply_chebyshev_filter(m.filter, m.graph, r));
}

TEST_CASE("fit: beta = 0 gives unit degree powers") {
  const ChebyCFModel m = fit(testutil::random_graph(60, 50, 0.08, 2), {});
  CHECK(m.degree_pow == Eigen::VectorXd::Ones(50));
  CHECK(m.degree_pow_inv == Eigen::VectorXd::Ones(50));
}

TEST_CASE("fit rejects an empty dataset") {
  CHECK_THROWS_AS(fit(InteractionDataset{}, {}), InvalidArgument);
}

TEST_CASE("degree powers treat zero degree as 1") {
  const Eigen::VectorXd p = degree_powers({4.0, 0.0, 9.0}, 0.5);
  CHECK(p[0] == 2.0);
  CHECK(p[1] == 1.0);
  CHECK(p[2] == 3.0);
}

TEST_CASE("predict: zero signal and identity filter") {
  const InteractionDataset d = testutil::random_graph(60, 50, 0.08, 3);
  const ChebyCFModel m = fit(d, {2.0, 0.3, 6, 0.4, 8});
  CHECK(predict(m, Signal::Zero(50)) == Signal::Zero(50));

  // identity graph, c = [1, 0, ...], any beta
  ChebyCFModel id = assemble_model(normalize(testutil::identity_dataset(7)),
                                   {1.0, 0.0, 1, 0.7, 8}, std::nullopt, 42, 0);
  id.filter = ChebyFilterSpec::from_coefficients({1, 0, 0, 0, 0, 0, 0, 0, 0});
  const Signal r = testutil::random_vector(7, 4);
  CHECK(max_abs(predict(id, r) - r) <= 1e-15);
}

TEST_CASE("predict matches the dense oracle with every component on") {
  const InteractionDataset d = testutil::random_graph(80, 60, 0.08, 5);
  const HyperParams p{4.0, 0.3, 6, 0.3, 8};
  const ChebyCFModel m = fit(d, p);
  const oracle::DenseSpectrum s = oracle::dense_spectrum(m.graph);
  const Eigen::MatrixXd h = oracle::dense_filter_matrix(s, oracle::chebyshev_transfer(m.filter)) +
                            p.alpha * oracle::dense_ideal_projector(s, p.eta);
  const Eigen::MatrixXd full =
      m.degree_pow.asDiagonal() * h * m.degree_pow_inv.asDiagonal();
  for (std::size_t u = 0; u < 10; ++u) {
    const Signal r = d.train_signal(u);
    CHECK(max_abs(predict(m, r) - full * r) <= 1e-7);
  }
}

TEST_CASE("predict: alpha enters additively") {
  const InteractionDataset d = testutil::random_graph(80, 60, 0.08, 6);
  const NormalizedGraph g = normalize(d);
  const IdealPassBasis basis = truncated_svd(g, 6);
  const ChebyCFModel with = assemble_model(g, {4.0, 0.4, 6, 0.3, 8}, basis, 42, 0);
  const ChebyCFModel without = assemble_model(g, {4.0, 0.0, 6, 0.3, 8}, std::nullopt, 42, 0);
  for (std::size_t u = 0; u < 5; ++u) {
    const Signal r = d.train_signal(u);
    const Signal expected =
        0.4 * with.degree_pow.cwiseProduct(
                  apply_ideal(basis, Signal(with.degree_pow_inv.cwiseProduct(r))));
    CHECK(max_abs(predict(with, r) - predict(without, r) - expected) <= 1e-10);
  }
}

TEST_CASE("predict is linear in the user signal") {
  const InteractionDataset d = testutil::random_graph(80, 60, 0.08, 7);
  const ChebyCFModel m = fit(d, {2.0, 0.2, 4, 0.2, 8});
  const Signal a = d.train_signal(0);
  const Signal b = d.train_signal(1);
  CHECK(max_abs(predict(m, Signal(2 * a + b)) - (2 * predict(m, a) + predict(m, b))) <= 1e-10);
}

TEST_CASE("predict_batch equals per-user predict") {
  const InteractionDataset d = testutil::random_graph(80, 60, 0.08, 8);
  const std::vector<std::size_t> users{0, 3, 5, 9};
  const SignalBlock signals = d.train_signals(users);
  // Without the ideal pass both paths run the same sparse kernels.
  const ChebyCFModel plain = fit(d, {2.0, 0.0, 4, 0.2, 8});
  const SignalBlock a = predict_batch(plain, signals);
  // The ideal pass goes through dense GEMM vs GEMV, equal up to rounding.
  const ChebyCFModel full = fit(d, {2.0, 0.2, 4, 0.2, 8});
  const SignalBlock b = predict_batch(full, signals);
  for (std::size_t j = 0; j < users.size(); ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    const Signal r = d.train_signal(users[j]);
    CHECK(Signal(a.col(col)) == predict(plain, r));
    CHECK(max_abs(Signal(b.col(col)) - predict(full, r)) <= 1e-12);
  }
}

TEST_CASE("top_n and recommend_topn") {
  const std::vector<double> scores{0.5, 0.9, 0.9, 0.1};
  std::vector<double> masked = scores;
  const std::vector<Index> seen{0};
  mask_seen(masked, seen);
  CHECK(masked[0] == kMaskedScore);
  const auto top = top_n(masked, 2);
  REQUIRE(top.size() == 2);
  CHECK(top[0].item == 1);
  CHECK(top[1].item == 2);

  std::vector<double> all(3, kMaskedScore);
  CHECK(top_n(all, 5).empty());
  CHECK(top_n(scores, 10).size() == 4);

  // every item seen -> nothing to recommend
  const InteractionDataset full = make_dataset(2, 2, {{0, 0}, {0, 1}, {1, 0}});
  const ChebyCFModel m = fit(full, {});
  CHECK(recommend_topn(m, full.train_signal(0), 3).empty());
}

TEST_CASE("recommend_topn returns the dense-oracle argmax over unseen items") {
  const InteractionDataset d =
      make_dataset(2, 5, {{0, 0}, {0, 1}, {1, 1}, {1, 2}, {1, 3}, {0, 4}});
  const HyperParams p{2.0, 0.0, 1, 0.0, 8};
  const ChebyCFModel m = fit(d, p);
  const oracle::DenseSpectrum s = oracle::dense_spectrum(m.graph);
  const Signal r = d.train_signal(0);
  const Signal ref = oracle::dense_filter(s, oracle::chebyshev_transfer(m.filter), r);
  Eigen::Index best = -1;
  for (Eigen::Index i = 0; i < 5; ++i) {
    if (r[i] != 0) continue;
    if (best < 0 || ref[i] > ref[best]) best = i;
  }
  const auto top = recommend_topn(m, r, 1);
  REQUIRE(top.size() == 1);
  CHECK(static_cast<Eigen::Index>(top[0].item) == best);
}
