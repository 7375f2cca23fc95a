#include "chebycf/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "chebycf/error.hpp"
#include "chebycf/kernels.hpp"

namespace chebycf {

void HyperParams::validate() const {
  if (!(phi > 0.0)) throw InvalidArgument("phi must be > 0");
  if (!(alpha >= 0.0)) throw InvalidArgument("alpha must be >= 0");
  if (!(beta >= 0.0)) throw InvalidArgument("beta must be >= 0");
  if (order < 0) throw InvalidArgument("order must be >= 0");
  if (alpha > 0.0 && eta < 1) throw InvalidArgument("eta must be >= 1");
}

Eigen::VectorXd degree_powers(const std::vector<double>& degrees, double power) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(degrees.size()));
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] =
        degrees[i] > 0.0 ? std::pow(degrees[i], power) : 1.0;
  }
  return out;
}

ChebyCFModel assemble_model(NormalizedGraph graph, const HyperParams& params,
                            std::optional<IdealPassBasis> ideal,
                            std::uint64_t seed,
                            std::uint32_t dataset_checksum) {
  params.validate();
  ChebyCFModel m;
  m.params = params;
  m.seed = seed;
  m.dataset_checksum = dataset_checksum;
  m.filter = ChebyFilterSpec::plateau(params.phi, params.order);
  if (params.alpha > 0.0) {
    if (!ideal) throw InvalidArgument("alpha > 0 requires an ideal pass basis");
    if (ideal->eta != params.eta) {
      throw InvalidArgument("ideal pass basis has eta " +
                            std::to_string(ideal->eta) + ", params ask for " +
                            std::to_string(params.eta));
    }
    m.ideal = std::move(ideal);
  }
  m.degree_pow = degree_powers(graph.item_degrees(), params.beta);
  m.degree_pow_inv = degree_powers(graph.item_degrees(), -params.beta);
  m.graph = std::move(graph);
  return m;
}

ChebyCFModel fit(const InteractionDataset& dataset, const HyperParams& params,
                 std::uint64_t seed, const SvdOptions& svd) {
  params.validate();
  if (dataset.empty()) throw InvalidArgument("cannot fit on an empty dataset");
  NormalizedGraph graph = normalize(dataset);
  std::optional<IdealPassBasis> ideal;
  if (params.alpha > 0.0) {
    SvdOptions opts = svd;
    opts.seed = seed;
    ideal = truncated_svd(graph, params.eta, opts);
  }
  return assemble_model(std::move(graph), params, std::move(ideal), seed,
                        dataset.checksum());
}

SignalBlock predict_batch(const ChebyCFModel& model,
                          const SignalBlock& signals) {
  const std::size_t items = model.num_items();
  if (static_cast<std::size_t>(signals.rows()) != items) {
    throw DimensionMismatch("predict", items, signals.rows());
  }
  const auto width = static_cast<std::size_t>(signals.cols());
  const std::size_t total = items * width;

  SignalBlock y = signals;
  kernels::omp::scale_rows({model.degree_pow_inv.data(), items},
                           {y.data(), total}, width);
  SignalBlock z = apply_chebyshev_filter(model.filter, model.graph, y);
  if (model.ideal) {
    const SignalBlock ideal = apply_ideal(*model.ideal, y);
    kernels::omp::axpy(model.params.alpha, {ideal.data(), total},
                       {z.data(), total});
  }
  kernels::omp::scale_rows({model.degree_pow.data(), items}, {z.data(), total},
                           width);
  return z;
}

Signal predict(const ChebyCFModel& model, const Signal& r_u) {
  if (static_cast<std::size_t>(r_u.size()) != model.num_items()) {
    throw DimensionMismatch("predict", model.num_items(), r_u.size());
  }
  const SignalBlock in = Eigen::Map<const SignalBlock>(r_u.data(), r_u.size(), 1);
  const SignalBlock out = predict_batch(model, in);
  return Eigen::Map<const Signal>(out.data(), out.rows());
}

void mask_seen(std::span<double> scores, std::span<const Index> seen) {
  for (const Index i : seen) scores[static_cast<std::size_t>(i)] = kMaskedScore;
}

std::vector<ScoredItem> top_n(std::span<const double> scores, std::size_t n) {
  if (n < 1) throw InvalidArgument("top-n needs n >= 1");
  std::vector<std::size_t> candidates;
  candidates.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] != kMaskedScore) candidates.push_back(i);
  }
  const auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  };
  const std::size_t k = std::min(n, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + k,
                    candidates.end(), better);
  std::vector<ScoredItem> out;
  out.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    out.push_back({candidates[j], scores[candidates[j]]});
  }
  return out;
}

std::vector<ScoredItem> recommend_topn(const ChebyCFModel& model,
                                       const Signal& r_u, std::size_t n) {
  if (n < 1) throw InvalidArgument("recommend_topn needs n >= 1");
  Signal scores = predict(model, r_u);
  for (Eigen::Index i = 0; i < r_u.size(); ++i) {
    if (r_u[i] != 0.0) scores[i] = kMaskedScore;
  }
  return top_n({scores.data(), static_cast<std::size_t>(scores.size())}, n);
}

}  // namespace chebycf
