#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "chebycf/chebyshev.hpp"
#include "chebycf/partial_svd.hpp"
#include "chebycf/sparse.hpp"

namespace chebycf {

struct HyperParams {
  double phi = 1.0;       // plateau flatness
  double alpha = 0.0;     // ideal pass weight
  std::size_t eta = 128;  // ideal pass rank
  double beta = 0.0;      // degree normalisation power
  int order = 8;          // Chebyshev order K

  void validate() const;
  bool operator==(const HyperParams&) const = default;
};

// Everything needed to score a user: the graph, the Chebyshev filter, the
// optional ideal pass basis and the precomputed degree powers. Immutable
// after fit; predict and recommend_topn are safe to call concurrently.
struct ChebyCFModel {
  NormalizedGraph graph;
  ChebyFilterSpec filter;
  std::optional<IdealPassBasis> ideal;  // present iff alpha > 0
  HyperParams params;
  std::uint64_t seed = 42;
  std::uint32_t dataset_checksum = 0;
  Eigen::VectorXd degree_pow;      // d_i^beta, 1 for zero-degree items
  Eigen::VectorXd degree_pow_inv;  // d_i^-beta, 1 for zero-degree items

  std::size_t num_items() const { return graph.num_items(); }
};

ChebyCFModel fit(const InteractionDataset& dataset, const HyperParams& params,
                 std::uint64_t seed = 42, const SvdOptions& svd = {});

// Assembles a model from already-computed parts. `ideal` must be present when
// params.alpha > 0 and match params.eta.
ChebyCFModel assemble_model(NormalizedGraph graph, const HyperParams& params,
                            std::optional<IdealPassBasis> ideal,
                            std::uint64_t seed, std::uint32_t dataset_checksum);

// Degree powers d^p with the zero-degree convention (d = 0 -> 1).
Eigen::VectorXd degree_powers(const std::vector<double>& degrees, double power);

// D^beta (H_Cheby + alpha H_Ideal) D^-beta r_u on the raw binary signal.
Signal predict(const ChebyCFModel& model, const Signal& r_u);
// Column j of the node-major block is user j's signal. Matches predict
// bit-for-bit when alpha = 0; the dense ideal-pass product may round
// differently from the single-signal path.
SignalBlock predict_batch(const ChebyCFModel& model, const SignalBlock& signals);

struct ScoredItem {
  std::size_t item;
  double score;
  bool operator==(const ScoredItem&) const = default;
};

// Masked score; top_n never returns an item carrying it.
inline constexpr double kMaskedScore = -std::numeric_limits<double>::infinity();

// Highest n scores, ties by ascending index, kMaskedScore entries skipped.
std::vector<ScoredItem> top_n(std::span<const double> scores, std::size_t n);

// Overwrites the scores of every item in `seen` with kMaskedScore.
void mask_seen(std::span<double> scores, std::span<const Index> seen);

// Items with r_u = 1 are masked and never returned.
std::vector<ScoredItem> recommend_topn(const ChebyCFModel& model,
                                       const Signal& r_u, std::size_t n);

inline constexpr std::uint32_t kModelFormatVersion = 1;

void save_model(const ChebyCFModel& model, const std::filesystem::path& path);
ChebyCFModel load_model(const std::filesystem::path& path);

}  // namespace chebycf
