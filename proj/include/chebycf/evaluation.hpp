#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "chebycf/pipeline.hpp"

namespace chebycf {

// |top-n ∩ relevant| / |relevant|. `relevant` must be sorted and non-empty.
double recall_at_n(std::span<const std::size_t> recommended,
                   std::span<const Index> relevant, std::size_t n);

// Binary-relevance NDCG with a 1/log2(p+1) discount; the ideal DCG is
// truncated at min(n, |relevant|).
double ndcg_at_n(std::span<const std::size_t> recommended,
                 std::span<const Index> relevant, std::size_t n);

struct MetricsReport {
  std::map<std::size_t, double> recall_at;
  std::map<std::size_t, double> ndcg_at;
  double per_user_time = 0.0;  // seconds, scoring + top-N selection
  std::size_t num_evaluated_users = 0;
  HyperParams params;
};

struct EvalOptions {
  std::vector<std::size_t> n_values{10, 20};
  std::size_t batch_size = 256;
};

// Scores a node-major block of user signals (one column per user).
using BatchScorer = std::function<SignalBlock(const SignalBlock&)>;

// Users with at least one test item, ascending.
std::vector<std::size_t> evaluated_users(const InteractionDataset& dataset);

// Ranks every evaluated user's unseen items with `scorer` and averages the
// metrics. Per-user values are summed in user order, so the report does not
// depend on the thread count.
MetricsReport evaluate_scorer(const InteractionDataset& dataset,
                              const BatchScorer& scorer,
                              const EvalOptions& options = {});

// Refuses a model fitted on a different split (checksum mismatch).
MetricsReport evaluate(const ChebyCFModel& model,
                       const InteractionDataset& dataset,
                       const EvalOptions& options = {});

// Per-axis value lists; the search covers their Cartesian product.
struct HyperGrid {
  std::vector<double> phi{1.0};
  std::vector<double> alpha{0.0};
  std::vector<std::size_t> eta{128};
  std::vector<double> beta{0.0};
  std::vector<int> order{8};

  // phi 1..20 step 0.5, alpha 0..0.5 step 0.1, eta 2^7..2^11,
  // beta 0..0.5 step 0.1, K = 8.
  static HyperGrid standard();
  std::size_t cardinality() const;
  // Combinations in lexicographic (phi, alpha, eta, beta, order) order.
  std::vector<HyperParams> combinations() const;
};

struct GridOptions {
  EvalOptions eval;
  std::size_t n_select = 20;
  std::uint64_t seed = 42;
  SvdOptions svd;
  std::function<void(std::size_t done, std::size_t total)> progress;
};

struct GridResult {
  std::vector<MetricsReport> reports;  // in HyperGrid::combinations() order
  std::size_t best_index = 0;
  HyperParams best() const { return reports.at(best_index).params; }
};

// Evaluates every combination. The graph is normalised once, one SVD basis is
// computed per eta, and the Chebyshev recurrence terms are shared by all phi
// values; the resulting metrics are bit-identical to fitting and evaluating
// each combination separately. Selection: Recall@n_select, then NDCG@20, then
// the lexicographically smallest parameters.
GridResult grid_search(const InteractionDataset& dataset, const HyperGrid& grid,
                       const GridOptions& options = {});

// Index of the winner among `reports` under the rule above.
std::size_t select_best(const std::vector<MetricsReport>& reports,
                        std::size_t n_select);

// "dataset,phi,alpha,eta,beta,K,recall@10,recall@20,ndcg@10,ndcg@20,mean_user_time_s"
inline constexpr const char* kMetricsCsvHeader =
    "dataset,phi,alpha,eta,beta,K,recall@10,recall@20,ndcg@10,ndcg@20,"
    "mean_user_time_s";
std::string metrics_csv_row(const std::string& dataset,
                            const MetricsReport& report);
std::string format_number(double v);

}  // namespace chebycf
