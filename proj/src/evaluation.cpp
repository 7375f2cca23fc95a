#include "chebycf/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "chebycf/error.hpp"
#include "chebycf/kernels.hpp"

namespace chebycf {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_relevant(std::span<const Index> relevant) {
  if (relevant.empty()) {
    throw InvalidArgument("ranking metrics need at least one relevant item");
  }
}

bool is_relevant(std::span<const Index> relevant, std::size_t item) {
  return std::binary_search(relevant.begin(), relevant.end(),
                            static_cast<Index>(item));
}

// Per-user metric values, laid out [user][2 * n_index + {0: recall, 1: ndcg}].
struct UserMetrics {
  std::size_t stride = 0;
  std::vector<double> values;
};

// Masks, ranks and scores every column of `scores` (node-major, one column
// per user in `users`).
UserMetrics rank_block(const InteractionDataset& dataset,
                       std::span<const std::size_t> users,
                       const SignalBlock& scores,
                       const std::vector<std::size_t>& n_values) {
  const std::size_t max_n = *std::max_element(n_values.begin(), n_values.end());
  // User-major copy so each user's scores are contiguous.
  SignalBlock by_user = scores.transpose();
  UserMetrics out;
  out.stride = 2 * n_values.size();
  out.values.resize(users.size() * out.stride);
  const auto count = static_cast<std::ptrdiff_t>(users.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t j = 0; j < count; ++j) {
    const std::size_t u = users[j];
    std::span<double> row(by_user.row(j).data(), dataset.num_items);
    mask_seen(row, dataset.train.row(u));
    const auto top = top_n(row, max_n);
    std::vector<std::size_t> items(top.size());
    for (std::size_t p = 0; p < top.size(); ++p) items[p] = top[p].item;
    const auto relevant = dataset.test.row(u);
    double* dst = out.values.data() + j * out.stride;
    for (std::size_t k = 0; k < n_values.size(); ++k) {
      dst[2 * k] = recall_at_n(items, relevant, n_values[k]);
      dst[2 * k + 1] = ndcg_at_n(items, relevant, n_values[k]);
    }
  }
  return out;
}

struct Accumulator {
  std::vector<double> sums;
  double seconds = 0.0;
  std::size_t users = 0;

  void add(const UserMetrics& m, std::size_t n_users) {
    if (sums.empty()) sums.assign(m.stride, 0.0);
    for (std::size_t j = 0; j < n_users; ++j) {
      for (std::size_t k = 0; k < m.stride; ++k) {
        sums[k] += m.values[j * m.stride + k];
      }
    }
    users += n_users;
  }

  MetricsReport report(const std::vector<std::size_t>& n_values,
                       const HyperParams& params) const {
    MetricsReport r;
    r.params = params;
    r.num_evaluated_users = users;
    for (std::size_t k = 0; k < n_values.size(); ++k) {
      const double denom = users > 0 ? static_cast<double>(users) : 1.0;
      r.recall_at[n_values[k]] = sums.empty() ? 0.0 : sums[2 * k] / denom;
      r.ndcg_at[n_values[k]] = sums.empty() ? 0.0 : sums[2 * k + 1] / denom;
    }
    r.per_user_time = users > 0 ? seconds / static_cast<double>(users) : 0.0;
    return r;
  }
};

void check_options(const EvalOptions& o) {
  if (o.n_values.empty()) throw InvalidArgument("no cutoffs N given");
  for (const auto n : o.n_values) {
    if (n < 1) throw InvalidArgument("cutoff N must be >= 1");
  }
  if (o.batch_size < 1) throw InvalidArgument("batch size must be >= 1");
}

double metric(const std::map<std::size_t, double>& m, std::size_t n) {
  const auto it = m.find(n);
  return it == m.end() ? 0.0 : it->second;
}

auto params_key(const HyperParams& p) {
  return std::make_tuple(p.phi, p.alpha, p.eta, p.beta, p.order);
}

}  // namespace

double recall_at_n(std::span<const std::size_t> recommended,
                   std::span<const Index> relevant, std::size_t n) {
  check_relevant(relevant);
  const std::size_t depth = std::min(n, recommended.size());
  std::size_t hits = 0;
  for (std::size_t p = 0; p < depth; ++p) {
    if (is_relevant(relevant, recommended[p])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

double ndcg_at_n(std::span<const std::size_t> recommended,
                 std::span<const Index> relevant, std::size_t n) {
  check_relevant(relevant);
  const std::size_t depth = std::min(n, recommended.size());
  double dcg = 0.0;
  for (std::size_t p = 0; p < depth; ++p) {
    if (is_relevant(relevant, recommended[p])) {
      dcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
    }
  }
  double idcg = 0.0;
  const std::size_t ideal_depth = std::min(n, relevant.size());
  for (std::size_t p = 0; p < ideal_depth; ++p) {
    idcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
  }
  return dcg / idcg;
}

std::vector<std::size_t> evaluated_users(const InteractionDataset& dataset) {
  std::vector<std::size_t> users;
  for (std::size_t u = 0; u < dataset.num_users; ++u) {
    if (!dataset.test.row(u).empty()) users.push_back(u);
  }
  return users;
}

MetricsReport evaluate_scorer(const InteractionDataset& dataset,
                              const BatchScorer& scorer,
                              const EvalOptions& options) {
  check_options(options);
  const auto users = evaluated_users(dataset);
  Accumulator acc;
  for (std::size_t begin = 0; begin < users.size(); begin += options.batch_size) {
    const std::size_t end = std::min(users.size(), begin + options.batch_size);
    const std::span<const std::size_t> batch(users.data() + begin, end - begin);
    const auto t0 = Clock::now();
    const SignalBlock scores = scorer(dataset.train_signals(batch));
    if (static_cast<std::size_t>(scores.rows()) != dataset.num_items ||
        static_cast<std::size_t>(scores.cols()) != batch.size()) {
      throw DimensionMismatch("scorer output rows", dataset.num_items,
                              scores.rows());
    }
    const UserMetrics m = rank_block(dataset, batch, scores, options.n_values);
    acc.seconds += seconds_since(t0);
    acc.add(m, batch.size());
  }
  return acc.report(options.n_values, HyperParams{});
}

MetricsReport evaluate(const ChebyCFModel& model,
                       const InteractionDataset& dataset,
                       const EvalOptions& options) {
  if (model.dataset_checksum != dataset.checksum()) {
    throw ChecksumMismatch("model was fitted on a different dataset (checksum " +
                           std::to_string(model.dataset_checksum) + " vs " +
                           std::to_string(dataset.checksum()) + ")");
  }
  if (model.num_items() != dataset.num_items) {
    throw DimensionMismatch("model items", dataset.num_items, model.num_items());
  }
  MetricsReport r = evaluate_scorer(
      dataset, [&](const SignalBlock& s) { return predict_batch(model, s); },
      options);
  r.params = model.params;
  return r;
}

HyperGrid HyperGrid::standard() {
  HyperGrid g;
  g.phi.clear();
  for (int i = 0; i <= 38; ++i) g.phi.push_back(1.0 + 0.5 * i);
  g.alpha.clear();
  g.beta.clear();
  for (int i = 0; i <= 5; ++i) {
    g.alpha.push_back(i / 10.0);
    g.beta.push_back(i / 10.0);
  }
  g.eta = {128, 256, 512, 1024, 2048};
  g.order = {8};
  return g;
}

std::size_t HyperGrid::cardinality() const {
  return phi.size() * alpha.size() * eta.size() * beta.size() * order.size();
}

std::vector<HyperParams> HyperGrid::combinations() const {
  std::vector<HyperParams> out;
  out.reserve(cardinality());
  for (const double f : phi) {
    for (const double a : alpha) {
      for (const std::size_t e : eta) {
        for (const double b : beta) {
          for (const int k : order) out.push_back({f, a, e, b, k});
        }
      }
    }
  }
  return out;
}

std::size_t select_best(const std::vector<MetricsReport>& reports,
                        std::size_t n_select) {
  if (reports.empty()) throw InvalidArgument("no reports to select from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < reports.size(); ++i) {
    const auto& a = reports[i];
    const auto& b = reports[best];
    const double ra = metric(a.recall_at, n_select);
    const double rb = metric(b.recall_at, n_select);
    if (ra != rb) {
      if (ra > rb) best = i;
      continue;
    }
    const double na = metric(a.ndcg_at, 20);
    const double nb = metric(b.ndcg_at, 20);
    if (na != nb) {
      if (na > nb) best = i;
      continue;
    }
    if (params_key(a.params) < params_key(b.params)) best = i;
  }
  return best;
}

GridResult grid_search(const InteractionDataset& dataset, const HyperGrid& grid,
                       const GridOptions& options) {
  check_options(options.eval);
  const auto combos = grid.combinations();
  if (combos.empty()) throw InvalidArgument("empty hyperparameter grid");
  for (const auto& p : combos) p.validate();
  if (dataset.empty()) throw InvalidArgument("cannot search on an empty dataset");

  const NormalizedGraph graph = normalize(dataset);
  const std::size_t items = graph.num_items();

  // alpha = 0 ignores eta: evaluate the first eta and copy the rest.
  std::vector<std::size_t> source(combos.size());
  std::map<std::tuple<double, double, double, int>, std::size_t> first_plain;
  for (std::size_t c = 0; c < combos.size(); ++c) {
    source[c] = c;
    if (combos[c].alpha == 0.0) {
      const auto key = std::make_tuple(combos[c].phi, combos[c].alpha,
                                       combos[c].beta, combos[c].order);
      const auto [it, inserted] = first_plain.emplace(key, c);
      if (!inserted) source[c] = it->second;
    }
  }
  std::vector<std::size_t> active;
  for (std::size_t c = 0; c < combos.size(); ++c) {
    if (source[c] == c) active.push_back(c);
  }

  std::map<std::size_t, IdealPassBasis> bases;
  for (const std::size_t c : active) {
    if (combos[c].alpha > 0.0 && !bases.count(combos[c].eta)) {
      SvdOptions opts = options.svd;
      opts.seed = options.seed;
      bases.emplace(combos[c].eta, truncated_svd(graph, combos[c].eta, opts));
    }
  }
  std::map<double, Eigen::VectorXd> pow_up;
  std::map<double, Eigen::VectorXd> pow_down;
  std::map<std::pair<double, int>, std::vector<double>> coefficients;
  int max_order = 0;
  for (const std::size_t c : active) {
    const auto& p = combos[c];
    if (!pow_up.count(p.beta)) {
      pow_up.emplace(p.beta, degree_powers(graph.item_degrees(), p.beta));
      pow_down.emplace(p.beta, degree_powers(graph.item_degrees(), -p.beta));
    }
    const auto key = std::make_pair(p.phi, p.order);
    if (!coefficients.count(key)) {
      coefficients.emplace(key, ChebyFilterSpec::plateau(p.phi, p.order).coefficients);
    }
    max_order = std::max(max_order, p.order);
  }

  std::map<double, std::vector<std::size_t>> by_beta;
  for (const std::size_t c : active) by_beta[combos[c].beta].push_back(c);

  std::vector<Accumulator> acc(combos.size());
  const auto users = evaluated_users(dataset);
  const auto& n_values = options.eval.n_values;
  const std::size_t batches =
      (users.size() + options.eval.batch_size - 1) / options.eval.batch_size;
  std::size_t batch_no = 0;
  for (std::size_t begin = 0; begin < users.size();
       begin += options.eval.batch_size, ++batch_no) {
    const std::size_t end = std::min(users.size(), begin + options.eval.batch_size);
    const std::span<const std::size_t> batch(users.data() + begin, end - begin);
    const std::size_t width = batch.size();
    const std::size_t total = items * width;
    const SignalBlock signals = dataset.train_signals(batch);

    for (const auto& [beta, members] : by_beta) {
      auto t_shared = Clock::now();
      SignalBlock y = signals;
      kernels::omp::scale_rows({pow_down.at(beta).data(), items},
                               {y.data(), total}, width);
      const auto basis = chebyshev_basis(graph, y, max_order);
      std::map<std::size_t, SignalBlock> ideal_y;
      for (const std::size_t c : members) {
        if (combos[c].alpha > 0.0 && !ideal_y.count(combos[c].eta)) {
          ideal_y.emplace(combos[c].eta, apply_ideal(bases.at(combos[c].eta), y));
        }
      }
      const double shared =
          seconds_since(t_shared) / static_cast<double>(members.size());

      for (const std::size_t c : members) {
        const auto t0 = Clock::now();
        const auto& p = combos[c];
        SignalBlock z = combine_basis(basis, coefficients.at({p.phi, p.order}));
        if (p.alpha > 0.0) {
          const SignalBlock& iy = ideal_y.at(p.eta);
          kernels::omp::axpy(p.alpha, {iy.data(), total}, {z.data(), total});
        }
        kernels::omp::scale_rows({pow_up.at(beta).data(), items},
                                 {z.data(), total}, width);
        const UserMetrics m = rank_block(dataset, batch, z, n_values);
        acc[c].seconds += seconds_since(t0) + shared;
        acc[c].add(m, width);
      }
    }
    if (options.progress) options.progress(batch_no + 1, batches);
  }

  GridResult result;
  result.reports.reserve(combos.size());
  for (std::size_t c = 0; c < combos.size(); ++c) {
    MetricsReport r = acc[source[c]].report(n_values, combos[c]);
    result.reports.push_back(std::move(r));
  }
  result.best_index = select_best(result.reports, options.n_select);
  return result;
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

std::string metrics_csv_row(const std::string& dataset,
                            const MetricsReport& report) {
  const auto field = [](const std::map<std::size_t, double>& m, std::size_t n) {
    const auto it = m.find(n);
    return it == m.end() ? std::string() : format_number(it->second);
  };
  const HyperParams& p = report.params;
  std::string row = dataset;
  for (const std::string& f :
       {format_number(p.phi), format_number(p.alpha), std::to_string(p.eta),
        format_number(p.beta), std::to_string(p.order),
        field(report.recall_at, 10), field(report.recall_at, 20),
        field(report.ndcg_at, 10), field(report.ndcg_at, 20),
        format_number(report.per_user_time)}) {
    row += ',';
    row += f;
  }
  return row;
}

}  // namespace chebycf
