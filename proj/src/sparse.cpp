#include "chebycf/sparse.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <string_view>

#include <zlib.h>

#include "chebycf/error.hpp"
#include "chebycf/kernels.hpp"

namespace chebycf {
namespace {

using RawPair = std::pair<std::int64_t, std::int64_t>;

struct RawFile {
  std::vector<std::int64_t> users;  // every user id seen, including empty rows
  std::vector<RawPair> pairs;
};

RawFile parse_adjacency(std::istream& in, const std::string& name) {
  RawFile out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest(line);
    bool have_user = false;
    std::int64_t user = 0;
    while (true) {
      const auto start = rest.find_first_not_of(" \t\r\v\f");
      if (start == std::string_view::npos) break;
      rest.remove_prefix(start);
      const auto end = std::min(rest.find_first_of(" \t\r\v\f"), rest.size());
      const std::string_view token = rest.substr(0, end);
      std::int64_t value = 0;
      const auto [ptr, ec] =
          std::from_chars(token.data(), token.data() + token.size(), value);
      if (ec != std::errc() || ptr != token.data() + token.size() ||
          value < 0 || value > std::numeric_limits<Index>::max()) {
        throw ParseError(name, line_no,
                         "expected a non-negative integer, got '" +
                             std::string(token) + "'");
      }
      if (!have_user) {
        user = value;
        have_user = true;
        out.users.push_back(user);
      } else {
        out.pairs.emplace_back(user, value);
      }
      rest.remove_prefix(end);
    }
  }
  if (in.bad()) throw IoError("read failure on " + name);
  return out;
}

std::vector<std::int64_t> vocabulary(std::vector<std::int64_t> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

Index dense_index(const std::vector<std::int64_t>& vocab, std::int64_t id) {
  const auto it = std::lower_bound(vocab.begin(), vocab.end(), id);
  return static_cast<Index>(it - vocab.begin());
}

std::vector<std::pair<Index, Index>> to_dense(
    const std::vector<RawPair>& pairs, const std::vector<std::int64_t>& users,
    const std::vector<std::int64_t>& items) {
  std::vector<std::pair<Index, Index>> out;
  out.reserve(pairs.size());
  for (const auto& [u, i] : pairs) {
    out.emplace_back(dense_index(users, u), dense_index(items, i));
  }
  return out;
}

void check_disjoint(const InteractionDataset& d) {
  for (std::size_t u = 0; u < d.num_users; ++u) {
    const auto a = d.train.row(u);
    const auto b = d.test.row(u);
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.size() && j < b.size()) {
      if (a[i] == b[j]) {
        throw ValidationError(
            "interaction (user " + std::to_string(d.user_ids[u]) + ", item " +
            std::to_string(d.item_ids[a[i]]) +
            ") appears in both train and test");
      }
      if (a[i] < b[j]) {
        ++i;
      } else {
        ++j;
      }
    }
  }
}

template <typename T>
std::uint32_t crc_update(std::uint32_t crc, const std::vector<T>& v) {
  // zlib takes uInt lengths; feed in chunks.
  const auto* bytes = reinterpret_cast<const Bytef*>(v.data());
  std::size_t left = v.size() * sizeof(T);
  while (left > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(left, 1u << 30));
    crc = static_cast<std::uint32_t>(crc32(crc, bytes, chunk));
    bytes += chunk;
    left -= chunk;
  }
  return crc;
}

void check_width(const NormalizedGraph& g, std::size_t items, const char* what) {
  if (items != g.num_items()) throw DimensionMismatch(what, g.num_items(), items);
}

}  // namespace

bool CsrPattern::contains(std::size_t r, Index c) const {
  const auto cols_in_row = row(r);
  return std::binary_search(cols_in_row.begin(), cols_in_row.end(), c);
}

CsrPattern CsrPattern::from_pairs(std::size_t rows, std::size_t cols,
                                  std::vector<std::pair<Index, Index>> pairs,
                                  std::size_t* duplicates) {
  for (const auto& [r, c] : pairs) {
    if (r < 0 || c < 0 || static_cast<std::size_t>(r) >= rows ||
        static_cast<std::size_t>(c) >= cols) {
      throw InvalidArgument("interaction (" + std::to_string(r) + ", " +
                            std::to_string(c) + ") outside a " +
                            std::to_string(rows) + "x" + std::to_string(cols) +
                            " matrix");
    }
  }
  std::sort(pairs.begin(), pairs.end());
  const auto before = pairs.size();
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  if (duplicates) *duplicates += before - pairs.size();

  CsrPattern p;
  p.rows = rows;
  p.cols = cols;
  p.row_ptr.assign(rows + 1, 0);
  p.col_idx.reserve(pairs.size());
  for (const auto& [r, c] : pairs) {
    ++p.row_ptr[r + 1];
    p.col_idx.push_back(c);
  }
  for (std::size_t r = 0; r < rows; ++r) p.row_ptr[r + 1] += p.row_ptr[r];
  return p;
}

CsrMatrix CsrMatrix::transposed() const {
  CsrMatrix t;
  t.rows = cols;
  t.cols = rows;
  t.row_ptr.assign(cols + 1, 0);
  t.col_idx.resize(nnz());
  t.values.resize(nnz());
  for (const Index c : col_idx) ++t.row_ptr[c + 1];
  for (std::size_t c = 0; c < cols; ++c) t.row_ptr[c + 1] += t.row_ptr[c];
  std::vector<std::int64_t> cursor(t.row_ptr.begin(), t.row_ptr.end() - 1);
  // Walking rows in order keeps the transposed columns sorted.
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::int64_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) {
      const auto dst = cursor[col_idx[p]]++;
      t.col_idx[dst] = static_cast<Index>(r);
      t.values[dst] = values[p];
    }
  }
  return t;
}

std::uint32_t InteractionDataset::checksum() const {
  std::uint32_t crc = static_cast<std::uint32_t>(crc32(0L, Z_NULL, 0));
  const std::vector<std::uint64_t> shape{num_users, num_items};
  crc = crc_update(crc, shape);
  crc = crc_update(crc, train.row_ptr);
  crc = crc_update(crc, train.col_idx);
  crc = crc_update(crc, test.row_ptr);
  crc = crc_update(crc, test.col_idx);
  return crc;
}

Signal InteractionDataset::train_signal(std::size_t user) const {
  Signal s = Signal::Zero(static_cast<Eigen::Index>(num_items));
  for (const Index i : train.row(user)) s[i] = 1.0;
  return s;
}

SignalBlock InteractionDataset::train_signals(
    std::span<const std::size_t> users) const {
  SignalBlock block = SignalBlock::Zero(static_cast<Eigen::Index>(num_items),
                                        static_cast<Eigen::Index>(users.size()));
  for (std::size_t j = 0; j < users.size(); ++j) {
    for (const Index i : train.row(users[j])) {
      block(i, static_cast<Eigen::Index>(j)) = 1.0;
    }
  }
  return block;
}

InteractionDataset parse_interactions(std::istream& train, std::istream& test,
                                      const std::string& train_name,
                                      const std::string& test_name) {
  RawFile raw_train = parse_adjacency(train, train_name);
  RawFile raw_test = parse_adjacency(test, test_name);

  std::vector<std::int64_t> user_ids = raw_train.users;
  user_ids.insert(user_ids.end(), raw_test.users.begin(), raw_test.users.end());
  std::vector<std::int64_t> item_ids;
  item_ids.reserve(raw_train.pairs.size() + raw_test.pairs.size());
  for (const auto& p : raw_train.pairs) item_ids.push_back(p.second);
  for (const auto& p : raw_test.pairs) item_ids.push_back(p.second);

  InteractionDataset d;
  d.user_ids = vocabulary(std::move(user_ids));
  d.item_ids = vocabulary(std::move(item_ids));
  d.num_users = d.user_ids.size();
  d.num_items = d.item_ids.size();
  d.train = CsrPattern::from_pairs(
      d.num_users, d.num_items, to_dense(raw_train.pairs, d.user_ids, d.item_ids),
      &d.duplicates_dropped);
  d.test = CsrPattern::from_pairs(
      d.num_users, d.num_items, to_dense(raw_test.pairs, d.user_ids, d.item_ids),
      &d.duplicates_dropped);
  check_disjoint(d);
  return d;
}

InteractionDataset load_interactions(const std::filesystem::path& train_path,
                                     const std::filesystem::path& test_path) {
  std::ifstream train(train_path);
  if (!train) throw IoError("cannot open " + train_path.string());
  std::ifstream test(test_path);
  if (!test) throw IoError("cannot open " + test_path.string());
  return parse_interactions(train, test, train_path.string(),
                            test_path.string());
}

InteractionDataset make_dataset(std::size_t num_users, std::size_t num_items,
                                std::vector<std::pair<Index, Index>> train,
                                std::vector<std::pair<Index, Index>> test) {
  InteractionDataset d;
  d.num_users = num_users;
  d.num_items = num_items;
  d.user_ids.resize(num_users);
  d.item_ids.resize(num_items);
  for (std::size_t u = 0; u < num_users; ++u) d.user_ids[u] = std::int64_t(u);
  for (std::size_t i = 0; i < num_items; ++i) d.item_ids[i] = std::int64_t(i);
  d.train = CsrPattern::from_pairs(num_users, num_items, std::move(train),
                                   &d.duplicates_dropped);
  d.test = CsrPattern::from_pairs(num_users, num_items, std::move(test),
                                  &d.duplicates_dropped);
  check_disjoint(d);
  return d;
}

NormalizedGraph::NormalizedGraph(const CsrPattern& train,
                                 std::vector<double> user_degrees,
                                 std::vector<double> item_degrees)
    : user_degrees_(std::move(user_degrees)),
      item_degrees_(std::move(item_degrees)) {
  if (user_degrees_.size() != train.rows) {
    throw DimensionMismatch("user degrees", train.rows, user_degrees_.size());
  }
  if (item_degrees_.size() != train.cols) {
    throw DimensionMismatch("item degrees", train.cols, item_degrees_.size());
  }
  r_tilde_.rows = train.rows;
  r_tilde_.cols = train.cols;
  r_tilde_.row_ptr = train.row_ptr;
  r_tilde_.col_idx = train.col_idx;
  r_tilde_.values.resize(train.nnz());
  for (std::size_t u = 0; u < train.rows; ++u) {
    for (std::int64_t p = train.row_ptr[u]; p < train.row_ptr[u + 1]; ++p) {
      // A stored entry implies both degrees are at least one.
      r_tilde_.values[p] =
          1.0 / std::sqrt(user_degrees_[u] * item_degrees_[train.col_idx[p]]);
    }
  }
  r_tilde_t_ = r_tilde_.transposed();
}

NormalizedGraph normalize(const CsrPattern& train) {
  if (train.nnz() == 0) {
    throw InvalidArgument("cannot normalize an empty interaction matrix");
  }
  std::vector<double> du(train.rows, 0.0);
  std::vector<double> di(train.cols, 0.0);
  for (std::size_t u = 0; u < train.rows; ++u) {
    for (const Index i : train.row(u)) {
      du[u] += 1.0;
      di[i] += 1.0;
    }
  }
  return NormalizedGraph(train, std::move(du), std::move(di));
}

NormalizedGraph normalize(const InteractionDataset& dataset) {
  return normalize(dataset.train);
}

Signal apply_r_tilde(const NormalizedGraph& g, const Signal& x) {
  check_width(g, static_cast<std::size_t>(x.size()), "apply_r_tilde");
  Signal y(static_cast<Eigen::Index>(g.num_users()));
  kernels::omp::csr_block_product(g.r_tilde(), {x.data(), g.num_items()},
                                  {y.data(), g.num_users()}, 1);
  return y;
}

Signal apply_r_tilde_t(const NormalizedGraph& g, const Signal& y) {
  if (static_cast<std::size_t>(y.size()) != g.num_users()) {
    throw DimensionMismatch("apply_r_tilde_t", g.num_users(), y.size());
  }
  Signal x(static_cast<Eigen::Index>(g.num_items()));
  kernels::omp::csr_block_product(g.r_tilde_t(), {y.data(), g.num_users()},
                                  {x.data(), g.num_items()}, 1);
  return x;
}

namespace detail {

void gram_into(const NormalizedGraph& g, std::span<const double> x,
               std::span<double> y, std::size_t width,
               std::span<double> scratch) {
  kernels::omp::csr_block_product(g.r_tilde(), x, scratch, width);
  kernels::omp::csr_block_product(g.r_tilde_t(), scratch, y, width);
}

void rescaled_laplacian_into(const NormalizedGraph& g,
                             std::span<const double> x, std::span<double> y,
                             std::size_t width, std::span<double> scratch) {
  gram_into(g, x, y, width, scratch);
  kernels::omp::reflect_into(x, y);
}

}  // namespace detail

Signal apply_gram(const NormalizedGraph& g, const Signal& x) {
  check_width(g, static_cast<std::size_t>(x.size()), "apply_gram");
  Signal y(x.size());
  std::vector<double> scratch(g.num_users());
  detail::gram_into(g, {x.data(), g.num_items()}, {y.data(), g.num_items()}, 1,
                    scratch);
  return y;
}

SignalBlock apply_gram(const NormalizedGraph& g, const SignalBlock& x) {
  check_width(g, static_cast<std::size_t>(x.rows()), "apply_gram");
  const auto width = static_cast<std::size_t>(x.cols());
  SignalBlock y(x.rows(), x.cols());
  std::vector<double> scratch(g.num_users() * width);
  detail::gram_into(g, {x.data(), g.num_items() * width},
                    {y.data(), g.num_items() * width}, width, scratch);
  return y;
}

Signal apply_rescaled_laplacian(const NormalizedGraph& g, const Signal& x) {
  check_width(g, static_cast<std::size_t>(x.size()), "apply_rescaled_laplacian");
  Signal y(x.size());
  std::vector<double> scratch(g.num_users());
  detail::rescaled_laplacian_into(g, {x.data(), g.num_items()},
                                  {y.data(), g.num_items()}, 1, scratch);
  return y;
}

SignalBlock apply_rescaled_laplacian(const NormalizedGraph& g,
                                     const SignalBlock& x) {
  check_width(g, static_cast<std::size_t>(x.rows()), "apply_rescaled_laplacian");
  const auto width = static_cast<std::size_t>(x.cols());
  SignalBlock y(x.rows(), x.cols());
  std::vector<double> scratch(g.num_users() * width);
  detail::rescaled_laplacian_into(g, {x.data(), g.num_items() * width},
                                  {y.data(), g.num_items() * width}, width,
                                  scratch);
  return y;
}

}  // namespace chebycf
