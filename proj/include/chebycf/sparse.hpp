#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace chebycf {

// A single graph signal (one value per node).
using Signal = Eigen::VectorXd;

// A batch of signals laid out node-major: row i holds node i's value for every
// signal in the batch, so a CSR row sweep reads contiguous memory.
using SignalBlock =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Index = std::int32_t;

// Binary sparse matrix stored as a CSR sparsity pattern. Column indices are
// sorted and unique within each row.
struct CsrPattern {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int64_t> row_ptr{0};
  std::vector<Index> col_idx;

  std::size_t nnz() const { return col_idx.size(); }
  std::span<const Index> row(std::size_t r) const {
    return {col_idx.data() + row_ptr[r],
            static_cast<std::size_t>(row_ptr[r + 1] - row_ptr[r])};
  }
  bool contains(std::size_t r, Index c) const;

  // Builds a pattern from (row, col) pairs; duplicates are dropped and
  // counted in *duplicates when non-null.
  static CsrPattern from_pairs(std::size_t rows, std::size_t cols,
                               std::vector<std::pair<Index, Index>> pairs,
                               std::size_t* duplicates = nullptr);
};

struct CsrMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int64_t> row_ptr{0};
  std::vector<Index> col_idx;
  std::vector<double> values;

  std::size_t nnz() const { return col_idx.size(); }
  CsrMatrix transposed() const;
};

struct InteractionDataset {
  std::size_t num_users = 0;
  std::size_t num_items = 0;
  CsrPattern train;
  CsrPattern test;
  // External id of each dense index, ascending.
  std::vector<std::int64_t> user_ids;
  std::vector<std::int64_t> item_ids;
  // Repeated (user, item) pairs collapsed while loading.
  std::size_t duplicates_dropped = 0;

  bool empty() const { return train.nnz() == 0; }

  // crc32 over the shape and both sparsity patterns. Models record it so they
  // cannot be evaluated against a different split.
  std::uint32_t checksum() const;

  // Train row of user u as a dense 0/1 signal.
  Signal train_signal(std::size_t user) const;
  // Node-major block holding the train rows of the given users.
  SignalBlock train_signals(std::span<const std::size_t> users) const;
};

// Adjacency-list files: "uid iid iid ...", one user per line.
InteractionDataset load_interactions(const std::filesystem::path& train_path,
                                     const std::filesystem::path& test_path);
InteractionDataset parse_interactions(std::istream& train, std::istream& test,
                                      const std::string& train_name = "train",
                                      const std::string& test_name = "test");
// Dense-index constructor; ids are the identity mapping.
InteractionDataset make_dataset(std::size_t num_users, std::size_t num_items,
                                std::vector<std::pair<Index, Index>> train,
                                std::vector<std::pair<Index, Index>> test = {});

// R~ = D_U^{-1/2} R D_I^{-1/2} with both storage directions. Immutable after
// construction; the apply_* functions are read-only and thread-safe.
class NormalizedGraph {
 public:
  NormalizedGraph() = default;
  NormalizedGraph(const CsrPattern& train, std::vector<double> user_degrees,
                  std::vector<double> item_degrees);

  std::size_t num_users() const { return r_tilde_.rows; }
  std::size_t num_items() const { return r_tilde_.cols; }
  std::size_t nnz() const { return r_tilde_.nnz(); }
  const CsrMatrix& r_tilde() const { return r_tilde_; }
  const CsrMatrix& r_tilde_t() const { return r_tilde_t_; }
  const std::vector<double>& user_degrees() const { return user_degrees_; }
  const std::vector<double>& item_degrees() const { return item_degrees_; }

 private:
  CsrMatrix r_tilde_;
  CsrMatrix r_tilde_t_;
  std::vector<double> user_degrees_;
  std::vector<double> item_degrees_;
};

// Degrees come from train only. Zero-degree rows/columns stay all-zero.
NormalizedGraph normalize(const InteractionDataset& dataset);
NormalizedGraph normalize(const CsrPattern& train);

Signal apply_r_tilde(const NormalizedGraph& g, const Signal& x);
Signal apply_r_tilde_t(const NormalizedGraph& g, const Signal& y);

// R~^T R~ x, never materialising the item-item matrix.
Signal apply_gram(const NormalizedGraph& g, const Signal& x);
SignalBlock apply_gram(const NormalizedGraph& g, const SignalBlock& x);

// (2 L* - I) x = x - 2 R~^T R~ x.
Signal apply_rescaled_laplacian(const NormalizedGraph& g, const Signal& x);
SignalBlock apply_rescaled_laplacian(const NormalizedGraph& g,
                                     const SignalBlock& x);

namespace detail {

// Raw-buffer forms shared by the single-signal and batched paths. Buffers are
// node-major with `width` signals per node; `scratch` holds num_users*width.
void gram_into(const NormalizedGraph& g, std::span<const double> x,
               std::span<double> y, std::size_t width,
               std::span<double> scratch);
void rescaled_laplacian_into(const NormalizedGraph& g,
                             std::span<const double> x, std::span<double> y,
                             std::size_t width, std::span<double> scratch);

}  // namespace detail
}  // namespace chebycf
