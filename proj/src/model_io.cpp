// Binary model artifact.
//
//   magic "CHEBYCF\0" | u32 version | payload | u32 crc32(all preceding bytes)
//
// payload (native little-endian):
//   u32 dataset checksum, u64 seed
//   f64 phi, f64 alpha, u64 eta, f64 beta, i64 order
//   u64 n, f64[n] Chebyshev coefficients
//   u8 has_ideal; if set:
//     u64 eta, u64 iterations, u8 converged, f64 residual, u64 padded,
//     f64[eta] singular values, u64 rows, f64[rows*eta] V row-major
//   u64 users, u64 items, u64 nnz, i64[users+1] row_ptr, i32[nnz] col_idx,
//   f64[users] user degrees, f64[items] item degrees

#include <array>
#include <cstring>
#include <fstream>
#include <iterator>
#include <type_traits>

#include <zlib.h>

#include "chebycf/error.hpp"
#include "chebycf/pipeline.hpp"

namespace chebycf {
namespace {

constexpr std::array<char, 8> kMagic{'C', 'H', 'E', 'B', 'Y', 'C', 'F', '\0'};

class Writer {
 public:
  template <typename T>
  void put(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    const auto* p = reinterpret_cast<const char*>(&v);
    buf_.insert(buf_.end(), p, p + sizeof(T));
  }
  template <typename T>
  void put_array(const T* data, std::size_t n) {
    const auto* p = reinterpret_cast<const char*>(data);
    buf_.insert(buf_.end(), p, p + n * sizeof(T));
  }
  std::vector<char>& bytes() { return buf_; }

 private:
  std::vector<char> buf_;
};

class Reader {
 public:
  Reader(const std::vector<char>& buf, std::size_t begin, std::size_t end)
      : buf_(buf), pos_(begin), end_(end) {}

  template <typename T>
  T get() {
    T v;
    need(sizeof(T));
    std::memcpy(&v, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  template <typename T>
  void get_array(T* out, std::size_t n) {
    if (n > (end_ - pos_) / sizeof(T)) fail();
    std::memcpy(out, buf_.data() + pos_, n * sizeof(T));
    pos_ += n * sizeof(T);
  }
  std::size_t count() {
    const auto n = get<std::uint64_t>();
    if (n > end_ - pos_) fail();  // every element is at least one byte
    return static_cast<std::size_t>(n);
  }
  bool done() const { return pos_ == end_; }

 private:
  void need(std::size_t n) {
    if (n > end_ - pos_) fail();
  }
  [[noreturn]] static void fail() {
    throw ChecksumMismatch("model payload is inconsistent with its length");
  }

  const std::vector<char>& buf_;
  std::size_t pos_;
  std::size_t end_;
};

std::uint32_t crc_of(const char* data, std::size_t n) {
  std::uint32_t crc = static_cast<std::uint32_t>(crc32(0L, Z_NULL, 0));
  while (n > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
    crc = static_cast<std::uint32_t>(
        crc32(crc, reinterpret_cast<const Bytef*>(data), chunk));
    data += chunk;
    n -= chunk;
  }
  return crc;
}

}  // namespace

void save_model(const ChebyCFModel& model, const std::filesystem::path& path) {
  Writer w;
  w.put_array(kMagic.data(), kMagic.size());
  w.put<std::uint32_t>(kModelFormatVersion);
  w.put<std::uint32_t>(model.dataset_checksum);
  w.put<std::uint64_t>(model.seed);

  const HyperParams& p = model.params;
  w.put<double>(p.phi);
  w.put<double>(p.alpha);
  w.put<std::uint64_t>(p.eta);
  w.put<double>(p.beta);
  w.put<std::int64_t>(p.order);

  w.put<std::uint64_t>(model.filter.coefficients.size());
  w.put_array(model.filter.coefficients.data(), model.filter.coefficients.size());

  w.put<std::uint8_t>(model.ideal.has_value());
  if (model.ideal) {
    const IdealPassBasis& b = *model.ideal;
    w.put<std::uint64_t>(b.eta);
    w.put<std::uint64_t>(b.iterations);
    w.put<std::uint8_t>(b.converged);
    w.put<double>(b.residual);
    w.put<std::uint64_t>(b.padded_columns);
    w.put_array(b.singular_values.data(), b.eta);
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
        v = b.vectors;
    w.put<std::uint64_t>(static_cast<std::uint64_t>(v.rows()));
    w.put_array(v.data(), static_cast<std::size_t>(v.size()));
  }

  const NormalizedGraph& g = model.graph;
  const CsrMatrix& r = g.r_tilde();
  w.put<std::uint64_t>(r.rows);
  w.put<std::uint64_t>(r.cols);
  w.put<std::uint64_t>(r.nnz());
  w.put_array(r.row_ptr.data(), r.row_ptr.size());
  w.put_array(r.col_idx.data(), r.col_idx.size());
  w.put_array(g.user_degrees().data(), g.user_degrees().size());
  w.put_array(g.item_degrees().data(), g.item_degrees().size());

  std::vector<char>& bytes = w.bytes();
  w.put<std::uint32_t>(crc_of(bytes.data(), bytes.size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failure on " + path.string());
}

ChebyCFModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file " + path.string());
  const std::vector<char> buf((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on " + path.string());

  constexpr std::size_t kHeader = kMagic.size() + sizeof(std::uint32_t);
  if (buf.size() < kMagic.size() ||
      std::memcmp(buf.data(), kMagic.data(), kMagic.size()) != 0) {
    throw IoError(path.string() + " is not a ChebyCF model file");
  }
  if (buf.size() < kHeader + sizeof(std::uint32_t)) {
    throw ChecksumMismatch(path.string() + " is truncated");
  }
  std::uint32_t version = 0;
  std::memcpy(&version, buf.data() + kMagic.size(), sizeof(version));
  if (version != kModelFormatVersion) {
    throw VersionMismatch("model file " + path.string() + " has format version " +
                          std::to_string(version) + ", this build reads version " +
                          std::to_string(kModelFormatVersion));
  }
  const std::size_t body_end = buf.size() - sizeof(std::uint32_t);
  std::uint32_t stored_crc = 0;
  std::memcpy(&stored_crc, buf.data() + body_end, sizeof(stored_crc));
  if (crc_of(buf.data(), body_end) != stored_crc) {
    throw ChecksumMismatch("checksum mismatch in " + path.string() +
                           " (file truncated or corrupted)");
  }

  Reader r(buf, kHeader, body_end);
  const auto dataset_checksum = r.get<std::uint32_t>();
  const auto seed = r.get<std::uint64_t>();
  HyperParams p;
  p.phi = r.get<double>();
  p.alpha = r.get<double>();
  p.eta = static_cast<std::size_t>(r.get<std::uint64_t>());
  p.beta = r.get<double>();
  p.order = static_cast<int>(r.get<std::int64_t>());

  std::vector<double> coefficients(r.count());
  r.get_array(coefficients.data(), coefficients.size());

  std::optional<IdealPassBasis> ideal;
  if (r.get<std::uint8_t>()) {
    IdealPassBasis b;
    b.eta = r.count();
    b.iterations = static_cast<std::size_t>(r.get<std::uint64_t>());
    b.converged = r.get<std::uint8_t>() != 0;
    b.residual = r.get<double>();
    b.padded_columns = static_cast<std::size_t>(r.get<std::uint64_t>());
    b.singular_values.resize(static_cast<Eigen::Index>(b.eta));
    r.get_array(b.singular_values.data(), b.eta);
    const std::size_t rows = r.count();
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> v(
        static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(b.eta));
    r.get_array(v.data(), rows * b.eta);
    b.vectors = v;
    ideal = std::move(b);
  }

  CsrPattern pattern;
  pattern.rows = r.count();
  pattern.cols = r.count();
  const std::size_t nnz = r.count();
  pattern.row_ptr.resize(pattern.rows + 1);
  r.get_array(pattern.row_ptr.data(), pattern.row_ptr.size());
  pattern.col_idx.resize(nnz);
  r.get_array(pattern.col_idx.data(), nnz);
  std::vector<double> user_degrees(pattern.rows);
  r.get_array(user_degrees.data(), user_degrees.size());
  std::vector<double> item_degrees(pattern.cols);
  r.get_array(item_degrees.data(), item_degrees.size());
  if (!r.done()) throw ChecksumMismatch("trailing bytes in " + path.string());
  if (coefficients.size() != static_cast<std::size_t>(p.order) + 1) {
    throw ChecksumMismatch("coefficient count does not match order in " +
                           path.string());
  }

  ChebyCFModel model = assemble_model(
      NormalizedGraph(pattern, std::move(user_degrees), std::move(item_degrees)),
      p, std::move(ideal), seed, dataset_checksum);
  model.filter.coefficients = std::move(coefficients);
  return model;
}

}  // namespace chebycf
