#include "chebycf/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "chebycf/chebyshev.hpp"
#include "chebycf/error.hpp"
#include "chebycf/log.hpp"

namespace chebycf::oracle {
namespace {

// Singular values closer than this are treated as a tie.
constexpr double kDegenerateGap = 1e-8;

void check_cap(std::size_t items, const OracleOptions& options) {
  if (items > options.item_cap) {
    throw InvalidArgument("dense oracle limited to " +
                          std::to_string(options.item_cap) + " items, graph has " +
                          std::to_string(items) +
                          "; use the matrix-free operators instead");
  }
  if (items > options.warn_above) {
    warn("dense oracle on " + std::to_string(items) + " items may be slow");
  }
}

Eigen::MatrixXd filter_matrix(const Eigen::MatrixXd& q,
                              const Eigen::VectorXd& weights) {
  return q * weights.asDiagonal() * q.transpose();
}

Eigen::JacobiSVD<Eigen::MatrixXd> full_svd(const Eigen::MatrixXd& r) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(r, Eigen::ComputeFullU |
                                                  Eigen::ComputeFullV);
}

}  // namespace

Eigen::MatrixXd densify(const CsrMatrix& m) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.rows),
                                            static_cast<Eigen::Index>(m.cols));
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::int64_t p = m.row_ptr[r]; p < m.row_ptr[r + 1]; ++p) {
      d(static_cast<Eigen::Index>(r), m.col_idx[p]) = m.values[p];
    }
  }
  return d;
}

Eigen::MatrixXd dense_laplacian(const NormalizedGraph& g) {
  const Eigen::MatrixXd r = densify(g.r_tilde());
  const auto n = static_cast<Eigen::Index>(g.num_items());
  return Eigen::MatrixXd::Identity(n, n) - r.transpose() * r;
}

DenseSpectrum dense_spectrum(const NormalizedGraph& g,
                             const OracleOptions& options) {
  check_cap(g.num_items(), options);
  DenseSpectrum s;
  Eigen::MatrixXd lap = dense_laplacian(g);
  lap = 0.5 * (lap + lap.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(lap);
  s.eigenvalues = eig.eigenvalues().cwiseMax(0.0).cwiseMin(1.0);
  s.eigenvectors = eig.eigenvectors();

  const auto svd = full_svd(densify(g.r_tilde()));
  s.singular_values = svd.singularValues();
  s.left_singular_vectors = svd.matrixU();
  s.right_singular_vectors = svd.matrixV();
  return s;
}

Eigen::MatrixXd dense_filter_matrix(const DenseSpectrum& s, const Transfer& h) {
  Eigen::VectorXd w(s.eigenvalues.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = h(s.eigenvalues[i]);
  return filter_matrix(s.eigenvectors, w);
}

Signal dense_filter(const DenseSpectrum& s, const Transfer& h, const Signal& x) {
  if (x.size() != s.eigenvalues.size()) {
    throw DimensionMismatch("dense_filter", s.eigenvalues.size(), x.size());
  }
  Eigen::VectorXd w(s.eigenvalues.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = h(s.eigenvalues[i]);
  const Eigen::VectorXd spectral = s.eigenvectors.transpose() * x;
  return s.eigenvectors * w.cwiseProduct(spectral);
}

Transfer chebyshev_transfer(const ChebyFilterSpec& spec) {
  return [coefficients = spec.coefficients](double lambda) {
    return chebyshev_series(coefficients, 2.0 * lambda - 1.0);
  };
}

Eigen::MatrixXd dense_ideal_projector(const DenseSpectrum& s, std::size_t eta) {
  const auto k = static_cast<Eigen::Index>(eta);
  if (k > s.eigenvectors.cols()) {
    throw InvalidArgument("eta exceeds the number of items");
  }
  const Eigen::MatrixXd q = s.eigenvectors.leftCols(k);
  return q * q.transpose();
}

Eigen::MatrixXd generalized_laplacian_filter(const NormalizedGraph& g,
                                             const ChebyFilterSpec& spec,
                                             double alpha, std::size_t eta,
                                             double beta) {
  const Eigen::VectorXd up = degree_powers(g.item_degrees(), beta);
  const Eigen::VectorXd down = degree_powers(g.item_degrees(), -beta);
  const Eigen::MatrixXd lbar =
      up.asDiagonal() * dense_laplacian(g) * down.asDiagonal();

  Eigen::EigenSolver<Eigen::MatrixXd> eig(lbar);
  const Eigen::VectorXd values = eig.eigenvalues().real();
  const Eigen::MatrixXd vectors = eig.eigenvectors().real();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = Eigen::Index(i);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return values[a] < values[b];
  });

  const auto n = values.size();
  Eigen::MatrixXd p(n, n);
  Eigen::VectorXd w(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index src = order[static_cast<std::size_t>(j)];
    p.col(j) = vectors.col(src);
    w[j] = chebyshev_series(spec.coefficients, 2.0 * values[src] - 1.0);
    if (static_cast<std::size_t>(j) < eta) w[j] += alpha;
  }
  return p * w.asDiagonal() * p.partialPivLu().inverse();
}

LowRankEquivalenceCheck verify_lowrank_equivalence(
    const NormalizedGraph& g, std::size_t d, const OracleOptions& options) {
  check_cap(g.num_items(), options);
  const std::size_t rank_cap = std::min(g.num_users(), g.num_items());
  if (d < 1 || d > rank_cap) {
    throw InvalidArgument("embedding dimension must be in [1, " +
                          std::to_string(rank_cap) + "]");
  }
  const Eigen::MatrixXd r = densify(g.r_tilde());
  const auto svd = full_svd(r);
  const Eigen::VectorXd& sigma = svd.singularValues();
  // Extended singular values: sigma_i = 0 beyond min(users, items).
  const auto gap_after = [&](std::size_t k) {
    const double next = k < static_cast<std::size_t>(sigma.size()) ? sigma[k] : 0.0;
    if (k >= g.num_items()) return true;  // no sigma_{k+1} at all
    return sigma[static_cast<Eigen::Index>(k) - 1] - next > kDegenerateGap;
  };

  LowRankEquivalenceCheck out;
  out.requested_d = d;
  out.effective_d = d;
  if (!gap_after(d)) {
    out.degenerate = true;
    std::size_t pick = 0;
    for (std::size_t k = d - 1; k >= 1 && pick == 0; --k) {
      if (gap_after(k)) pick = k;
    }
    for (std::size_t k = d + 1; k <= rank_cap && pick == 0; ++k) {
      if (gap_after(k)) pick = k;
    }
    if (pick == 0) {
      throw InvalidArgument("no well-separated truncation exists near d = " +
                            std::to_string(d));
    }
    out.effective_d = pick;
  }
  const auto k = static_cast<Eigen::Index>(out.effective_d);

  // Optimal rank-d factorisation and one propagation layer.
  const Eigen::MatrixXd e_users =
      svd.matrixU().leftCols(k) * sigma.head(k).asDiagonal();
  const Eigen::MatrixXd e_items = svd.matrixV().leftCols(k);
  const Eigen::MatrixXd lgcn = r * (e_users * e_items.transpose()).transpose() * r;

  // Spectral route on the item-item Laplacian.
  Eigen::MatrixXd lap = dense_laplacian(g);
  lap = 0.5 * (lap + lap.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(lap);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(eig.eigenvalues().size());
  for (Eigen::Index i = 0; i < k; ++i) w[i] = 1.0 - eig.eigenvalues()[i];
  const Eigen::MatrixXd filtered = r * filter_matrix(eig.eigenvectors(), w);

  out.max_deviation = (lgcn - filtered).cwiseAbs().maxCoeff();
  return out;
}

LowRankCheck verify_eckart_young(const NormalizedGraph& g, std::size_t d,
                                 const OracleOptions& options) {
  check_cap(g.num_items(), options);
  const Eigen::MatrixXd r = densify(g.r_tilde());
  const auto svd = full_svd(r);
  const Eigen::VectorXd& sigma = svd.singularValues();
  if (d > static_cast<std::size_t>(sigma.size())) {
    throw InvalidArgument("rank exceeds min(users, items)");
  }
  const auto k = static_cast<Eigen::Index>(d);
  const Eigen::MatrixXd approx = svd.matrixU().leftCols(k) *
                                 sigma.head(k).asDiagonal() *
                                 svd.matrixV().leftCols(k).transpose();
  LowRankCheck out;
  out.residual = (r - approx).norm();
  out.predicted = sigma.tail(sigma.size() - k).norm();
  return out;
}

double principal_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidArgument("principal_angle needs bases of equal shape");
  }
  if (a.cols() == 0) return 0.0;
  const Eigen::MatrixXd residual = a - b * (b.transpose() * a);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(residual);
  return std::asin(std::min(1.0, svd.singularValues()[0]));
}

PairingCheck verify_singular_eigen_pairing(const DenseSpectrum& s,
                                           double cluster_tol) {
  const auto n = s.eigenvalues.size();
  Eigen::VectorXd extended = Eigen::VectorXd::Zero(n);
  extended.head(s.singular_values.size()) = s.singular_values;

  PairingCheck out;
  for (Eigen::Index i = 0; i < n; ++i) {
    out.max_value_deviation =
        std::max(out.max_value_deviation,
                 std::abs(1.0 - extended[i] * extended[i] - s.eigenvalues[i]));
  }
  Eigen::Index begin = 0;
  while (begin < n) {
    Eigen::Index end = begin + 1;
    while (end < n && s.eigenvalues[end] - s.eigenvalues[end - 1] <= cluster_tol) {
      ++end;
    }
    const auto width = end - begin;
    out.max_subspace_angle = std::max(
        out.max_subspace_angle,
        principal_angle(s.right_singular_vectors.middleCols(begin, width),
                        s.eigenvectors.middleCols(begin, width)));
    begin = end;
  }
  return out;
}

PairingCheck verify_basis_pairing(const DenseSpectrum& s,
                                  const IdealPassBasis& basis) {
  const auto eta = static_cast<Eigen::Index>(basis.eta);
  if (basis.vectors.rows() != s.eigenvectors.rows() ||
      eta > s.eigenvalues.size()) {
    throw InvalidArgument("basis does not match the spectrum");
  }
  PairingCheck out;
  for (Eigen::Index j = 0; j < eta; ++j) {
    const double sv = basis.singular_values[j];
    out.max_value_deviation = std::max(
        out.max_value_deviation, std::abs(1.0 - sv * sv - s.eigenvalues[j]));
  }
  // Individual vectors are only defined up to rotation inside a cluster of
  // equal eigenvalues, so compare cluster by cluster.
  constexpr double kClusterTol = 1e-6;
  const auto n = s.eigenvalues.size();
  Eigen::Index begin = 0;
  while (begin < eta) {
    Eigen::Index end = begin + 1;
    while (end < n && s.eigenvalues[end] - s.eigenvalues[end - 1] <= kClusterTol) {
      ++end;
    }
    const Eigen::Index stop = std::min(end, eta);
    const auto width = stop - begin;
    if (end <= eta) {
      out.max_subspace_angle = std::max(
          out.max_subspace_angle,
          principal_angle(basis.vectors.middleCols(begin, width),
                          s.eigenvectors.middleCols(begin, width)));
    } else {
      // Cluster straddles eta: the kept columns must lie inside the cluster.
      const Eigen::MatrixXd cluster = s.eigenvectors.middleCols(begin, end - begin);
      const Eigen::MatrixXd part = basis.vectors.middleCols(begin, width);
      const Eigen::MatrixXd residual = part - cluster * (cluster.transpose() * part);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(residual);
      out.max_subspace_angle = std::max(
          out.max_subspace_angle, std::asin(std::min(1.0, svd.singularValues()[0])));
    }
    begin = end;
  }
  return out;
}

SignalBlock linear_lowpass_filter(const NormalizedGraph& g, int layers,
                                  const SignalBlock& x) {
  if (layers < 1) throw InvalidArgument("linear low-pass filter needs L >= 1");
  SignalBlock acc = SignalBlock::Zero(x.rows(), x.cols());
  SignalBlock term = x;
  for (int l = 1; l <= layers; ++l) {
    term = apply_gram(g, term);
    acc += term;
  }
  return acc / static_cast<double>(layers);
}

Signal linear_lowpass_filter(const NormalizedGraph& g, int layers,
                             const Signal& x) {
  if (static_cast<std::size_t>(x.size()) != g.num_items()) {
    throw DimensionMismatch("linear_lowpass_filter", g.num_items(), x.size());
  }
  const SignalBlock in = Eigen::Map<const SignalBlock>(x.data(), x.size(), 1);
  const SignalBlock out = linear_lowpass_filter(g, layers, in);
  return Eigen::Map<const Signal>(out.data(), out.rows());
}

Transfer linear_lowpass_transfer(int layers) {
  if (layers < 1) throw InvalidArgument("linear low-pass filter needs L >= 1");
  return [layers](double lambda) {
    double sum = 0.0;
    double term = 1.0;
    for (int l = 1; l <= layers; ++l) {
      term *= 1.0 - lambda;
      sum += term;
    }
    return sum / layers;
  };
}

Eigen::MatrixXd truncated_filter_matrix(const DenseSpectrum& s,
                                        const Transfer& base,
                                        double keep_ratio) {
  if (!(keep_ratio > 0.0 && keep_ratio <= 1.0)) {
    throw InvalidArgument("keep ratio must lie in (0, 1]");
  }
  const auto n = s.eigenvalues.size();
  // The epsilon keeps ratios like 0.1 * 60 from rounding up to 7.
  const auto keep = std::clamp<Eigen::Index>(
      static_cast<Eigen::Index>(std::ceil(keep_ratio * double(n) - 1e-9)), 1, n);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < keep; ++i) w[i] = base(s.eigenvalues[i]);
  return filter_matrix(s.eigenvectors, w);
}

Signal truncated_filter(const DenseSpectrum& s, const Transfer& base,
                        double keep_ratio, const Signal& x) {
  if (x.size() != s.eigenvalues.size()) {
    throw DimensionMismatch("truncated_filter", s.eigenvalues.size(), x.size());
  }
  return truncated_filter_matrix(s, base, keep_ratio) * x;
}

}  // namespace chebycf::oracle
