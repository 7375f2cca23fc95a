#include "chebycf/partial_svd.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "chebycf/error.hpp"
#include "chebycf/log.hpp"

namespace chebycf {
namespace {

// Ritz values below this are numerically zero: R~ has rank < eta there.
constexpr double kZeroEigenvalue = 1e-14;

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& m) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  return qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols());
}

Eigen::MatrixXd gram_block(const NormalizedGraph& g, const Eigen::MatrixXd& x) {
  const SignalBlock in = x;
  return apply_gram(g, in);
}

void fix_signs(Eigen::MatrixXd& v) {
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    Eigen::Index arg = 0;
    v.col(j).cwiseAbs().maxCoeff(&arg);
    if (v(arg, j) < 0.0) v.col(j) = -v.col(j);
  }
}

}  // namespace

IdealPassBasis truncated_svd(const NormalizedGraph& g, std::size_t eta,
                             const SvdOptions& options) {
  const std::size_t n = g.num_items();
  if (eta < 1) throw InvalidArgument("truncated_svd needs eta >= 1");
  if (eta > n) {
    throw InvalidArgument("eta = " + std::to_string(eta) +
                          " exceeds the number of items (" +
                          std::to_string(n) + ")");
  }
  if (!(options.tol > 0.0)) throw InvalidArgument("tolerance must be > 0");

  const auto rows = static_cast<Eigen::Index>(n);
  const auto block = static_cast<Eigen::Index>(std::min(eta + options.oversample, n));
  const auto keep = static_cast<Eigen::Index>(eta);

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd x(rows, block);
  for (Eigen::Index j = 0; j < block; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) x(i, j) = normal(rng);
  }
  x = orthonormalize(x);

  IdealPassBasis out;
  out.eta = eta;
  Eigen::VectorXd theta(block);
  for (std::size_t iter = 1;; ++iter) {
    Eigen::MatrixXd z = gram_block(g, x);
    Eigen::MatrixXd h = x.transpose() * z;
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
    // Descending Ritz order.
    const Eigen::MatrixXd w = eig.eigenvectors().rowwise().reverse();
    theta = eig.eigenvalues().reverse();
    x = x * w;
    z = z * w;

    double residual = 0.0;
    for (Eigen::Index j = 0; j < keep; ++j) {
      residual = std::max(residual, (z.col(j) - theta[j] * x.col(j)).norm());
    }
    out.iterations = iter;
    out.residual = residual;
    if (residual <= options.tol) {
      out.converged = true;
      break;
    }
    if (iter >= options.max_iters) break;
    x = orthonormalize(z);
  }
  if (!out.converged) {
    warn("truncated_svd stopped after " + std::to_string(out.iterations) +
         " iterations with residual " + std::to_string(out.residual) +
         " > tol " + std::to_string(options.tol));
  }

  out.vectors = x.leftCols(keep);
  fix_signs(out.vectors);
  out.singular_values.resize(keep);
  for (Eigen::Index j = 0; j < keep; ++j) {
    if (theta[j] <= kZeroEigenvalue) {
      out.singular_values[j] = 0.0;
      ++out.padded_columns;
    } else {
      out.singular_values[j] = std::sqrt(theta[j]);
    }
  }
  if (out.padded_columns > 0) {
    warn("eta = " + std::to_string(eta) + " exceeds rank(R~); " +
         std::to_string(out.padded_columns) +
         " columns padded from the null space with zero singular values");
  }
  return out;
}

SignalBlock apply_ideal(const IdealPassBasis& basis, const SignalBlock& x) {
  if (x.rows() != basis.vectors.rows()) {
    throw DimensionMismatch("apply_ideal", basis.vectors.rows(), x.rows());
  }
  const Eigen::MatrixXd coeffs = basis.vectors.transpose() * x;
  return basis.vectors * coeffs;
}

Signal apply_ideal(const IdealPassBasis& basis, const Signal& x) {
  if (x.size() != basis.vectors.rows()) {
    throw DimensionMismatch("apply_ideal", basis.vectors.rows(), x.size());
  }
  const Eigen::VectorXd coeffs = basis.vectors.transpose() * x;
  return basis.vectors * coeffs;
}

}  // namespace chebycf
