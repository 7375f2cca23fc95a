#pragma once

// Dense reference implementations for small graphs. Everything here
// materialises L* = I - R~^T R~ (or R~ itself) and decomposes it, so it is
// only meant for instances of a few hundred to a couple of thousand items.

#include <cstddef>
#include <functional>

#include <Eigen/Core>

#include "chebycf/partial_svd.hpp"
#include "chebycf/pipeline.hpp"
#include "chebycf/sparse.hpp"

namespace chebycf::oracle {

using Transfer = std::function<double(double)>;

struct OracleOptions {
  std::size_t item_cap = 2000;
  std::size_t warn_above = 500;
};

struct DenseSpectrum {
  Eigen::VectorXd eigenvalues;   // ascending, clamped to [0, 1]
  Eigen::MatrixXd eigenvectors;  // columns match eigenvalues
  Eigen::VectorXd singular_values;          // descending, min(users, items)
  Eigen::MatrixXd left_singular_vectors;    // users x users
  Eigen::MatrixXd right_singular_vectors;   // items x items
};

Eigen::MatrixXd densify(const CsrMatrix& m);
Eigen::MatrixXd dense_laplacian(const NormalizedGraph& g);

// Full eigendecomposition of L* and SVD of R~.
DenseSpectrum dense_spectrum(const NormalizedGraph& g,
                             const OracleOptions& options = {});

// Q diag(h(lambda_i)) Q^T x, h evaluated on the unscaled frequency in [0, 1].
Signal dense_filter(const DenseSpectrum& s, const Transfer& h, const Signal& x);
Eigen::MatrixXd dense_filter_matrix(const DenseSpectrum& s, const Transfer& h);

// The ChebyCF transfer h_Cheby(2 lambda - 1) of a filter spec.
Transfer chebyshev_transfer(const ChebyFilterSpec& spec);

// Q diag(1 x eta, 0 ...) Q^T: the lowest-eta-frequency projector.
Eigen::MatrixXd dense_ideal_projector(const DenseSpectrum& s, std::size_t eta);

// Filter-on-the-generalised-Laplacian route: eigendecompose the asymmetric
// D^beta L* D^-beta directly and build
//   P diag(h_Cheby(2 lambda - 1) + alpha [i <= eta]) P^-1.
Eigen::MatrixXd generalized_laplacian_filter(const NormalizedGraph& g,
                                             const ChebyFilterSpec& spec,
                                             double alpha, std::size_t eta,
                                             double beta);

struct LowRankEquivalenceCheck {
  double max_deviation = 0.0;
  std::size_t requested_d = 0;
  std::size_t effective_d = 0;  // differs when sigma_d == sigma_{d+1}
  bool degenerate = false;
};

// One-layer linear GCN with optimal rank-d embeddings vs. the spectral filter
// (1 - lambda) [lambda <= lambda_d] applied to the rows of R~.
LowRankEquivalenceCheck verify_lowrank_equivalence(
    const NormalizedGraph& g, std::size_t d, const OracleOptions& options = {});

struct LowRankCheck {
  double residual = 0.0;   // ||R~ - U_d S_d V_d^T||_F
  double predicted = 0.0;  // sqrt(sum_{i>d} s_i^2)
  double deviation() const { return std::abs(residual - predicted); }
};
LowRankCheck verify_eckart_young(const NormalizedGraph& g, std::size_t d,
                                 const OracleOptions& options = {});

struct PairingCheck {
  double max_value_deviation = 0.0;  // max |1 - s_i^2 - lambda_i|
  double max_subspace_angle = 0.0;   // radians, over eigenvalue clusters
};
// Singular values (extended with zeros) against eigenvalues of L*, and right
// singular vectors against eigenvectors cluster by cluster.
PairingCheck verify_singular_eigen_pairing(const DenseSpectrum& s,
                                           double cluster_tol = 1e-6);
// The same pairing for a computed partial basis: its leading eta values and
// the span of its vectors against the dense lowest-eta eigenspace.
PairingCheck verify_basis_pairing(const DenseSpectrum& s,
                                  const IdealPassBasis& basis);

// Largest principal angle between the column spans of two orthonormal bases.
double principal_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// (1/L) sum_{l=1..L} (R~^T R~)^l x, matrix-free.
Signal linear_lowpass_filter(const NormalizedGraph& g, int layers,
                             const Signal& x);
SignalBlock linear_lowpass_filter(const NormalizedGraph& g, int layers,
                                  const SignalBlock& x);
// Its transfer function (1/L) sum (1 - lambda)^l.
Transfer linear_lowpass_transfer(int layers);

// h = base on the lowest ceil(keep_ratio * n) frequencies, 0 above.
Signal truncated_filter(const DenseSpectrum& s, const Transfer& base,
                        double keep_ratio, const Signal& x);
Eigen::MatrixXd truncated_filter_matrix(const DenseSpectrum& s,
                                        const Transfer& base,
                                        double keep_ratio);

}  // namespace chebycf::oracle
