#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Core>

#include "chebycf/sparse.hpp"

namespace chebycf {

struct SvdOptions {
  // Stop when every kept column satisfies ||G v - s^2 v|| <= tol.
  double tol = 1e-10;
  std::size_t max_iters = 3000;
  std::uint64_t seed = 42;
  // Extra columns carried through the iteration and dropped on output.
  std::size_t oversample = 8;
};

// The eta leading right singular vectors of R~ (equivalently the eta
// lowest-frequency eigenvectors of L* = I - R~^T R~).
struct IdealPassBasis {
  std::size_t eta = 0;
  Eigen::MatrixXd vectors;          // num_items x eta, orthonormal columns
  Eigen::VectorXd singular_values;  // descending
  bool converged = false;
  std::size_t iterations = 0;
  double residual = 0.0;          // max ||G v_j - s_j^2 v_j|| at exit
  std::size_t padded_columns = 0;  // columns beyond rank(R~), s = 0
};

// Block subspace iteration on R~^T R~ with Rayleigh-Ritz extraction.
// Deterministic for a given seed. Columns are signed so that their
// largest-magnitude entry is non-negative.
IdealPassBasis truncated_svd(const NormalizedGraph& g, std::size_t eta,
                             const SvdOptions& options = {});

// V V^T x
Signal apply_ideal(const IdealPassBasis& basis, const Signal& x);
SignalBlock apply_ideal(const IdealPassBasis& basis, const SignalBlock& x);

}  // namespace chebycf
