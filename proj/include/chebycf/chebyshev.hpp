#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "chebycf/sparse.hpp"

namespace chebycf {

// First-kind Chebyshev polynomial T_k(x) by the three-term recurrence.
double chebyshev_t(int k, double x);

// The k roots of T_k in increasing order.
std::vector<double> chebyshev_nodes(int k);

// Plateau transfer function on the rescaled frequency in [-1, 1]:
//   1/2 (-x)^phi + 1/2  for x < 0,   -1/2 x^phi + 1/2  for x >= 0.
// plateau(1, phi) = 0 by continuity.
double plateau(double rescaled_lambda, double phi);

// Coefficients c_0..c_order of the Chebyshev interpolant of `target` through
// the order+1 roots of T_{order+1}.
std::vector<double> interpolation_coefficients(
    const std::function<double(double)>& target, int order);

// Evaluates sum_k c_k T_k(x).
double chebyshev_series(const std::vector<double>& coefficients, double x);

struct PlateauTarget {
  double phi;
};
struct CustomTarget {
  std::string name;
};
using FilterTarget = std::variant<PlateauTarget, CustomTarget>;

struct ChebyFilterSpec {
  int order = 0;
  std::vector<double> coefficients;
  FilterTarget target = CustomTarget{"custom"};

  static ChebyFilterSpec plateau(double phi, int order);
  static ChebyFilterSpec interpolate(std::string name,
                                     const std::function<double(double)>& g,
                                     int order);
  // Explicit coefficients; order = coefficients.size() - 1.
  static ChebyFilterSpec from_coefficients(std::vector<double> coefficients,
                                           std::string name = "custom");

  // h_Cheby at a rescaled frequency (2*lambda - 1).
  double transfer(double rescaled_lambda) const {
    return chebyshev_series(coefficients, rescaled_lambda);
  }
};

// sum_k c_k T_k(2L* - I) x via the forward recurrence, holding three signals
// at a time. Exactly `order` Laplacian applications.
Signal apply_chebyshev_filter(const ChebyFilterSpec& spec,
                              const NormalizedGraph& g, const Signal& x);
SignalBlock apply_chebyshev_filter(const ChebyFilterSpec& spec,
                                   const NormalizedGraph& g,
                                   const SignalBlock& x);

// The recurrence terms t_0..t_order for a block. Grid search combines one
// basis with many coefficient vectors.
std::vector<SignalBlock> chebyshev_basis(const NormalizedGraph& g,
                                         const SignalBlock& x, int order);

// sum_{k<=K} c_k t_k over a precomputed basis (basis.size() > K). Produces
// exactly the same bits as apply_chebyshev_filter.
SignalBlock combine_basis(const std::vector<SignalBlock>& basis,
                          const std::vector<double>& coefficients);

}  // namespace chebycf
