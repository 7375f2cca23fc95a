#include "chebycf/chebyshev.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "chebycf/error.hpp"
#include "chebycf/kernels.hpp"

namespace chebycf {
namespace {

std::span<const double> view(const SignalBlock& b) {
  return {b.data(), static_cast<std::size_t>(b.size())};
}
std::span<double> view(SignalBlock& b) {
  return {b.data(), static_cast<std::size_t>(b.size())};
}

void check_spec(const ChebyFilterSpec& spec) {
  if (spec.order < 0 ||
      spec.coefficients.size() != static_cast<std::size_t>(spec.order) + 1) {
    throw InvalidArgument("filter spec of order " + std::to_string(spec.order) +
                          " needs " + std::to_string(spec.order + 1) +
                          " coefficients, has " +
                          std::to_string(spec.coefficients.size()));
  }
}

}  // namespace

double chebyshev_t(int k, double x) {
  if (k < 0) throw InvalidArgument("Chebyshev degree must be non-negative");
  if (k == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (int j = 2; j <= k; ++j) {
    const double next = 2.0 * x * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

std::vector<double> chebyshev_nodes(int k) {
  if (k < 1) throw InvalidArgument("chebyshev_nodes needs k >= 1");
  std::vector<double> nodes(static_cast<std::size_t>(k));
  for (int i = 1; i <= k; ++i) {
    nodes[i - 1] = std::cos(static_cast<double>(2 * k + 1 - 2 * i) /
                            (2.0 * k) * std::numbers::pi);
  }
  return nodes;
}

double plateau(double rescaled_lambda, double phi) {
  if (!(phi > 0.0)) throw InvalidArgument("plateau flatness phi must be > 0");
  constexpr double kSlack = 1e-12;
  if (!(rescaled_lambda >= -1.0 - kSlack && rescaled_lambda <= 1.0 + kSlack)) {
    throw InvalidArgument("plateau argument outside [-1, 1]: " +
                          std::to_string(rescaled_lambda));
  }
  const double x = std::clamp(rescaled_lambda, -1.0, 1.0);
  if (x >= 1.0) return 0.0;
  if (x < 0.0) return 0.5 * std::pow(-x, phi) + 0.5;
  return -0.5 * std::pow(x, phi) + 0.5;
}

std::vector<double> interpolation_coefficients(
    const std::function<double(double)>& target, int order) {
  if (order < 0) throw InvalidArgument("interpolation order must be >= 0");
  const auto nodes = chebyshev_nodes(order + 1);
  std::vector<double> samples(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) samples[i] = target(nodes[i]);

  std::vector<double> c(static_cast<std::size_t>(order) + 1);
  for (int k = 0; k <= order; ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      sum += samples[i] * chebyshev_t(k, nodes[i]);
    }
    const double a = (k == 0) ? 1.0 : 2.0;
    c[k] = a / (order + 1) * sum;
  }
  return c;
}

double chebyshev_series(const std::vector<double>& coefficients, double x) {
  double sum = 0.0;
  double prev = 1.0;
  double cur = x;
  for (std::size_t k = 0; k < coefficients.size(); ++k) {
    if (k == 0) {
      sum += coefficients[0];
    } else if (k == 1) {
      sum += coefficients[1] * x;
    } else {
      const double next = 2.0 * x * cur - prev;
      prev = cur;
      cur = next;
      sum += coefficients[k] * cur;
    }
  }
  return sum;
}

ChebyFilterSpec ChebyFilterSpec::plateau(double phi, int order) {
  if (!(phi > 0.0)) throw InvalidArgument("plateau flatness phi must be > 0");
  ChebyFilterSpec spec;
  spec.order = order;
  spec.coefficients = interpolation_coefficients(
      [phi](double x) { return chebycf::plateau(x, phi); }, order);
  spec.target = PlateauTarget{phi};
  return spec;
}

ChebyFilterSpec ChebyFilterSpec::interpolate(
    std::string name, const std::function<double(double)>& g, int order) {
  ChebyFilterSpec spec;
  spec.order = order;
  spec.coefficients = interpolation_coefficients(g, order);
  spec.target = CustomTarget{std::move(name)};
  return spec;
}

ChebyFilterSpec ChebyFilterSpec::from_coefficients(
    std::vector<double> coefficients, std::string name) {
  if (coefficients.empty()) {
    throw InvalidArgument("a filter needs at least one coefficient");
  }
  ChebyFilterSpec spec;
  spec.order = static_cast<int>(coefficients.size()) - 1;
  spec.coefficients = std::move(coefficients);
  spec.target = CustomTarget{std::move(name)};
  return spec;
}

SignalBlock apply_chebyshev_filter(const ChebyFilterSpec& spec,
                                   const NormalizedGraph& g,
                                   const SignalBlock& x) {
  check_spec(spec);
  if (static_cast<std::size_t>(x.rows()) != g.num_items()) {
    throw DimensionMismatch("apply_chebyshev_filter", g.num_items(), x.rows());
  }
  const auto width = static_cast<std::size_t>(x.cols());
  SignalBlock acc(x.rows(), x.cols());
  kernels::omp::scale_into(spec.coefficients[0], view(x), view(acc));
  if (spec.order == 0) return acc;

  std::vector<double> scratch(g.num_users() * width);
  SignalBlock prev = x;
  SignalBlock cur(x.rows(), x.cols());
  detail::rescaled_laplacian_into(g, view(prev), view(cur), width, scratch);
  kernels::omp::axpy(spec.coefficients[1], view(cur), view(acc));

  SignalBlock next(x.rows(), x.cols());
  for (int k = 2; k <= spec.order; ++k) {
    detail::rescaled_laplacian_into(g, view(cur), view(next), width, scratch);
    kernels::omp::chebyshev_step(view(prev), view(next));
    kernels::omp::axpy(spec.coefficients[k], view(next), view(acc));
    std::swap(prev, cur);
    std::swap(cur, next);
  }
  return acc;
}

Signal apply_chebyshev_filter(const ChebyFilterSpec& spec,
                              const NormalizedGraph& g, const Signal& x) {
  if (static_cast<std::size_t>(x.size()) != g.num_items()) {
    throw DimensionMismatch("apply_chebyshev_filter", g.num_items(), x.size());
  }
  const SignalBlock in = Eigen::Map<const SignalBlock>(x.data(), x.size(), 1);
  const SignalBlock out = apply_chebyshev_filter(spec, g, in);
  return Eigen::Map<const Signal>(out.data(), out.rows());
}

std::vector<SignalBlock> chebyshev_basis(const NormalizedGraph& g,
                                         const SignalBlock& x, int order) {
  if (order < 0) throw InvalidArgument("Chebyshev order must be >= 0");
  if (static_cast<std::size_t>(x.rows()) != g.num_items()) {
    throw DimensionMismatch("chebyshev_basis", g.num_items(), x.rows());
  }
  const auto width = static_cast<std::size_t>(x.cols());
  std::vector<double> scratch(g.num_users() * width);
  std::vector<SignalBlock> basis;
  basis.reserve(static_cast<std::size_t>(order) + 1);
  basis.push_back(x);
  for (int k = 1; k <= order; ++k) {
    SignalBlock next(x.rows(), x.cols());
    detail::rescaled_laplacian_into(g, view(basis[k - 1]), view(next), width,
                                    scratch);
    if (k >= 2) kernels::omp::chebyshev_step(view(basis[k - 2]), view(next));
    basis.push_back(std::move(next));
  }
  return basis;
}

SignalBlock combine_basis(const std::vector<SignalBlock>& basis,
                          const std::vector<double>& coefficients) {
  if (coefficients.empty() || basis.size() < coefficients.size()) {
    throw InvalidArgument("basis has " + std::to_string(basis.size()) +
                          " terms, filter needs " +
                          std::to_string(coefficients.size()));
  }
  SignalBlock acc(basis[0].rows(), basis[0].cols());
  kernels::omp::scale_into(coefficients[0], view(basis[0]), view(acc));
  for (std::size_t k = 1; k < coefficients.size(); ++k) {
    kernels::omp::axpy(coefficients[k], view(basis[k]), view(acc));
  }
  return acc;
}

}  // namespace chebycf
