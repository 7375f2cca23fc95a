#include "chebycf/synthetic.hpp"

#include <random>

#include "chebycf/error.hpp"

namespace chebycf::synthetic {
namespace {

using Pairs = std::vector<std::pair<Index, Index>>;

void split(std::mt19937_64& rng, double test_fraction, Index u, Index i,
           Pairs& train, Pairs& test) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (test_fraction > 0.0 && unit(rng) < test_fraction) {
    test.emplace_back(u, i);
  } else {
    train.emplace_back(u, i);
  }
}

}  // namespace

InteractionDataset random_dataset(const RandomGraphOptions& o) {
  if (o.users == 0 || o.items == 0) {
    throw InvalidArgument("random graph needs at least one user and item");
  }
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Pairs train;
  Pairs test;
  for (std::size_t u = 0; u < o.users; ++u) {
    for (std::size_t i = 0; i < o.items; ++i) {
      const bool chain = o.backbone && (i == u % o.items || i == (u + 1) % o.items);
      if (chain) {
        train.emplace_back(Index(u), Index(i));
      } else if (unit(rng) < o.density) {
        split(rng, o.test_fraction, Index(u), Index(i), train, test);
      }
    }
  }
  return make_dataset(o.users, o.items, std::move(train), std::move(test));
}

InteractionDataset clustered_dataset(const ClusteredOptions& o) {
  if (o.clusters == 0 || o.users == 0 || o.items == 0) {
    throw InvalidArgument("clustered graph needs users, items and clusters");
  }
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Pairs train;
  Pairs test;
  for (std::size_t u = 0; u < o.users; ++u) {
    const std::size_t cu = u * o.clusters / o.users;
    for (std::size_t i = 0; i < o.items; ++i) {
      const std::size_t ci = i * o.clusters / o.items;
      const double p = (cu == ci) ? o.in_density : o.out_density;
      if (unit(rng) < p) {
        split(rng, o.test_fraction, Index(u), Index(i), train, test);
      }
    }
  }
  return make_dataset(o.users, o.items, std::move(train), std::move(test));
}

}  // namespace chebycf::synthetic
