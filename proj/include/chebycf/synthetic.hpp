#pragma once

#include <cstddef>
#include <cstdint>

#include "chebycf/sparse.hpp"

namespace chebycf::synthetic {

struct RandomGraphOptions {
  std::size_t users = 50;
  std::size_t items = 80;
  double density = 0.05;
  // Fraction of sampled interactions moved to the test split.
  double test_fraction = 0.0;
  // Adds user u -> items (u mod n, u+1 mod n) so the bipartite graph is
  // connected whenever users >= items.
  bool backbone = false;
  std::uint64_t seed = 42;
};

// Bernoulli(density) interactions, deterministic for a given seed.
InteractionDataset random_dataset(const RandomGraphOptions& options);

struct ClusteredOptions {
  std::size_t users = 400;
  std::size_t items = 300;
  std::size_t clusters = 6;
  double in_density = 0.15;
  double out_density = 0.01;
  double test_fraction = 0.2;
  std::uint64_t seed = 42;
};

// Users and items split into equal-sized communities; interactions are far
// more likely inside a user's own community. Gives ranking tests a signal.
InteractionDataset clustered_dataset(const ClusteredOptions& options);

}  // namespace chebycf::synthetic
