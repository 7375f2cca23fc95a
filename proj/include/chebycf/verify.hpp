#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "chebycf/sparse.hpp"

namespace chebycf::verify {

struct CheckResult {
  std::string name;
  std::string instances;  // human-readable size summary
  double deviation = 0.0;
  double tolerance = 0.0;
  bool passed() const { return deviation <= tolerance; }
};

struct VerifyOptions {
  std::uint64_t seed = 42;
  std::size_t instances = 20;
  std::size_t min_items = 30;
  std::size_t max_items = 200;
  double min_density = 0.02;
  double max_density = 0.10;
};

// Random graph in the configured size/density range whose squared singular
// values have a relative gap >= 1e-3 after each index in `gaps` (so
// truncations at those ranks are unambiguous). Seeds are drawn from `seed`
// onwards; returns the accepted seed in *used_seed when non-null.
InteractionDataset nondegenerate_instance(const VerifyOptions& options,
                                          std::uint64_t seed,
                                          const std::vector<std::size_t>& gaps,
                                          std::uint64_t* used_seed = nullptr);

// The oracle suite: matrix-free operators against the dense spectral
// reference, the low-rank/spectral-cutoff equivalence, the singular/eigen
// pairing and the degree-normalisation similarity identity.
std::vector<CheckResult> run_verification(const VerifyOptions& options = {});

void write_report(std::ostream& out, const std::vector<CheckResult>& results);

}  // namespace chebycf::verify
