#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "finsler/metric.hpp"
#include "finsler/types.hpp"

namespace finsler {

struct IdentityCheck {
  std::string name;
  double value = 0.0;  // worst observed deviation (or minimum, for positivity)
  double tol = 0.0;
  bool passed = false;
  Vector witness_x;
  Vector witness_v;
};

struct CoreIdentityReport {
  int samples = 0;
  std::vector<IdentityCheck> checks;
  bool passed = false;
};

/// Homogeneity, convexity, positivity of g, Euler identities, the exact g
/// against finite differences and the Legendre duality at random (x, v).
CoreIdentityReport verify_core_identities(const MetricSpec& spec, const Box& domain, int samples = 100,
                                          std::uint64_t seed = 1);

}  // namespace finsler
