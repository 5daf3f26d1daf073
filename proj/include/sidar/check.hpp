#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sidar/model.hpp"

namespace sidar {

/// Random instance generation for the verification suites: A with spectral
/// radius in [0.3, 1.2], B full column rank, G = B T (Assumption 2 by
/// construction), Q and Pf random PSD plus a PD shift, R random PD.
struct InstanceGenOptions {
  int n_max = 3;
  int m_max = 2;
  int q_max = 2;
  int N_min = 1;
  int N_max = 5;
};

ProblemInstance random_instance(std::mt19937_64& rng,
                                const InstanceGenOptions& opts = {});

/// One property-suite outcome. `residual` is the worst violation observed.
struct SuiteResult {
  std::string name;
  bool passed = true;
  bool skipped = false;
  double residual = 0.0;
  std::string detail;
};

struct CheckReport {
  std::vector<SuiteResult> suites;
  bool skipped_a2 = false;  // whole run skipped: range inclusion violated

  bool all_passed() const {
    for (const auto& s : suites) {
      if (!s.skipped && !s.passed) return false;
    }
    return true;
  }
  const SuiteResult* first_failure() const {
    for (const auto& s : suites) {
      if (!s.skipped && !s.passed) return &s;
    }
    return nullptr;
  }
};

/// Runs the invariant suites on one instance: stacked-oracle equivalence,
/// derivative vs finite differences, Riccati monotonicity, cross-form
/// equivalence, and region/solver agreement. Instances violating the range
/// inclusion R(G) in R(B) are skipped (Assumption 2 gates the theory).
CheckReport run_check_suite(const ProblemInstance& inst, std::uint64_t seed);

}  // namespace sidar
