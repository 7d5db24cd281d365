#pragma once

// Independent verification: exhaustive grid maximization over the
// feasible set, and a Monte Carlo measurement simulator that checks the
// operational meaning of a returned POVM.

#include <cstdint>

#include "usd/analytic.hpp"

namespace usd {

// SplitMix64: the 64-bit counter generator of Steele, Lea and Flood.
// Chosen because its output is fixed by the seed on every platform, so
// golden simulation outputs stay bit-stable.
struct SplitMix64 {
  std::uint64_t state;
  explicit SplitMix64(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

struct SimulationReport {
  long long trials = 0;
  // counts[k][i]: outcome k (0 = inconclusive, 1..N = identified) given
  // true state i. Column sums equal the per-state trial counts.
  std::vector<std::vector<long long>> counts;
  double empirical_error_rate = 0.0;
  double empirical_failure_rate = 0.0;
  std::uint64_t seed = 0;
};

// Scans the grid {0, 1/(r-1), ..., 1}^N, keeps the feasible points and
// returns the maximum-P one (ties: lexicographically largest p). The
// result is within N * (1/(r-1)) * max eta of the true optimum.
PovmSolution grid_maximize(const Ensemble& ensemble, int resolution);

// Draws the true state from the priors and the outcome from the exact
// Born probabilities <psi_i|Pi_k|psi_i| of the solution's POVM.
// Deterministic given the seed.
SimulationReport simulate_measurement(const Ensemble& ensemble, const PovmSolution& solution,
                                      long long trials, std::uint64_t seed);

}  // namespace usd
