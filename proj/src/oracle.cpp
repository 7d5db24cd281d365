#include "usd/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace usd {

PovmSolution grid_maximize(const Ensemble& ensemble, int resolution) {
  const int n = ensemble.size();
  if (n > 4) throw UnsupportedError("grid_maximize: exhaustive scan supports N <= 4");
  if (resolution < 11) throw Error("grid_maximize: resolution must be at least 11");

  const DualFrame frame = reciprocal_states(ensemble);
  const auto grid_value = [&](int j) { return static_cast<double>(j) / (resolution - 1); };
  const auto feasible = [&](const ProbabilityVector& p) {
    return pi0_min_eigenvalue(frame, p) >= -tol::psd;
  };

  ProbabilityVector best;
  double best_value = -1.0;
  const auto consider = [&](const ProbabilityVector& p) {
    double value = 0.0;
    for (int i = 0; i < n; ++i) value += ensemble.priors[i] * p[i];
    if (best.empty() || value > best_value + 1e-15 ||
        (value > best_value - 1e-15 &&
         std::lexicographical_compare(best.begin(), best.end(), p.begin(), p.end()))) {
      best = p;
      best_value = value;
    }
  };

  // Walk the grid over the first N-1 coordinates; along the last one
  // lambda_min(Pi_0) is monotone, so the largest feasible index comes
  // from a binary search and dominates its column under the (P, lex)
  // order. This is exactly the exhaustive scan, column by column.
  std::vector<int> idx(n - 1, 0);
  ProbabilityVector p(n, 0.0);
  while (true) {
    for (int i = 0; i < n - 1; ++i) p[i] = grid_value(idx[i]);
    p[n - 1] = 0.0;
    if (feasible(p)) {
      int lo = 0, hi = resolution - 1;
      p[n - 1] = grid_value(hi);
      if (feasible(p)) {
        lo = hi;
      } else {
        while (hi - lo > 1) {
          const int mid = (lo + hi) / 2;
          p[n - 1] = grid_value(mid);
          (feasible(p) ? lo : hi) = mid;
        }
      }
      p[n - 1] = grid_value(lo);
      consider(p);
    }
    int carry = n - 2;
    while (carry >= 0 && ++idx[carry] == resolution) idx[carry--] = 0;
    if (carry < 0) break;
  }

  if (best.empty()) throw Error("grid_maximize: no feasible grid point (unexpected)");
  return make_solution(frame, ensemble, best, Method::oracle);
}

SimulationReport simulate_measurement(const Ensemble& ensemble, const PovmSolution& solution,
                                      long long trials, std::uint64_t seed) {
  const int n = ensemble.size();
  if (trials < 1) throw Error("simulate_measurement: need at least one trial");
  if (static_cast<int>(solution.p.size()) != n)
    throw DimensionError("simulate_measurement: solution length mismatch");
  const DualFrame frame = reciprocal_states(ensemble);
  if (pi0_min_eigenvalue(frame, solution.p) < -tol::psd)
    throw Error("simulate_measurement: solution is not a valid POVM (Pi_0 not PSD)");

  // Born probabilities <psi_i|Pi_k|psi_i> = p_k |<dual_k|psi_i>|^2,
  // computed from the operators rather than assumed diagonal.
  std::vector<std::vector<double>> outcome_cdf(n, std::vector<double>(n + 1, 0.0));
  for (int i = 0; i < n; ++i) {
    std::vector<double> q(n + 1, 0.0);
    double sum = 0.0;
    for (int k = 1; k <= n; ++k) {
      q[k] = solution.p[k - 1] *
             std::norm(inner(frame.reciprocal_states[k - 1], ensemble.states[i].amplitudes));
      sum += q[k];
    }
    q[0] = std::max(0.0, 1.0 - sum);
    double acc = 0.0;
    for (int k = 0; k <= n; ++k) {
      acc += q[k];
      outcome_cdf[i][k] = acc;
    }
    outcome_cdf[i][n] = std::max(outcome_cdf[i][n], 1.0);
  }
  std::vector<double> prior_cdf(n, 0.0);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += ensemble.priors[i];
    prior_cdf[i] = acc;
  }
  prior_cdf[n - 1] = std::max(prior_cdf[n - 1], 1.0);

  SimulationReport report;
  report.trials = trials;
  report.seed = seed;
  report.counts.assign(n + 1, std::vector<long long>(n, 0));

  SplitMix64 rng(seed);
  long long errors = 0, failures = 0;
  for (long long t = 0; t < trials; ++t) {
    const double u1 = rng.uniform();
    int i = 0;
    while (i < n - 1 && u1 >= prior_cdf[i]) ++i;
    const double u2 = rng.uniform();
    int k = 0;
    while (k < n && u2 >= outcome_cdf[i][k]) ++k;
    ++report.counts[k][i];
    if (k == 0)
      ++failures;
    else if (k - 1 != i)
      ++errors;
  }
  report.empirical_error_rate = static_cast<double>(errors) / trials;
  report.empirical_failure_rate = static_cast<double>(failures) / trials;
  return report;
}

}  // namespace usd
