#include "usd/feasibility.hpp"

#include <algorithm>
#include <cmath>

namespace usd {

namespace {

void check_probabilities(const DualFrame& frame, const ProbabilityVector& p) {
  if (static_cast<int>(p.size()) != frame.gram.dim())
    throw DimensionError("probability vector length differs from ensemble size");
  for (double pi : p) {
    if (pi < -1e-12 || pi > 1.0 + 1e-9)
      throw Error("detection probability outside [0,1]: " + std::to_string(pi));
  }
}

// sqrt(P) G~ sqrt(P), the N x N compression whose top eigenvalue decides
// feasibility from the dual side.
HermitianMatrix scaled_dual_gram(const DualFrame& frame, const ProbabilityVector& p) {
  const int n = frame.dual_gram.dim();
  HermitianMatrix m(n);
  for (int i = 0; i < n; ++i) {
    const double si = std::sqrt(std::max(0.0, p[i]));
    for (int j = i; j < n; ++j) {
      const double sj = std::sqrt(std::max(0.0, p[j]));
      m.set(i, j, si * sj * frame.dual_gram(i, j));
    }
  }
  return m;
}

}  // namespace

HermitianMatrix inconclusive_operator(const DualFrame& frame, const ProbabilityVector& p) {
  const int d = static_cast<int>(frame.reciprocal_states.front().size());
  HermitianMatrix pi0 = HermitianMatrix::identity(d);
  for (std::size_t i = 0; i < p.size(); ++i)
    add_outer(pi0, frame.reciprocal_states[i], -p[i]);
  return pi0;
}

double pi0_min_eigenvalue(const DualFrame& frame, const ProbabilityVector& p) {
  return min_eigenvalue(inconclusive_operator(frame, p));
}

FeasibilityCertificate is_feasible(const DualFrame& frame, const ProbabilityVector& p,
                                   double tol_psd) {
  check_probabilities(frame, p);
  const double lam_min = pi0_min_eigenvalue(frame, p);
  const double dual_max = max_eigenvalue(scaled_dual_gram(frame, p));
  // Pi_0 = I - V P V^* and sqrt(P) G~ sqrt(P) share nonzero spectra, so
  // lambda_min(Pi_0) = 1 - lambda_max of the compression (the extra
  // eigenvalue 1 on the orthocomplement never wins).
  if (std::abs(lam_min - (1.0 - dual_max)) > 1e-8 * std::max(1.0, dual_max))
    throw Error("feasibility characterizations disagree: lambda_min(Pi_0) = " +
                std::to_string(lam_min) + ", 1 - lambda_max = " +
                std::to_string(1.0 - dual_max));
  FeasibilityCertificate cert;
  cert.min_eigenvalue_pi0 = lam_min;
  cert.feasible = lam_min >= -tol_psd && dual_max <= 1.0 + tol_psd;
  cert.boundary_residual = boundary_polynomial(frame, p);
  return cert;
}

FeasibilityCertificate is_feasible(const Ensemble& ensemble, const ProbabilityVector& p,
                                   double tol_psd) {
  return is_feasible(reciprocal_states(ensemble), p, tol_psd);
}

double boundary_polynomial(const DualFrame& frame, const ProbabilityVector& p) {
  if (static_cast<int>(p.size()) != frame.dual_gram.dim())
    throw DimensionError("probability vector length differs from ensemble size");
  const int n = frame.dual_gram.dim();
  HermitianMatrix m = scaled_dual_gram(frame, p).scaled(-1.0).plus(
      HermitianMatrix::identity(n));
  return hermitian_determinant(m);
}

double boundary_polynomial(const Ensemble& ensemble, const ProbabilityVector& p) {
  return boundary_polynomial(reciprocal_states(ensemble), p);
}

std::vector<FeasibleVertex> enumerate_vertices(const Ensemble& ensemble, int vertex_cap) {
  const int n = ensemble.size();
  if (n > vertex_cap)
    throw Error("enumerate_vertices: " + std::to_string(n) + " states exceed the vertex cap " +
                std::to_string(vertex_cap));
  const DualFrame frame = reciprocal_states(ensemble);
  std::vector<FeasibleVertex> out;
  out.reserve((std::size_t{1} << n) - 1);
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    FeasibleVertex v;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) v.support.push_back(i);
    const int k = static_cast<int>(v.support.size());
    HermitianMatrix sub(k);
    for (int i = 0; i < k; ++i)
      for (int j = i; j < k; ++j)
        sub.set(i, j, frame.dual_gram(v.support[i], v.support[j]));
    const double lam = max_eigenvalue(sub);
    v.p.assign(n, 0.0);
    for (int idx : v.support) v.p[idx] = 1.0 / lam;
    out.push_back(std::move(v));
  }
  return out;
}

double boundary_ray_scale(const DualFrame& frame, const ProbabilityVector& direction,
                          double tol_psd) {
  double mag = 0.0;
  for (double d : direction) mag = std::max(mag, std::abs(d));
  if (mag <= 0.0) throw Error("boundary_ray_scale: zero direction");

  const auto feasible_at = [&](double t) {
    ProbabilityVector p(direction.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = t * direction[i];
    return pi0_min_eigenvalue(frame, p) >= -tol_psd;
  };

  double lo = 0.0, hi = 1.0 / mag;
  while (feasible_at(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e9) throw Error("boundary_ray_scale: no boundary found along ray");
  }
  for (int it = 0; it < 80 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    (feasible_at(mid) ? lo : hi) = mid;
  }
  return lo;
}

std::vector<ProbabilityVector> sample_boundary(const Ensemble& ensemble, int samples) {
  const int n = ensemble.size();
  if (n != 2 && n != 3)
    throw UnsupportedError("sample_boundary supports 2 or 3 states, got " + std::to_string(n));
  if (samples < 2) throw Error("sample_boundary: need at least 2 samples");

  const DualFrame frame = reciprocal_states(ensemble);
  const double half_pi = std::asin(1.0);
  std::vector<ProbabilityVector> out;
  out.reserve(samples);
  for (int k = 0; k < samples; ++k) {
    ProbabilityVector dir(n);
    if (n == 2) {
      const double theta = half_pi * k / (samples - 1);
      dir = {std::cos(theta), std::sin(theta)};
    } else {
      // Golden-ratio lattice over the positive octant.
      const double u = (k + 0.5) / samples;
      const double v = std::fmod(k * 0.6180339887498949, 1.0);
      const double theta = half_pi * u;
      const double phi = half_pi * v;
      dir = {std::sin(phi) * std::cos(theta), std::sin(phi) * std::sin(theta), std::cos(phi)};
    }
    const double t = boundary_ray_scale(frame, dir);
    ProbabilityVector p(n);
    for (int i = 0; i < n; ++i) p[i] = std::clamp(t * dir[i], 0.0, 1.0);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace usd
