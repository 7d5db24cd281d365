#include "usd/lp.hpp"

#include <algorithm>
#include <cmath>

namespace usd {

Polytope build_polytope(const Ensemble& ensemble) {
  Polytope poly;
  poly.objective = ensemble.priors;
  poly.vertices.push_back(ProbabilityVector(ensemble.size(), 0.0));
  for (auto& v : enumerate_vertices(ensemble)) poly.vertices.push_back(std::move(v.p));
  return poly;
}

PovmSolution solve_lp(const Ensemble& ensemble) {
  const Polytope poly = build_polytope(ensemble);
  const ProbabilityVector* best = nullptr;
  double best_value = -1.0;
  for (const auto& v : poly.vertices) {
    double value = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) value += poly.objective[i] * v[i];
    if (!best || value > best_value + 1e-15 ||
        (value > best_value - 1e-15 &&
         std::lexicographical_compare(best->begin(), best->end(), v.begin(), v.end()))) {
      best = &v;
      best_value = value;
    }
  }
  return make_solution(reciprocal_states(ensemble), ensemble, *best, Method::lp);
}

namespace {

double objective(const std::vector<double>& eta, const ProbabilityVector& p) {
  double v = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) v += eta[i] * p[i];
  return v;
}

// Rescale a trial point back onto the PSD boundary along its ray from
// the origin, staying on the strictly feasible side so the refined Q
// can never undercut the true optimum.
bool pull_to_boundary(const DualFrame& frame, ProbabilityVector& candidate) {
  double mag = 0.0;
  for (double& c : candidate) {
    c = std::max(c, 0.0);
    mag = std::max(mag, c);
  }
  if (mag <= 0.0) return false;
  const double t = boundary_ray_scale(frame, candidate, 0.0);
  for (double& c : candidate) c = std::clamp(t * c, 0.0, 1.0);
  return true;
}

}  // namespace

PovmSolution refine_on_boundary(const Ensemble& ensemble, const ProbabilityVector& start,
                                int steps) {
  const int n = ensemble.size();
  if (static_cast<int>(start.size()) != n)
    throw DimensionError("refine_on_boundary: start has wrong length");
  const DualFrame frame = reciprocal_states(ensemble);
  if (pi0_min_eigenvalue(frame, start) < -tol::psd)
    throw Error("refine_on_boundary: start point is infeasible");

  const std::vector<double>& eta = ensemble.priors;
  double eta_norm = 0.0;
  for (double e : eta) eta_norm += e * e;
  eta_norm = std::sqrt(eta_norm);

  ProbabilityVector x = start;
  double value = objective(eta, x);
  double step = 0.1;

  for (int it = 0; it < steps && step >= 1e-9; ++it) {
    bool accepted = false;

    ProbabilityVector cand = x;
    for (int i = 0; i < n; ++i) cand[i] += step * eta[i] / eta_norm;
    if (pull_to_boundary(frame, cand)) {
      const double v = objective(eta, cand);
      if (v > value + 1e-15) {
        x = std::move(cand);
        value = v;
        accepted = true;
      }
    }

    if (!accepted) {
      // Riding the boundary: project the priors onto the tangent plane
      // of the PSD surface. The outward normal has components
      // |<v_min|dual_i>|^2, from d lambda_min / d p_i.
      const EigenDecomposition eig = hermitian_eig(inconclusive_operator(frame, x));
      std::vector<double> g(n);
      double gg = 0.0, ge = 0.0;
      for (int i = 0; i < n; ++i) {
        g[i] = std::norm(inner(eig.eigenvectors.front(), frame.reciprocal_states[i]));
        gg += g[i] * g[i];
        ge += g[i] * eta[i];
      }
      if (gg > 1e-30) {
        ProbabilityVector tang = x;
        double dnorm = 0.0;
        for (int i = 0; i < n; ++i) {
          const double d = eta[i] / eta_norm - (ge / eta_norm / gg) * g[i];
          tang[i] += step * d;
          dnorm += d * d;
        }
        if (dnorm > 1e-24 && pull_to_boundary(frame, tang)) {
          const double v = objective(eta, tang);
          if (v > value + 1e-15) {
            x = std::move(tang);
            value = v;
            accepted = true;
          }
        }
      }
    }

    if (!accepted) step *= 0.5;
  }

  return make_solution(frame, ensemble, x, Method::lp);
}

}  // namespace usd
