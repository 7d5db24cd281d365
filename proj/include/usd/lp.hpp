#pragma once

// Linear-programming approximation over the polytope spanned by the
// feasibility vertices, plus a projected-ascent refinement that closes
// the gap between the polytope and the true convex region.

#include "usd/analytic.hpp"

namespace usd {

struct Polytope {
  std::vector<ProbabilityVector> vertices;  // includes the origin
  std::vector<double> objective;            // the priors
};

Polytope build_polytope(const Ensemble& ensemble);

// Maximizes sum eta_i p_i over the polytope vertices. The hull is an
// inner approximation of the feasible region, so Q_lp >= Q_optimal.
PovmSolution solve_lp(const Ensemble& ensemble);

// Projected ascent from a feasible start: step along the prior
// direction, pull back to the PSD boundary by bisection along the ray
// from the origin, and keep only improving moves (with boundary-tangent
// escape steps when the raw direction stalls). Q never increases.
PovmSolution refine_on_boundary(const Ensemble& ensemble, const ProbabilityVector& start,
                                int steps = 200);

}  // namespace usd
