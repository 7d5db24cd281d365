#pragma once

// Feasible region of detection probabilities p: the set where
// Pi_0 = I - sum_i p_i |dual_i><dual_i| stays positive semidefinite.
// Three equivalent characterizations live here: the eigenvalue test on
// Pi_0, the dual-Gram test lambda_max(sqrt(P) G~ sqrt(P)) <= 1, and the
// boundary polynomial det(I - sqrt(P) G~ sqrt(P)) whose zero set is the
// PSD boundary (normalized to +1 at p = 0).

#include <vector>

#include "usd/ensemble.hpp"

namespace usd {

using ProbabilityVector = std::vector<double>;

struct FeasibilityCertificate {
  bool feasible = false;
  double min_eigenvalue_pi0 = 0.0;
  double boundary_residual = 0.0;
};

// Pi_0 = I - sum_i p_i |dual_i><dual_i| on the full d-dimensional space.
HermitianMatrix inconclusive_operator(const DualFrame& frame, const ProbabilityVector& p);

// lambda_min(Pi_0) without the cross-check, for hot loops.
double pi0_min_eigenvalue(const DualFrame& frame, const ProbabilityVector& p);

// Computes both the Pi_0 eigenvalue test and the primal test
// lambda_max(sqrt(P) G~ sqrt(P)) <= 1; the two must agree.
FeasibilityCertificate is_feasible(const DualFrame& frame, const ProbabilityVector& p,
                                   double tol_psd = tol::psd);
FeasibilityCertificate is_feasible(const Ensemble& ensemble, const ProbabilityVector& p,
                                   double tol_psd = tol::psd);

// det(I_N - sqrt(P) G~ sqrt(P)): the alternating sum over principal
// minors of the dual Gram matrix, 1 - sum D_i p_i + sum D_ij p_i p_j - ...
// Equals +1 at p = 0 and vanishes exactly on the PSD boundary.
double boundary_polynomial(const DualFrame& frame, const ProbabilityVector& p);
double boundary_polynomial(const Ensemble& ensemble, const ProbabilityVector& p);

struct FeasibleVertex {
  std::vector<int> support;  // indices with nonzero p
  ProbabilityVector p;
};

// One boundary point per nonempty subset T: p_i = 1/lambda_max(S~_T) on
// T and 0 elsewhere, where S~_T sums the dual projectors over T. Each
// point has lambda_min(Pi_0) = 0; there are 2^N - 1 of them.
std::vector<FeasibleVertex> enumerate_vertices(const Ensemble& ensemble, int vertex_cap = 20);

// Boundary points along `samples` rays through the positive orthant,
// located by bisection on lambda_min(Pi_0) = 0. N in {2,3} only.
std::vector<ProbabilityVector> sample_boundary(const Ensemble& ensemble, int samples);

// Largest t >= 0 with t * direction feasible (bisection, 80 iterations
// or interval width 1e-12). Shared by sample_boundary and the LP refiner.
double boundary_ray_scale(const DualFrame& frame, const ProbabilityVector& direction,
                          double tol_psd = tol::psd);

}  // namespace usd
