#pragma once

// Lewenstein-Sanpera-style maximal subtraction of projections from a
// density operator, and its reduction (rho = I) to optimal unambiguous
// discrimination: single and pair maximal weights, the manifold
// polynomial over dual-Gram minors, the three-state KKT case analysis,
// and a numerical KKT optimality certificate.

#include "usd/analytic.hpp"

namespace usd {

struct CollinearDualError : Error {
  using Error::Error;
};

struct DualGramData {
  HermitianMatrix a_tilde;     // a~_ij = <v_i| rho^+ |v_j>
  HermitianMatrix rho;         // always the identity in the USD reduction
  std::vector<double> minors;  // principal minors of a_tilde by subset bitmask
};

DualGramData make_dual_gram_data(const Ensemble& ensemble);
DualGramData make_dual_gram_data(const std::vector<CVector>& vectors,
                                 const HermitianMatrix& rho);

// Lemma-1 maximal weight: 0 if psi_tilde leaves the range of rho,
// otherwise 1/<psi_tilde|rho^+|psi_tilde>; rho - p|psi~><psi~| stays PSD
// and no larger p does.
double lsd_single(const HermitianMatrix& rho, const CVector& psi_tilde);

// Lemma-2 maximal pair with prior weights: in the generic case
// p_1 = (a~22 - sqrt(eta2/eta1)|a~12|)/(a~11 a~22 - |a~12|^2) and
// symmetrically; when either formula goes negative the corresponding
// boundary solution (0, 1/a~22) or (1/a~11, 0) applies.
std::pair<double, double> lsd_pair(const HermitianMatrix& rho, const CVector& v1,
                                   const CVector& v2, double eta1, double eta2);

// Lemma-3 manifold polynomial
//   1 - sum_i D_i p_i + sum_{i<j} D_ij p_i p_j - ...
// from the cached principal minors. Agrees with boundary_polynomial.
double lsd_manifold_residual(const DualGramData& data, const ProbabilityVector& p);

// Three-state optimum through the KKT case analysis on dual-Gram
// entries: full-rank closed form guarded by its validity inequalities,
// then the three two-state boundary branches, then projective fallback.
PovmSolution solve_kkt_three(const Ensemble& ensemble);

// Reciprocal set with <v_i|v_j> = a off-diagonal, 1 on diagonal:
// p_i = 1/(1 + a(n-1)), the inverse top eigenvalue of the dual Gram.
ProbabilityVector solve_lsd_equiangular_dual(int n, double a);

// Numerical KKT check: Pi_0 PSD, p >= 0, and a PSD dual certificate X
// supported on the kernel of Pi_0 with Tr(X |dual_i><dual_i|) = eta_i + z_i,
// z_i >= 0, z_i p_i = 0. Returns false when no such X exists.
bool kkt_certificate(const Ensemble& ensemble, const PovmSolution& solution);

// Dispatch over N = 1, 2, 3 (zero-prior states dropped first).
PovmSolution solve_lsd(const Ensemble& ensemble);

}  // namespace usd
