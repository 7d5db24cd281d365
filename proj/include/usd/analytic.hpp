#pragma once

// Closed-form optimal measurements: the two-state piecewise solution,
// the three-state tangency/plane/vertex case analysis, equiangular and
// geometrically uniform families, equal-probability-measurement priors,
// and the Bloch-chord identity for qubit pairs.

#include <array>
#include <optional>

#include "usd/feasibility.hpp"

namespace usd {

struct InvalidOverlapError : Error {
  using Error::Error;
};
struct NoEpmSolutionError : Error {
  using Error::Error;
};

enum class Method { analytic, lp, lsd, oracle, epm };
const char* method_name(Method m);

struct PovmSolution {
  ProbabilityVector p;
  double q_fail = 1.0;     // inconclusive probability Q
  double p_success = 0.0;  // P = sum_i eta_i p_i = 1 - Q
  Method method = Method::analytic;
  FeasibilityCertificate certificate;
  std::optional<double> multiplier;  // tangency multiplier, when applicable
};

// Assembles a PovmSolution from a candidate p, recomputing P, Q and the
// feasibility certificate. Throws if p is infeasible.
PovmSolution make_solution(const DualFrame& frame, const Ensemble& ensemble,
                           ProbabilityVector p, Method method,
                           std::optional<double> multiplier = std::nullopt);

// True if `a` should win a minimum-Q comparison against `b`: smaller Q;
// on a 1e-12 tie, larger min p_i, then lexicographically larger p.
bool better_solution(const ProbabilityVector& pa, double qa, const ProbabilityVector& pb,
                     double qb);

// Piecewise two-state optimum. Middle regime
// |a12| <= sqrt(eta2/eta1) <= 1/|a12| gives p_i = 1 - sqrt(eta_k/eta_i)|a12|
// and Q = 2 sqrt(eta1 eta2)|a12|; outside it one detector is switched off
// and the survivor sits on the boundary at 1 - |a12|^2.
PovmSolution solve_two_state(const Ensemble& ensemble);

// Three-state optimum: interior tangency candidates from the gradient
// system (1-p_j)(1-p_k) = |a_jk|^2 + Lambda eta_i, coordinate-plane
// tangencies, and single-state vertices; the feasible minimum-Q point wins.
PovmSolution solve_three_state(const Ensemble& ensemble);

// Equiangular family <psi_i|psi_j> = s with equal priors: p_i = 1 - s,
// Q = s. States are realized in dimension n via the Gram square root.
PovmSolution solve_equiangular(int n, double s);

// Geometrically uniform states {U_i |psi>}: equal-probability optimum
// p = 1 / lambda_max of the dual frame operator, with duals U_i |dual>.
PovmSolution solve_gu(const StateVector& generating_state, const std::vector<CMatrix>& group);

// Dispatch: drops zero-prior states, then N = 1, 2, 3 closed forms; for
// N >= 4 only real equiangular structure with equal priors is accepted.
PovmSolution solve_analytic(const Ensemble& ensemble);

struct EpmPriors {
  std::array<double, 3> priors{};            // verified priors
  double p = 0.0;                            // common detection probability
  double multiplier = 0.0;                   // Lambda at the equal-p tangency
  std::array<double, 3> printed_form{};      // closed form as printed
  std::array<double, 3> symmetrized_form{};  // with the linear a23 terms squared
  bool printed_matches = false;
};

// Priors for which the equal-p measurement is the optimal tangency
// point. Built from the largest root u of
//   u^3 - (a12^2 + a13^2 + a23^2) u + 2 a12 a13 a23 = 0
// on [max a_jk, 1): eta_i = (u^2 - a_jk^2) / (3u^2 - sum a^2), p = 1 - u.
// The printed closed form is evaluated for comparison but not trusted.
EpmPriors epm_priors(double a12, double a13, double a23);

// Distance from the Bloch-sphere center to the segment joining two pure
// Bloch vectors; equals the equal-prior two-state Q = |<psi1|psi2>|.
double bloch_chord_q(const std::array<double, 3>& n1, const std::array<double, 3>& n2);

namespace detail {

// Moduli m = {|a12|, |a13|, |a23|} and the gauge invariant
// r3 = Re(a12 a23 a31); everything the three-state geometry depends on.
struct ThreeStateOverlaps {
  std::array<double, 3> m{};
  double r3 = 0.0;
};
ThreeStateOverlaps three_state_overlaps(const Ensemble& ensemble);

struct TangencyCandidate {
  ProbabilityVector p;
  double lambda = 0.0;
};

// All interior tangency candidates: the paper's eight Lambda values plus
// a bracket sweep of the boundary-residual equation. Each returned point
// satisfies the gradient system and lies on the boundary manifold.
std::vector<TangencyCandidate> three_state_tangency(const ThreeStateOverlaps& ov,
                                                    const std::array<double, 3>& priors);

// Two-state optimum from the overlap modulus and (unnormalized) priors.
std::pair<double, double> two_state_pair(double overlap, double eta1, double eta2);

}  // namespace detail

}  // namespace usd
