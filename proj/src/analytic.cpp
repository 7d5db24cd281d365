#include "usd/analytic.hpp"

#include <algorithm>
#include <cmath>

namespace usd {

const char* method_name(Method m) {
  switch (m) {
    case Method::analytic: return "analytic";
    case Method::lp: return "lp";
    case Method::lsd: return "lsd";
    case Method::oracle: return "oracle";
    case Method::epm: return "epm";
  }
  return "?";
}

PovmSolution make_solution(const DualFrame& frame, const Ensemble& ensemble,
                           ProbabilityVector p, Method method,
                           std::optional<double> multiplier) {
  for (double& pi : p) {
    if (pi < 0.0 && pi > -1e-12) pi = 0.0;
    if (pi > 1.0 && pi < 1.0 + 1e-12) pi = 1.0;
  }
  PovmSolution s;
  s.p = std::move(p);
  s.p_success = 0.0;
  for (int i = 0; i < ensemble.size(); ++i) s.p_success += ensemble.priors[i] * s.p[i];
  s.q_fail = 1.0 - s.p_success;
  s.method = method;
  s.multiplier = multiplier;
  s.certificate = is_feasible(frame, s.p);
  if (!s.certificate.feasible)
    throw Error("make_solution: candidate infeasible, lambda_min(Pi_0) = " +
                std::to_string(s.certificate.min_eigenvalue_pi0));
  return s;
}

bool better_solution(const ProbabilityVector& pa, double qa, const ProbabilityVector& pb,
                     double qb) {
  if (qa < qb - 1e-12) return true;
  if (qb < qa - 1e-12) return false;
  const double ma = *std::min_element(pa.begin(), pa.end());
  const double mb = *std::min_element(pb.begin(), pb.end());
  if (ma > mb + 1e-12) return true;
  if (mb > ma + 1e-12) return false;
  return std::lexicographical_compare(pb.begin(), pb.end(), pa.begin(), pa.end());
}

namespace detail {

std::pair<double, double> two_state_pair(double overlap, double eta1, double eta2) {
  if (eta1 <= 0.0 || eta2 <= 0.0)
    throw DegeneratePriorError("two-state solution needs positive priors");
  if (overlap <= 0.0) return {1.0, 1.0};
  const double ratio = std::sqrt(eta2 / eta1);
  if (ratio < overlap) return {1.0 - overlap * overlap, 0.0};
  if (ratio > 1.0 / overlap) return {0.0, 1.0 - overlap * overlap};
  return {1.0 - ratio * overlap, 1.0 - overlap / ratio};
}

ThreeStateOverlaps three_state_overlaps(const Ensemble& ensemble) {
  const HermitianMatrix g = gram_matrix(ensemble);
  ThreeStateOverlaps ov;
  ov.m = {std::abs(g(0, 1)), std::abs(g(0, 2)), std::abs(g(1, 2))};
  // a12 a23 a31 is invariant under per-state phase changes.
  ov.r3 = (g(0, 1) * g(1, 2) * g(2, 0)).real();
  return ov;
}

namespace {

// Gradient offsets: A_i = m_jk^2 + Lambda eta_i, where m_jk is the
// overlap of the two states other than i.
std::array<double, 3> gradient_offsets(const ThreeStateOverlaps& ov,
                                       const std::array<double, 3>& priors, double lambda) {
  return {ov.m[2] * ov.m[2] + lambda * priors[0], ov.m[1] * ov.m[1] + lambda * priors[1],
          ov.m[0] * ov.m[0] + lambda * priors[2]};
}

// Residual of det(G - P) = 0 along the gradient system, in terms of
// u_i = 1 - p_i:  u1 u2 u3 + 2 r3 - (m23^2 u1 + m13^2 u2 + m12^2 u3).
double boundary_residual_u(const ThreeStateOverlaps& ov, const std::array<double, 3>& u) {
  return u[0] * u[1] * u[2] + 2.0 * ov.r3 -
         (ov.m[2] * ov.m[2] * u[0] + ov.m[1] * ov.m[1] * u[1] + ov.m[0] * ov.m[0] * u[2]);
}

bool solve_u(const std::array<double, 3>& a, std::array<double, 3>& u) {
  for (double ai : a)
    if (ai <= 1e-14) return false;
  u = {std::sqrt(a[1] * a[2] / a[0]), std::sqrt(a[0] * a[2] / a[1]),
       std::sqrt(a[0] * a[1] / a[2])};
  return true;
}

}  // namespace

std::vector<TangencyCandidate> three_state_tangency(const ThreeStateOverlaps& ov,
                                                    const std::array<double, 3>& priors) {
  const double m12 = ov.m[0], m13 = ov.m[1], m23 = ov.m[2];
  const double e1 = priors[0], e2 = priors[1], e3 = priors[2];

  std::vector<double> lambdas;
  const auto push = [&](double l) {
    if (!std::isfinite(l)) return;
    for (double x : lambdas)
      if (std::abs(x - l) <= 1e-10 * (1.0 + std::abs(l))) return;
    lambdas.push_back(l);
  };

  // The eight stationary-multiplier values of the gradient/boundary
  // system; only two are generically admissible but all are screened.
  push(0.0);
  push(-m23 * m23 / e1);
  push(-m13 * m13 / e2);
  push(-m12 * m12 / e3);
  const double s12 = std::sqrt(e1 * e2), s123 = std::sqrt(e1 * e2 * e3);
  const double cross = m13 * m23 / s12;
  const double plus = m12 * (m13 * std::sqrt(e1) + m23 * std::sqrt(e2)) / s123;
  const double minus = m12 * (m13 * std::sqrt(e1) - m23 * std::sqrt(e2)) / s123;
  push(cross - plus);
  push(cross + plus);
  push(-cross - minus);
  push(-cross + minus);

  // Bracket sweep of the residual over the admissible multiplier range
  // (all A_i >= 0 below, all u_i <= 1 above). Catches the ensembles whose
  // overlap phases put the tangency outside the printed closed forms.
  const double lo = std::max({-m23 * m23 / e1, -m13 * m13 / e2, -m12 * m12 / e3});
  const double hi =
      std::min({(1.0 - m23 * m23) / e1, (1.0 - m13 * m13) / e2, (1.0 - m12 * m12) / e3});
  const auto residual_at = [&](double l) -> double {
    std::array<double, 3> a = gradient_offsets(ov, priors, l);
    std::array<double, 3> u;
    if (!solve_u(a, u)) return std::nan("");
    return boundary_residual_u(ov, u);
  };
  if (hi > lo) {
    const int grid = 600;
    const double eps = 1e-9 * (hi - lo + 1.0);
    double prev_l = lo + eps;
    double prev_g = residual_at(prev_l);
    for (int k = 1; k <= grid; ++k) {
      const double l = lo + eps + (hi - lo - eps) * k / grid;
      const double g = residual_at(l);
      if (std::isfinite(prev_g) && std::isfinite(g) && prev_g * g <= 0.0) {
        double a = prev_l, b = l, ga = prev_g;
        for (int it = 0; it < 100; ++it) {
          const double mid = 0.5 * (a + b);
          const double gm = residual_at(mid);
          if (!std::isfinite(gm)) break;
          if (ga * gm <= 0.0)
            b = mid;
          else
            a = mid, ga = gm;
        }
        push(0.5 * (a + b));
      }
      prev_l = l;
      prev_g = g;
    }
  }

  std::vector<TangencyCandidate> out;
  for (double l : lambdas) {
    const std::array<double, 3> a = gradient_offsets(ov, priors, l);
    std::array<double, 3> u;
    if (!solve_u(a, u)) continue;
    const double scale =
        1.0 + std::abs(2.0 * ov.r3) + u[0] * u[1] * u[2] + m12 * m12 + m13 * m13 + m23 * m23;
    if (std::abs(boundary_residual_u(ov, u)) > 1e-8 * scale) continue;
    TangencyCandidate cand;
    cand.lambda = l;
    cand.p = {1.0 - u[0], 1.0 - u[1], 1.0 - u[2]};
    bool in_box = true;
    for (double& pi : cand.p) {
      if (pi < -1e-9 || pi > 1.0 + 1e-9) in_box = false;
      pi = std::clamp(pi, 0.0, 1.0);
    }
    if (in_box) out.push_back(std::move(cand));
  }
  return out;
}

}  // namespace detail

PovmSolution solve_two_state(const Ensemble& ensemble) {
  if (ensemble.size() != 2) throw DimensionError("solve_two_state: need exactly 2 states");
  const double e1 = ensemble.priors[0], e2 = ensemble.priors[1];
  if (e1 <= 0.0 || e2 <= 0.0)
    throw DegeneratePriorError("solve_two_state: zero prior, solve the reduced problem");
  const double a = std::abs(inner(ensemble.states[0].amplitudes, ensemble.states[1].amplitudes));
  const auto [p1, p2] = detail::two_state_pair(a, e1, e2);
  std::optional<double> multiplier;
  if (p1 > 0.0 && p2 > 0.0 && a > 0.0) multiplier = -a / std::sqrt(e1 * e2);
  return make_solution(reciprocal_states(ensemble), ensemble, {p1, p2}, Method::analytic,
                       multiplier);
}

PovmSolution solve_three_state(const Ensemble& ensemble) {
  if (ensemble.size() != 3) throw DimensionError("solve_three_state: need exactly 3 states");
  for (double eta : ensemble.priors)
    if (eta <= 0.0)
      throw DegeneratePriorError("solve_three_state: zero prior, solve the reduced problem");

  const detail::ThreeStateOverlaps ov = detail::three_state_overlaps(ensemble);
  const std::array<double, 3> m = ov.m;
  const double det_g =
      1.0 - m[0] * m[0] - m[1] * m[1] - m[2] * m[2] + 2.0 * ov.r3;
  const DualFrame frame = reciprocal_states(ensemble);

  // A state orthogonal to both others detaches: it is detected with
  // certainty and the rest is a two-state problem.
  const auto overlaps_of = [&](int i) -> std::pair<double, double> {
    if (i == 0) return {m[0], m[1]};
    if (i == 1) return {m[0], m[2]};
    return {m[1], m[2]};
  };
  for (int i = 0; i < 3; ++i) {
    const auto [x, y] = overlaps_of(i);
    if (x <= 1e-12 && y <= 1e-12) {
      const int j = (i == 0) ? 1 : 0;
      const int k = (i == 2) ? 1 : 2;
      const double a_jk = (i == 0) ? m[2] : (i == 1) ? m[1] : m[0];
      const auto [pj, pk] =
          detail::two_state_pair(a_jk, ensemble.priors[j], ensemble.priors[k]);
      ProbabilityVector p(3);
      p[i] = 1.0;
      p[j] = pj;
      p[k] = pk;
      return make_solution(frame, ensemble, p, Method::analytic);
    }
  }

  struct Candidate {
    ProbabilityVector p;
    std::optional<double> lambda;
  };
  std::vector<Candidate> candidates;

  const std::array<double, 3> priors = {ensemble.priors[0], ensemble.priors[1],
                                        ensemble.priors[2]};
  for (auto& t : detail::three_state_tangency(ov, priors))
    candidates.push_back({std::move(t.p), t.lambda});

  // Coordinate-plane tangencies: on p_i = 0 the boundary section is
  // u_j u_k - m_ik^2 u_j - m_ij^2 u_k + 2 r3 - m_jk^2 = 0, with tangency
  // u_j = m_ij^2 + kappa eta_k, u_k = m_ik^2 + kappa eta_j and
  // kappa^2 eta_j eta_k = m_ij^2 m_ik^2 + m_jk^2 - 2 r3.
  const auto pair_index = [](int a, int b) { return a + b - 1; };  // (0,1)->0 (0,2)->1 (1,2)->2
  for (int i = 0; i < 3; ++i) {
    const int j = (i == 0) ? 1 : 0;
    const int k = (i == 2) ? 1 : 2;
    const double mij = m[pair_index(std::min(i, j), std::max(i, j))];
    const double mik = m[pair_index(std::min(i, k), std::max(i, k))];
    const double mjk = m[pair_index(std::min(j, k), std::max(j, k))];
    const double r = std::max(0.0, mij * mij * mik * mik + mjk * mjk - 2.0 * ov.r3);
    const double kappa = std::sqrt(r / (priors[j] * priors[k]));
    for (double sign : {1.0, -1.0}) {
      const double uj = mij * mij + sign * kappa * priors[k];
      const double uk = mik * mik + sign * kappa * priors[j];
      ProbabilityVector p(3, 0.0);
      p[j] = 1.0 - uj;
      p[k] = 1.0 - uk;
      if (p[j] < -1e-9 || p[j] > 1.0 + 1e-9 || p[k] < -1e-9 || p[k] > 1.0 + 1e-9) continue;
      p[j] = std::clamp(p[j], 0.0, 1.0);
      p[k] = std::clamp(p[k], 0.0, 1.0);
      candidates.push_back({std::move(p), std::nullopt});
    }
    // Single-state vertex: p_i = det(G) / (1 - m_jk^2)  (= 1/a~_ii).
    ProbabilityVector vertex(3, 0.0);
    vertex[i] = std::clamp(det_g / (1.0 - mjk * mjk), 0.0, 1.0);
    candidates.push_back({std::move(vertex), std::nullopt});
  }

  const Candidate* best = nullptr;
  double best_q = 2.0;
  for (const auto& c : candidates) {
    if (pi0_min_eigenvalue(frame, c.p) < -tol::psd) continue;
    double q = 1.0;
    for (int i = 0; i < 3; ++i) q -= priors[i] * c.p[i];
    if (!best || better_solution(c.p, q, best->p, best_q)) {
      best = &c;
      best_q = q;
    }
  }
  if (!best) throw Error("solve_three_state: no feasible candidate (unexpected)");
  return make_solution(frame, ensemble, best->p, Method::analytic, best->lambda);
}

PovmSolution solve_equiangular(int n, double s) {
  if (n < 2) throw DimensionError("solve_equiangular: need n >= 2");
  if (s < 0.0 || s >= 1.0)
    throw InvalidOverlapError("solve_equiangular: overlap must be in [0,1), got " +
                              std::to_string(s));
  // Realize the frame as columns of G^{1/2}, so the Gram matrix is exact.
  HermitianMatrix g(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) g.set(i, j, i == j ? 1.0 : s);
  const EigenDecomposition eig = hermitian_eig(g);
  std::vector<CVector> states(n, CVector(n, cplx(0.0)));
  for (int k = 0; k < n; ++k) {
    const double root = std::sqrt(std::max(0.0, eig.eigenvalues[k]));
    for (int i = 0; i < n; ++i)
      for (int r = 0; r < n; ++r)
        states[i][r] += root * eig.eigenvectors[k][r] * std::conj(eig.eigenvectors[k][i]);
  }
  const Ensemble ensemble = make_ensemble(n, states, std::vector<double>(n, 1.0 / n));
  return make_solution(reciprocal_states(ensemble), ensemble,
                       ProbabilityVector(n, 1.0 - s), Method::epm);
}

PovmSolution solve_gu(const StateVector& generating_state, const std::vector<CMatrix>& group) {
  if (group.empty()) throw DimensionError("solve_gu: empty group");
  for (const auto& u : group)
    if (static_cast<int>(u.size()) != generating_state.dim || !is_unitary(u))
      throw Error("solve_gu: group element is not unitary on the state space");

  std::vector<CVector> states;
  states.reserve(group.size());
  for (const auto& u : group) states.push_back(apply_matrix(u, generating_state.amplitudes));
  const int n = static_cast<int>(states.size());
  const Ensemble ensemble =
      make_ensemble(generating_state.dim, states, std::vector<double>(n, 1.0 / n));

  const DualFrame frame = reciprocal_states(ensemble);
  // The reciprocal set must be the group orbit of the generator's dual.
  const CVector& dual_generator = frame.reciprocal_states[0];
  for (int i = 0; i < n; ++i) {
    const CVector expected = apply_matrix(group[i], dual_generator);
    double err = 0.0;
    for (int r = 0; r < generating_state.dim; ++r)
      err = std::max(err, std::abs(expected[r] - frame.reciprocal_states[i][r]));
    if (err > 1e-8)
      throw Error("solve_gu: reciprocal states are not geometrically uniform under the group");
  }

  const double lam = max_eigenvalue(frame_operator(frame.reciprocal_states));
  return make_solution(frame, ensemble, ProbabilityVector(n, 1.0 / lam), Method::epm);
}

PovmSolution solve_analytic(const Ensemble& ensemble) {
  const int n = ensemble.size();

  // Zero-prior states contribute nothing to P; drop them and report p = 0.
  std::vector<int> kept;
  for (int i = 0; i < n; ++i)
    if (ensemble.priors[i] > 1e-15) kept.push_back(i);
  if (static_cast<int>(kept.size()) < n) {
    std::vector<CVector> states;
    std::vector<double> priors;
    for (int i : kept) {
      states.push_back(ensemble.states[i].amplitudes);
      priors.push_back(ensemble.priors[i]);
    }
    const PovmSolution reduced = solve_analytic(make_ensemble(ensemble.dim, states, priors));
    ProbabilityVector p(n, 0.0);
    for (std::size_t r = 0; r < kept.size(); ++r) p[kept[r]] = reduced.p[r];
    return make_solution(reciprocal_states(ensemble), ensemble, p, Method::analytic,
                         reduced.multiplier);
  }

  if (n == 1)
    return make_solution(reciprocal_states(ensemble), ensemble, {1.0}, Method::analytic);
  if (n == 2) return solve_two_state(ensemble);
  if (n == 3) return solve_three_state(ensemble);

  // N >= 4: only real equiangular structure with equal priors has a
  // closed form here.
  const HermitianMatrix g = gram_matrix(ensemble);
  bool equiangular = true;
  const double s0 = g(0, 1).real();
  for (int i = 0; i < n && equiangular; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(g(i, j) - s0) > 1e-10 || s0 < -1e-12) equiangular = false;
  for (double eta : ensemble.priors)
    if (std::abs(eta - 1.0 / n) > 1e-12) equiangular = false;
  if (!equiangular)
    throw UnsupportedError(
        "solve_analytic: no closed form for N > 3 without real equiangular structure; "
        "use the lp or oracle solver");
  const DualFrame frame = reciprocal_states(ensemble);
  const double lam = max_eigenvalue(frame_operator(frame.reciprocal_states));
  return make_solution(frame, ensemble, ProbabilityVector(n, 1.0 / lam), Method::epm);
}

EpmPriors epm_priors(double a12, double a13, double a23) {
  for (double a : {a12, a13, a23})
    if (a < 0.0 || a >= 1.0)
      throw InvalidOverlapError("epm_priors: overlaps must lie in [0,1)");
  const double sum_sq = a12 * a12 + a13 * a13 + a23 * a23;
  const double det_g = 1.0 - sum_sq + 2.0 * a12 * a13 * a23;
  if (det_g <= 0.0) throw RankError("epm_priors: Gram matrix is singular or indefinite");

  // Equal-p boundary point: u = 1 - p is the largest root of
  // u^3 - (sum a^2) u + 2 a12 a13 a23 on [max a, 1).
  const auto cubic = [&](double u) { return u * u * u - sum_sq * u + 2.0 * a12 * a13 * a23; };
  double lo = std::max({a12, a13, a23}), hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (cubic(mid) <= 0.0 ? lo : hi) = mid;
  }
  const double u = lo;

  EpmPriors out;
  out.p = 1.0 - u;
  out.multiplier = 3.0 * u * u - sum_sq;
  if (std::abs(out.multiplier) <= 1e-9) {
    // Conical point (equiangular-type): the normal cone is fat and the
    // symmetric priors are the canonical choice.
    out.priors = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  } else {
    out.priors = {(u * u - a23 * a23) / out.multiplier, (u * u - a13 * a13) / out.multiplier,
                  (u * u - a12 * a12) / out.multiplier};
    double sum = 0.0;
    for (double& eta : out.priors) {
      if (eta < 0.0 && eta > -1e-12) eta = 0.0;
      sum += eta;
    }
    for (double& eta : out.priors) eta /= sum;
  }

  // Verify the gradient conditions (1-p)^2 - a_jk^2 = Lambda eta_i.
  const std::array<double, 3> targets = {a23 * a23, a13 * a13, a12 * a12};
  for (int i = 0; i < 3; ++i) {
    if (out.priors[i] < -1e-12)
      throw NoEpmSolutionError("epm_priors: no nonnegative priors make equal-p optimal");
    const double res = u * u - targets[i] - out.multiplier * out.priors[i];
    if (std::abs(res) > 1e-8)
      throw NoEpmSolutionError("epm_priors: gradient conditions failed, residual " +
                               std::to_string(res));
  }

  // The closed form as printed, and the variant with the linear a23
  // terms squared. Both are reported; neither is used.
  const double den_printed = 3.0 - 2.0 * a12 * a12 - a13 * a13 - a12 * a12 * a13 * a13 -
                             2.0 * a23 + 2.0 * a23 * a12 * a12 + std::pow(a12, 4);
  const double den_sym = 3.0 - 2.0 * a12 * a12 - a13 * a13 - a12 * a12 * a13 * a13 -
                         2.0 * a23 * a23 + 2.0 * a23 * a23 * a12 * a12 + std::pow(a12, 4);
  const double num1 = (a12 * a12 - 1.0) * (a12 * a12 - 1.0);
  const double num2 = (1.0 - a12 * a12) * (1.0 - a13 * a13);
  out.printed_form = {num1 / den_printed, num2 / den_printed,
                      1.0 - num1 / den_printed - num2 / den_printed};
  out.symmetrized_form = {num1 / den_sym, num2 / den_sym, 1.0 - num1 / den_sym - num2 / den_sym};
  out.printed_matches = true;
  for (int i = 0; i < 3; ++i)
    if (std::abs(out.printed_form[i] - out.priors[i]) > 1e-8) out.printed_matches = false;
  return out;
}

double bloch_chord_q(const std::array<double, 3>& n1, const std::array<double, 3>& n2) {
  const auto norm3 = [](const std::array<double, 3>& v) {
    return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  };
  if (std::abs(norm3(n1) - 1.0) > 1e-9 || std::abs(norm3(n2) - 1.0) > 1e-9)
    throw Error("bloch_chord_q: Bloch vectors of pure states must have unit length");
  std::array<double, 3> d = {n2[0] - n1[0], n2[1] - n1[1], n2[2] - n1[2]};
  const double dd = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
  double t = 0.0;
  if (dd > 0.0) t = std::clamp(-(n1[0] * d[0] + n1[1] * d[1] + n1[2] * d[2]) / dd, 0.0, 1.0);
  const std::array<double, 3> foot = {n1[0] + t * d[0], n1[1] + t * d[1], n1[2] + t * d[2]};
  return norm3(foot);
}

}  // namespace usd
