#include "usd/lsd.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace usd {

namespace {

constexpr int kMinorCap = 6;  // direct cofactor expansion only at small N

std::vector<double> principal_minors(const HermitianMatrix& m) {
  const int n = m.dim();
  std::vector<double> minors(std::size_t{1} << n, 1.0);
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) idx.push_back(i);
    HermitianMatrix sub(static_cast<int>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = i; j < idx.size(); ++j)
        sub.set(static_cast<int>(i), static_cast<int>(j), m(idx[i], idx[j]));
    minors[mask] = hermitian_determinant(sub);
  }
  return minors;
}

// Component of v outside the range of rho, relative to |v|.
double range_residual(const EigenDecomposition& rho_eig, const CVector& v, double cut) {
  CVector in_range(v.size(), cplx(0.0));
  for (std::size_t k = 0; k < rho_eig.eigenvalues.size(); ++k) {
    if (rho_eig.eigenvalues[k] <= cut) continue;
    const cplx coef = inner(rho_eig.eigenvectors[k], v);
    for (std::size_t r = 0; r < v.size(); ++r) in_range[r] += coef * rho_eig.eigenvectors[k][r];
  }
  double out = 0.0;
  for (std::size_t r = 0; r < v.size(); ++r) out += std::norm(v[r] - in_range[r]);
  return std::sqrt(out);
}

double rank_cut(const EigenDecomposition& eig) {
  return tol::rank_scale * std::max(std::abs(eig.eigenvalues.back()), 1e-300);
}

}  // namespace

DualGramData make_dual_gram_data(const Ensemble& ensemble) {
  const DualFrame frame = reciprocal_states(ensemble);
  DualGramData data{frame.dual_gram, HermitianMatrix::identity(ensemble.dim), {}};
  if (ensemble.size() <= kMinorCap) data.minors = principal_minors(data.a_tilde);
  return data;
}

DualGramData make_dual_gram_data(const std::vector<CVector>& vectors,
                                 const HermitianMatrix& rho) {
  const int n = static_cast<int>(vectors.size());
  const HermitianMatrix rho_pinv = pseudo_inverse(rho);
  DualGramData data{HermitianMatrix(n), rho, {}};
  for (int j = 0; j < n; ++j) {
    const CVector rj = rho_pinv.apply(vectors[j]);
    for (int i = 0; i <= j; ++i) data.a_tilde.set(i, j, inner(vectors[i], rj));
  }
  if (n <= kMinorCap) data.minors = principal_minors(data.a_tilde);
  return data;
}

double lsd_single(const HermitianMatrix& rho, const CVector& psi_tilde) {
  const EigenDecomposition eig = hermitian_eig(rho);
  const double cut = rank_cut(eig);
  const double vnorm = norm2(psi_tilde);
  if (vnorm <= 0.0) return 0.0;
  if (range_residual(eig, psi_tilde, cut) > 1e-9 * vnorm) return 0.0;
  double denom = 0.0;  // <psi~|rho^+|psi~> through the spectral form
  for (std::size_t k = 0; k < eig.eigenvalues.size(); ++k) {
    if (eig.eigenvalues[k] <= cut) continue;
    denom += std::norm(inner(eig.eigenvectors[k], psi_tilde)) / eig.eigenvalues[k];
  }
  if (denom <= 0.0) return 0.0;
  return 1.0 / denom;
}

std::pair<double, double> lsd_pair(const HermitianMatrix& rho, const CVector& v1,
                                   const CVector& v2, double eta1, double eta2) {
  const EigenDecomposition eig = hermitian_eig(rho);
  const double cut = rank_cut(eig);
  const bool in1 = range_residual(eig, v1, cut) <= 1e-9 * std::max(norm2(v1), 1e-300);
  const bool in2 = range_residual(eig, v2, cut) <= 1e-9 * std::max(norm2(v2), 1e-300);
  if (!in1 && !in2) return {0.0, 0.0};
  if (!in1) return {0.0, lsd_single(rho, v2)};
  if (!in2) return {lsd_single(rho, v1), 0.0};

  const DualGramData data = make_dual_gram_data({v1, v2}, rho);
  const double a11 = data.a_tilde(0, 0).real();
  const double a22 = data.a_tilde(1, 1).real();
  const double a12 = std::abs(data.a_tilde(0, 1));
  const double det = a11 * a22 - a12 * a12;
  if (det <= 1e-14 * std::max(1.0, a11 * a22))
    throw CollinearDualError("lsd_pair: dual vectors are collinear under rho^+");
  if (a12 <= 1e-14 * std::sqrt(a11 * a22)) return {1.0 / a11, 1.0 / a22};

  if (eta1 <= 0.0 || eta2 <= 0.0)
    throw DegeneratePriorError("lsd_pair: weights must be positive");
  const double p1 = (a22 - std::sqrt(eta2 / eta1) * a12) / det;
  const double p2 = (a11 - std::sqrt(eta1 / eta2) * a12) / det;
  if (p1 >= -1e-12 && p2 >= -1e-12) return {std::max(p1, 0.0), std::max(p2, 0.0)};
  if (p2 < 0.0) return {1.0 / a11, 0.0};
  return {0.0, 1.0 / a22};
}

double lsd_manifold_residual(const DualGramData& data, const ProbabilityVector& p) {
  const int n = data.a_tilde.dim();
  if (static_cast<int>(p.size()) != n)
    throw DimensionError("lsd_manifold_residual: length mismatch");
  if (data.minors.empty())
    throw UnsupportedError("lsd_manifold_residual: minors cached only for N <= " +
                           std::to_string(kMinorCap));
  double sum = 0.0;
  for (unsigned mask = 0; mask < data.minors.size(); ++mask) {
    double term = data.minors[mask];
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) term *= p[i];
    sum += (std::popcount(mask) % 2 == 0) ? term : -term;
  }
  return sum;
}

PovmSolution solve_kkt_three(const Ensemble& ensemble) {
  if (ensemble.size() != 3) throw DimensionError("solve_kkt_three: need exactly 3 states");
  for (double eta : ensemble.priors)
    if (eta <= 0.0) throw DegeneratePriorError("solve_kkt_three: zero prior");

  const DualFrame frame = reciprocal_states(ensemble);
  const HermitianMatrix& at = frame.dual_gram;
  const double a11 = at(0, 0).real(), a22 = at(1, 1).real(), a33 = at(2, 2).real();
  const std::array<double, 3> eta = {ensemble.priors[0], ensemble.priors[1],
                                     ensemble.priors[2]};

  struct Candidate {
    ProbabilityVector p;
  };
  std::vector<Candidate> candidates;

  // Phase-rotate duals so a~12 and a~13 are real nonnegative; the phase
  // left on a~23 is gauge invariant and decides whether the printed
  // full-rank formula applies.
  const double beta = std::arg(at(1, 2)) + std::arg(at(0, 1)) - std::arg(at(0, 2));
  const double abs23 = std::abs(at(1, 2));
  const bool real_gauge = abs23 <= 1e-13 || std::abs(std::sin(beta)) <= 1e-9;
  if (real_gauge) {
    const double g12 = std::abs(at(0, 1));
    const double g13 = std::abs(at(0, 2));
    const double g23 = abs23 * (std::cos(beta) >= 0.0 ? 1.0 : -1.0);
    const double c1 = a22 * a33 - g23 * g23;
    const double c2 = g12 * a33 - g13 * g23;
    const double c3 = g12 * g23 - a22 * g13;
    const double c4 = a11 * g23 - g13 * g12;
    const double den = a11 * c1 - g12 * c2 + g13 * c3;
    if (std::abs(den) > 1e-14) {
      // Cramer's rule on the stationarity system; note the sign of the
      // sqrt(eta3/eta2) term in p2, which prints with the opposite sign
      // in some statements of the solution.
      ProbabilityVector p(3);
      p[0] = (c1 - std::sqrt(eta[1] / eta[0]) * c2 + std::sqrt(eta[2] / eta[0]) * c3) / den;
      p[1] = ((a11 * a33 - g13 * g13) - std::sqrt(eta[0] / eta[1]) * (g12 * a33 - g23 * g13) -
              std::sqrt(eta[2] / eta[1]) * c4) /
             den;
      p[2] = ((a11 * a22 - g12 * g12) + std::sqrt(eta[0] / eta[2]) * c3 -
              std::sqrt(eta[1] / eta[2]) * c4) /
             den;
      // Validity: p >= 0 and (1 - p_i a~_ii) a~_ii >= p_j |a~_ij|^2 + p_k |a~_ik|^2.
      bool ok = true;
      const double mods[3][3] = {{0.0, g12, g13}, {g12, 0.0, g23}, {g13, g23, 0.0}};
      const double diag[3] = {a11, a22, a33};
      for (int i = 0; i < 3 && ok; ++i) {
        if (p[i] < -1e-12) ok = false;
        double rhs = 0.0;
        for (int j = 0; j < 3; ++j)
          if (j != i) rhs += p[j] * mods[i][j] * mods[i][j];
        if ((1.0 - p[i] * diag[i]) * diag[i] < rhs - 1e-10) ok = false;
      }
      if (ok) {
        for (double& pi : p) pi = std::clamp(pi, 0.0, 1.0);
        candidates.push_back({std::move(p)});
      }
    }
  } else {
    // Overlap phases outside the real gauge: fall back to the interior
    // tangency of the boundary manifold, which needs no gauge.
    const detail::ThreeStateOverlaps ov = detail::three_state_overlaps(ensemble);
    for (auto& t : detail::three_state_tangency(ov, eta)) candidates.push_back({std::move(t.p)});
  }

  // Two-state boundary branches p_i = 0, guarded by nonnegativity of the
  // pair formulas (the prior windows), and the projective fallbacks.
  const double diag[3] = {a11, a22, a33};
  for (int i = 0; i < 3; ++i) {
    const int j = (i == 0) ? 1 : 0;
    const int k = (i == 2) ? 1 : 2;
    const double ajj = diag[j], akk = diag[k];
    const double ajk = std::abs(at(j, k));
    const double det = ajj * akk - ajk * ajk;
    if (det > 1e-14) {
      const double pj = (akk - std::sqrt(eta[k] / eta[j]) * ajk) / det;
      const double pk = (ajj - std::sqrt(eta[j] / eta[k]) * ajk) / det;
      if (pj >= -1e-12 && pk >= -1e-12) {
        ProbabilityVector p(3, 0.0);
        p[j] = std::clamp(pj, 0.0, 1.0);
        p[k] = std::clamp(pk, 0.0, 1.0);
        candidates.push_back({std::move(p)});
      }
    }
    ProbabilityVector vertex(3, 0.0);
    vertex[i] = 1.0 / diag[i];
    candidates.push_back({std::move(vertex)});
  }

  const Candidate* best = nullptr;
  double best_q = 2.0;
  for (const auto& c : candidates) {
    if (pi0_min_eigenvalue(frame, c.p) < -tol::psd) continue;
    double q = 1.0;
    for (int i = 0; i < 3; ++i) q -= eta[i] * c.p[i];
    if (!best || better_solution(c.p, q, best->p, best_q)) {
      best = &c;
      best_q = q;
    }
  }
  if (!best) throw Error("solve_kkt_three: no feasible candidate (unexpected)");
  return make_solution(frame, ensemble, best->p, Method::lsd);
}

ProbabilityVector solve_lsd_equiangular_dual(int n, double a) {
  if (n < 1) throw DimensionError("solve_lsd_equiangular_dual: need n >= 1");
  if (a < 0.0 || a >= 1.0)
    throw InvalidOverlapError("solve_lsd_equiangular_dual: overlap must be in [0,1)");
  return ProbabilityVector(n, 1.0 / (1.0 + a * (n - 1)));
}

bool kkt_certificate(const Ensemble& ensemble, const PovmSolution& solution) {
  constexpr double tol_cert = 1e-7;
  const int n = ensemble.size();
  if (static_cast<int>(solution.p.size()) != n) return false;
  for (double pi : solution.p)
    if (pi < -1e-9) return false;

  const DualFrame frame = reciprocal_states(ensemble);
  const HermitianMatrix pi0 = inconclusive_operator(frame, solution.p);
  const EigenDecomposition eig = hermitian_eig(pi0);
  if (eig.eigenvalues.front() < -tol_cert) return false;

  std::vector<int> kernel;
  for (std::size_t k = 0; k < eig.eigenvalues.size(); ++k)
    if (std::abs(eig.eigenvalues[k]) <= tol_cert) kernel.push_back(static_cast<int>(k));
  const int m = static_cast<int>(kernel.size());

  // Weights of the dual certificate X = sum_r c_r |k_r><k_r| on the
  // kernel of Pi_0, fit by least squares to Tr(X Pi~_i) = eta_i on the
  // active set {i : p_i > 0}.
  std::vector<std::vector<double>> a(n, std::vector<double>(m));
  for (int i = 0; i < n; ++i)
    for (int r = 0; r < m; ++r)
      a[i][r] = std::norm(inner(frame.reciprocal_states[i], eig.eigenvectors[kernel[r]]));

  std::vector<int> active;
  for (int i = 0; i < n; ++i)
    if (solution.p[i] > 1e-9) active.push_back(i);

  std::vector<double> c(m, 0.0);
  if (m > 0 && !active.empty()) {
    HermitianMatrix ata(m);
    for (int r = 0; r < m; ++r)
      for (int s = r; s < m; ++s) {
        double sum = 0.0;
        for (int i : active) sum += a[i][r] * a[i][s];
        ata.set(r, s, sum);
      }
    CVector atb(m, cplx(0.0));
    for (int r = 0; r < m; ++r)
      for (int i : active) atb[r] += a[i][r] * ensemble.priors[i];
    const CVector sol = pseudo_inverse(ata).apply(atb);
    for (int r = 0; r < m; ++r) c[r] = sol[r].real();
  }
  for (double& cr : c) {
    if (cr < -1e-9) return false;  // X would not be PSD
    cr = std::max(cr, 0.0);
  }

  // Stationarity: Tr(X Pi~_i) = eta_i + z_i with z_i >= 0, z_i p_i = 0.
  for (int i = 0; i < n; ++i) {
    double tr = 0.0;
    for (int r = 0; r < m; ++r) tr += c[r] * a[i][r];
    const double z = tr - ensemble.priors[i];
    if (solution.p[i] > 1e-9) {
      if (std::abs(z) > tol_cert) return false;  // slackness forces z_i = 0
    } else if (z < -tol_cert) {
      return false;
    }
  }

  // Complementarity X Pi_0 = 0: with X on the kernel this reduces to the
  // kernel eigenvalues themselves.
  for (int r = 0; r < m; ++r)
    if (c[r] * std::abs(eig.eigenvalues[kernel[r]]) > tol_cert * (1.0 + c[r])) return false;
  return true;
}

PovmSolution solve_lsd(const Ensemble& ensemble) {
  const int n = ensemble.size();
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
    const PovmSolution reduced = solve_lsd(make_ensemble(ensemble.dim, states, priors));
    ProbabilityVector p(n, 0.0);
    for (std::size_t r = 0; r < kept.size(); ++r) p[kept[r]] = reduced.p[r];
    return make_solution(reciprocal_states(ensemble), ensemble, p, Method::lsd);
  }

  const DualFrame frame = reciprocal_states(ensemble);
  if (n == 1) {
    const double p = lsd_single(HermitianMatrix::identity(ensemble.dim),
                                frame.reciprocal_states[0]);
    return make_solution(frame, ensemble, {p}, Method::lsd);
  }
  if (n == 2) {
    const auto [p1, p2] =
        lsd_pair(HermitianMatrix::identity(ensemble.dim), frame.reciprocal_states[0],
                 frame.reciprocal_states[1], ensemble.priors[0], ensemble.priors[1]);
    return make_solution(frame, ensemble, {p1, p2}, Method::lsd);
  }
  if (n == 3) return solve_kkt_three(ensemble);
  throw UnsupportedError("solve_lsd: closed forms cover N <= 3; use lp or oracle");
}

}  // namespace usd
