#pragma once

// Shared test fixtures: deterministic random ensembles, the golden
// ensembles used across suites, and an eigenvalue oracle that goes
// through the characteristic polynomial instead of the Jacobi solver.

#include <array>
#include <cmath>
#include <vector>

#include "usd/ensemble.hpp"
#include "usd/oracle.hpp"

namespace usd::testing {

struct TestRng {
  SplitMix64 rng;
  explicit TestRng(std::uint64_t seed) : rng(seed) {}
  double uniform() { return rng.uniform(); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double gauss() {
    // Box-Muller; one value per call is plenty here.
    double u = 0.0;
    while (u <= 1e-12) u = uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586 * uniform());
  }
};

inline CVector random_unit(TestRng& rng, int dim, bool complex_amplitudes = true,
                           bool nonneg_real = false) {
  CVector v(dim);
  for (auto& z : v) {
    if (nonneg_real)
      z = std::abs(rng.gauss());
    else if (complex_amplitudes)
      z = cplx(rng.gauss(), rng.gauss());
    else
      z = rng.gauss();
  }
  const double n = norm2(v);
  for (auto& z : v) z /= n;
  return v;
}

// Well-conditioned random ensemble: resamples until lambda_min(G) is
// comfortably positive so the closed forms and the oracle stay stable.
inline Ensemble random_ensemble(TestRng& rng, int n, int dim, bool complex_amplitudes = true,
                                bool nonneg_real = false, double min_gram = 1e-2) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    std::vector<CVector> states;
    for (int i = 0; i < n; ++i) states.push_back(random_unit(rng, dim, complex_amplitudes,
                                                             nonneg_real));
    std::vector<double> priors(n);
    double sum = 0.0;
    for (double& e : priors) sum += (e = rng.uniform(0.1, 1.0));
    for (double& e : priors) e /= sum;
    const EnsembleDiagnostics diag = validate_ensemble(dim, states, priors);
    if (diag.ok && diag.min_gram_eigenvalue > min_gram)
      return make_ensemble(dim, states, priors);
  }
  throw Error("random_ensemble: could not find a well-conditioned sample");
}

inline Ensemble example4() {
  const double r2 = 1.0 / std::sqrt(2.0);
  return make_ensemble(2, {{1.0, 0.0}, {r2, r2}}, {0.5, 0.5});
}

inline Ensemble example2a() {
  const double t = 1.0 / 3.0;
  return make_ensemble(3, {{1, 0, 0}, {t, 2 * t, 2 * t}, {t, 2 * t, -2 * t}}, {t, t, t});
}

inline Ensemble example2b() {
  const double r2 = 1.0 / std::sqrt(2.0), r3 = 1.0 / std::sqrt(3.0), t = 1.0 / 3.0;
  return make_ensemble(3, {{r3, r3, r3}, {r2, r2, 0.0}, {0.0, r2, r2}}, {t, t, t});
}

inline StateVector example3_generator() {
  const double c = 1.0 / (3.0 * std::sqrt(2.0));
  return make_state({2 * c, 2 * c, c, 3 * c});
}

inline std::vector<CMatrix> example3_group() {
  const auto diag = [](double a, double b, double c, double d) {
    CMatrix m(4, CVector(4, cplx(0.0)));
    m[0][0] = a;
    m[1][1] = b;
    m[2][2] = c;
    m[3][3] = d;
    return m;
  };
  return {diag(1, 1, 1, 1), diag(1, -1, 1, -1), diag(1, 1, -1, -1), diag(1, -1, -1, 1)};
}

// Equiangular unit states <psi_i|psi_j> = s realized as columns of G^{1/2}.
inline Ensemble equiangular_ensemble(int n, double s) {
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
  return make_ensemble(n, states, std::vector<double>(n, 1.0 / n));
}

// Coefficients of det(lambda I - A), monic, via the Faddeev-LeVerrier
// trace recurrence. Real for Hermitian input.
inline std::vector<double> characteristic_polynomial(const HermitianMatrix& a) {
  const int n = a.dim();
  std::vector<std::vector<cplx>> m(n, std::vector<cplx>(n, cplx(0.0)));
  for (int i = 0; i < n; ++i) m[i][i] = 1.0;
  std::vector<double> coef(n + 1, 0.0);
  coef[n] = 1.0;
  for (int k = 1; k <= n; ++k) {
    std::vector<std::vector<cplx>> am(n, std::vector<cplx>(n, cplx(0.0)));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int r = 0; r < n; ++r) am[i][j] += a(i, r) * m[r][j];
    cplx trace = 0.0;
    for (int i = 0; i < n; ++i) trace += am[i][i];
    const double ck = -trace.real() / k;
    coef[n - k] = ck;
    m = am;
    for (int i = 0; i < n; ++i) m[i][i] += ck;
  }
  return coef;
}

inline double poly_eval(const std::vector<double>& coef, double x) {
  double v = 0.0;
  for (int k = static_cast<int>(coef.size()) - 1; k >= 0; --k) v = v * x + coef[k];
  return v;
}

// All real roots of a monic polynomial with real roots (the Hermitian
// characteristic polynomial), found by recursive bisection between the
// critical points. Intended for generic matrices with simple spectra.
inline std::vector<double> real_roots(const std::vector<double>& coef) {
  const int deg = static_cast<int>(coef.size()) - 1;
  if (deg <= 0) return {};
  if (deg == 1) return {-coef[0] / coef[1]};
  std::vector<double> deriv(deg);
  for (int k = 1; k <= deg; ++k) deriv[k - 1] = coef[k] * k;
  std::vector<double> critical = real_roots(deriv);

  double bound = 1.0;
  for (int k = 0; k < deg; ++k) bound = std::max(bound, std::abs(coef[k] / coef[deg]));
  bound = 1.0 + bound;
  std::vector<double> edges = {-bound};
  for (double c : critical)
    if (c > -bound && c < bound) edges.push_back(c);
  edges.push_back(bound);

  std::vector<double> roots;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    double lo = edges[i], hi = edges[i + 1];
    double flo = poly_eval(coef, lo), fhi = poly_eval(coef, hi);
    if (flo == 0.0) {
      roots.push_back(lo);
      continue;
    }
    if (flo * fhi > 0.0) continue;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = poly_eval(coef, mid);
      if (flo * fm <= 0.0)
        hi = mid;
      else
        lo = mid, flo = fm;
    }
    roots.push_back(0.5 * (lo + hi));
  }
  return roots;
}

}  // namespace usd::testing
