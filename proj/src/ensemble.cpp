#include "usd/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace usd {

cplx inner(const CVector& a, const CVector& b) {
  if (a.size() != b.size()) throw DimensionError("inner: length mismatch");
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

double norm2(const CVector& v) {
  double s = 0.0;
  for (const cplx& c : v) s += std::norm(c);
  return std::sqrt(s);
}

HermitianMatrix::HermitianMatrix(int dim) : dim_(dim), a_(dim * dim, cplx(0.0)) {
  if (dim <= 0) throw DimensionError("HermitianMatrix: dim must be positive");
}

HermitianMatrix HermitianMatrix::identity(int dim) {
  HermitianMatrix m(dim);
  for (int i = 0; i < dim; ++i) m.a_[i * dim + i] = 1.0;
  return m;
}

void HermitianMatrix::set(int i, int j, cplx v) {
  if (i == j) v = cplx(v.real(), 0.0);
  a_[i * dim_ + j] = v;
  a_[j * dim_ + i] = std::conj(v);
}

CVector HermitianMatrix::apply(const CVector& x) const {
  if (static_cast<int>(x.size()) != dim_) throw DimensionError("apply: length mismatch");
  CVector y(dim_, cplx(0.0));
  for (int i = 0; i < dim_; ++i) {
    cplx s = 0.0;
    for (int j = 0; j < dim_; ++j) s += a_[i * dim_ + j] * x[j];
    y[i] = s;
  }
  return y;
}

double HermitianMatrix::frobenius_norm() const {
  double s = 0.0;
  for (const cplx& c : a_) s += std::norm(c);
  return std::sqrt(s);
}

HermitianMatrix HermitianMatrix::scaled(double s) const {
  HermitianMatrix m(dim_);
  for (int i = 0; i < dim_ * dim_; ++i) m.a_[i] = a_[i] * s;
  return m;
}

HermitianMatrix HermitianMatrix::plus(const HermitianMatrix& other, double weight) const {
  if (other.dim_ != dim_) throw DimensionError("plus: dim mismatch");
  HermitianMatrix m(dim_);
  for (int i = 0; i < dim_ * dim_; ++i) m.a_[i] = a_[i] + weight * other.a_[i];
  return m;
}

void add_outer(HermitianMatrix& m, const CVector& v, double w) {
  const int d = m.dim();
  if (static_cast<int>(v.size()) != d) throw DimensionError("add_outer: length mismatch");
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) m.set(i, j, m(i, j) + w * v[i] * std::conj(v[j]));
}

namespace {

double off_diagonal_norm(const std::vector<cplx>& a, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (i != j) s += std::norm(a[i * d + j]);
  return std::sqrt(s);
}

}  // namespace

EigenDecomposition hermitian_eig(const HermitianMatrix& m) {
  const int d = m.dim();
  std::vector<cplx> a(d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a[i * d + j] = m(i, j);
  std::vector<cplx> v(d * d, cplx(0.0));
  for (int i = 0; i < d; ++i) v[i * d + i] = 1.0;

  const double target = tol::jacobi_off * std::max(1.0, m.frobenius_norm());
  int sweep = 0;
  while (off_diagonal_norm(a, d) > target) {
    if (++sweep > tol::jacobi_sweeps)
      throw ConvergenceError("hermitian_eig: Jacobi failed to converge in " +
                             std::to_string(tol::jacobi_sweeps) + " sweeps");
    for (int p = 0; p < d; ++p) {
      for (int q = p + 1; q < d; ++q) {
        const cplx apq = a[p * d + q];
        const double absa = std::abs(apq);
        if (absa < 1e-300) continue;
        // Unitary analogue of the classical Jacobi rotation: strip the
        // phase of a_pq, then rotate by theta with tan(2 theta) chosen to
        // annihilate the realified off-diagonal entry.
        const cplx u = apq / absa;
        const double app = a[p * d + p].real();
        const double aqq = a[q * d + q].real();
        const double tau = (aqq - app) / (2.0 * absa);
        const double t =
            (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(tau * tau + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // Column update: columns p,q of A and of the accumulated V get
        // J = [[c, s], [-conj(u) s, conj(u) c]].
        for (int r = 0; r < d; ++r) {
          const cplx arp = a[r * d + p], arq = a[r * d + q];
          a[r * d + p] = arp * c - arq * std::conj(u) * s;
          a[r * d + q] = arp * s + arq * std::conj(u) * c;
          const cplx vrp = v[r * d + p], vrq = v[r * d + q];
          v[r * d + p] = vrp * c - vrq * std::conj(u) * s;
          v[r * d + q] = vrp * s + vrq * std::conj(u) * c;
        }
        // Row update with J^dagger.
        for (int r = 0; r < d; ++r) {
          const cplx apr = a[p * d + r], aqr = a[q * d + r];
          a[p * d + r] = apr * c - aqr * u * s;
          a[q * d + r] = apr * s + aqr * u * c;
        }
        a[p * d + q] = 0.0;
        a[q * d + p] = 0.0;
        a[p * d + p] = cplx(a[p * d + p].real(), 0.0);
        a[q * d + q] = cplx(a[q * d + q].real(), 0.0);
      }
    }
  }

  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int x, int y) { return a[x * d + x].real() < a[y * d + y].real(); });

  EigenDecomposition out;
  out.eigenvalues.resize(d);
  out.eigenvectors.assign(d, CVector(d));
  for (int k = 0; k < d; ++k) {
    out.eigenvalues[k] = a[order[k] * d + order[k]].real();
    for (int r = 0; r < d; ++r) out.eigenvectors[k][r] = v[r * d + order[k]];
  }
  return out;
}

double min_eigenvalue(const HermitianMatrix& m) {
  return hermitian_eig(m).eigenvalues.front();
}

double max_eigenvalue(const HermitianMatrix& m) {
  return hermitian_eig(m).eigenvalues.back();
}

double hermitian_determinant(const HermitianMatrix& m) {
  const int n = m.dim();
  std::vector<cplx> a(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a[i * n + j] = m(i, j);
  cplx det = 1.0;
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int r = k + 1; r < n; ++r)
      if (std::abs(a[r * n + k]) > std::abs(a[piv * n + k])) piv = r;
    if (std::abs(a[piv * n + k]) == 0.0) return 0.0;
    if (piv != k) {
      for (int c = 0; c < n; ++c) std::swap(a[k * n + c], a[piv * n + c]);
      det = -det;
    }
    det *= a[k * n + k];
    for (int r = k + 1; r < n; ++r) {
      const cplx f = a[r * n + k] / a[k * n + k];
      for (int c = k; c < n; ++c) a[r * n + c] -= f * a[k * n + c];
    }
  }
  return det.real();
}

HermitianMatrix pseudo_inverse(const HermitianMatrix& m, double tol_rank) {
  const EigenDecomposition eig = hermitian_eig(m);
  const double lam_max = std::abs(eig.eigenvalues.back());
  const double cut = tol_rank < 0.0 ? tol::rank_scale * std::max(lam_max, 1e-300) : tol_rank;
  HermitianMatrix out(m.dim());
  for (int k = 0; k < m.dim(); ++k) {
    if (eig.eigenvalues[k] > cut) add_outer(out, eig.eigenvectors[k], 1.0 / eig.eigenvalues[k]);
  }
  return out;
}

StateVector make_state(CVector amplitudes) {
  StateVector s;
  s.dim = static_cast<int>(amplitudes.size());
  if (s.dim == 0) throw DimensionError("make_state: empty amplitude list");
  const double n = norm2(amplitudes);
  if (std::abs(n - 1.0) > tol::norm)
    throw Error("make_state: state norm " + std::to_string(n) + " is not 1");
  s.amplitudes = std::move(amplitudes);
  return s;
}

EnsembleDiagnostics validate_ensemble(int dim, const std::vector<CVector>& states,
                                      const std::vector<double>& priors) {
  EnsembleDiagnostics d;
  if (dim <= 0) {
    d.message = "dimension must be positive";
    return d;
  }
  if (states.empty() || states.size() != priors.size()) {
    d.message = "need equally many states and priors, at least one of each";
    return d;
  }
  if (static_cast<int>(states.size()) > dim) {
    d.message = "more states than dimensions; they cannot be linearly independent";
    return d;
  }
  for (const auto& s : states) {
    if (static_cast<int>(s.size()) != dim) {
      d.message = "state length differs from dimension";
      return d;
    }
    d.worst_norm_error = std::max(d.worst_norm_error, std::abs(norm2(s) - 1.0));
  }
  for (double eta : priors) {
    if (eta < -1e-15) {
      d.message = "negative prior";
      return d;
    }
    d.prior_sum += eta;
  }
  const int n = static_cast<int>(states.size());
  HermitianMatrix g(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) g.set(i, j, inner(states[i], states[j]));
  const EigenDecomposition eig = hermitian_eig(g);
  d.min_gram_eigenvalue = eig.eigenvalues.front();

  if (d.worst_norm_error > tol::norm) {
    d.message = "state norms deviate from 1 by " + std::to_string(d.worst_norm_error);
  } else if (std::abs(d.prior_sum - 1.0) > tol::norm) {
    d.message = "priors sum to " + std::to_string(d.prior_sum);
  } else if (d.min_gram_eigenvalue <= tol::rank_scale * eig.eigenvalues.back()) {
    d.message = "states are linearly dependent (lambda_min(G) = " +
                std::to_string(d.min_gram_eigenvalue) + ")";
  } else {
    d.ok = true;
  }
  return d;
}

Ensemble make_ensemble(int dim, const std::vector<CVector>& states,
                       const std::vector<double>& priors) {
  const EnsembleDiagnostics d = validate_ensemble(dim, states, priors);
  if (!d.ok) throw Error("invalid ensemble: " + d.message);
  Ensemble e;
  e.dim = dim;
  e.priors = priors;
  for (const auto& s : states) e.states.push_back(make_state(s));
  return e;
}

HermitianMatrix gram_matrix(const Ensemble& ensemble) {
  const int n = ensemble.size();
  HermitianMatrix g(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      g.set(i, j, inner(ensemble.states[i].amplitudes, ensemble.states[j].amplitudes));
  return g;
}

DualFrame reciprocal_states(const Ensemble& ensemble) {
  const int n = ensemble.size();
  HermitianMatrix g = gram_matrix(ensemble);
  const EigenDecomposition geig = hermitian_eig(g);
  if (geig.eigenvalues.front() <= tol::rank_scale * geig.eigenvalues.back())
    throw RankError("reciprocal_states: states are (near) linearly dependent");

  std::vector<CVector> columns;
  columns.reserve(n);
  for (const auto& s : ensemble.states) columns.push_back(s.amplitudes);
  HermitianMatrix frame = frame_operator(columns);
  const HermitianMatrix frame_pinv = pseudo_inverse(frame);

  DualFrame out{g, HermitianMatrix(n), {}, {}};
  out.reciprocal_states.reserve(n);
  for (int i = 0; i < n; ++i)
    out.reciprocal_states.push_back(frame_pinv.apply(ensemble.states[i].amplitudes));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      out.dual_gram.set(i, j, inner(out.reciprocal_states[i], out.reciprocal_states[j]));
  out.frame_eigenvalues = hermitian_eig(frame).eigenvalues;
  return out;
}

HermitianMatrix frame_operator(const std::vector<CVector>& vectors) {
  if (vectors.empty()) throw DimensionError("frame_operator: no vectors");
  const int d = static_cast<int>(vectors.front().size());
  HermitianMatrix s(d);
  for (const auto& v : vectors) {
    if (static_cast<int>(v.size()) != d)
      throw DimensionError("frame_operator: vectors of unequal dimension");
    add_outer(s, v);
  }
  return s;
}

CVector apply_matrix(const CMatrix& m, const CVector& x) {
  CVector y(m.size(), cplx(0.0));
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i].size() != x.size()) throw DimensionError("apply_matrix: shape mismatch");
    for (std::size_t j = 0; j < x.size(); ++j) y[i] += m[i][j] * x[j];
  }
  return y;
}

bool is_unitary(const CMatrix& m, double tolerance) {
  const std::size_t d = m.size();
  for (const auto& row : m)
    if (row.size() != d) return false;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      cplx s = 0.0;  // (U^dagger U)_ij
      for (std::size_t k = 0; k < d; ++k) s += std::conj(m[k][i]) * m[k][j];
      if (std::abs(s - (i == j ? 1.0 : 0.0)) > tolerance) return false;
    }
  }
  return true;
}

}  // namespace usd
