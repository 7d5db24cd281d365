#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace usd;
using namespace usd::testing;

namespace {

HermitianMatrix random_hermitian(TestRng& rng, int dim) {
  HermitianMatrix m(dim);
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j)
      m.set(i, j, i == j ? cplx(rng.gauss(), 0.0) : cplx(rng.gauss(), rng.gauss()));
  return m;
}

double reconstruction_error(const HermitianMatrix& m, const EigenDecomposition& eig) {
  double err = 0.0;
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j) {
      cplx s = 0.0;
      for (int k = 0; k < m.dim(); ++k)
        s += eig.eigenvalues[k] * eig.eigenvectors[k][i] * std::conj(eig.eigenvectors[k][j]);
      err = std::max(err, std::abs(s - m(i, j)));
    }
  return err;
}

}  // namespace

TEST_CASE("gram matrix of an orthonormal pair is the identity") {
  const Ensemble e = make_ensemble(2, {{1.0, 0.0}, {0.0, 1.0}}, {0.5, 0.5});
  const HermitianMatrix g = gram_matrix(e);
  CHECK(std::abs(g(0, 0) - 1.0) < 1e-15);
  CHECK(std::abs(g(0, 1)) < 1e-15);
  CHECK(std::abs(g(1, 1) - 1.0) < 1e-15);
}

TEST_CASE("gram matrix reproduces the three-state overlaps 1/3, 1/3, 1/9") {
  const HermitianMatrix g = gram_matrix(example2a());
  CHECK(std::abs(g(0, 1) - 1.0 / 3.0) < 1e-15);
  CHECK(std::abs(g(0, 2) - 1.0 / 3.0) < 1e-15);
  CHECK(std::abs(g(1, 2) - 1.0 / 9.0) < 1e-15);
}

TEST_CASE("overlap of the printed second three-state pair is 2/sqrt(6)") {
  // The figure caption prints 2/sqrt(3), which exceeds 1 and cannot be an
  // overlap of unit vectors; the states themselves give 2/sqrt(6).
  const HermitianMatrix g = gram_matrix(example2b());
  CHECK(std::abs(g(0, 1) - 2.0 / std::sqrt(6.0)) < 1e-14);
}

TEST_CASE("eigensolver: identity, equiangular spectrum, PSD and unit diagonal") {
  const EigenDecomposition id3 = hermitian_eig(HermitianMatrix::identity(3));
  for (double v : id3.eigenvalues) CHECK(std::abs(v - 1.0) < 1e-14);

  // G = I + s(C - I) for N = 3, s = 0.2: eigenvalues 1 - s (twice), 1 + 2s.
  HermitianMatrix g(3);
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) g.set(i, j, i == j ? 1.0 : 0.2);
  const EigenDecomposition eig = hermitian_eig(g);
  CHECK(std::abs(eig.eigenvalues[0] - 0.8) < 1e-12);
  CHECK(std::abs(eig.eigenvalues[1] - 0.8) < 1e-12);
  CHECK(std::abs(eig.eigenvalues[2] - 1.4) < 1e-12);

  const HermitianMatrix gram = gram_matrix(example2a());
  for (int i = 0; i < 3; ++i) CHECK(std::abs(gram(i, i) - 1.0) < 1e-14);
  CHECK(hermitian_eig(gram).eigenvalues.front() > 0.0);
}

TEST_CASE("eigensolver agrees with the characteristic-polynomial oracle") {
  TestRng rng(2024);
  for (int trial = 0; trial < 25; ++trial) {
    const HermitianMatrix m = random_hermitian(rng, 4);
    const EigenDecomposition eig = hermitian_eig(m);
    std::vector<double> oracle = real_roots(characteristic_polynomial(m));
    REQUIRE(oracle.size() == 4);
    std::sort(oracle.begin(), oracle.end());
    for (int k = 0; k < 4; ++k)
      CHECK(std::abs(eig.eigenvalues[k] - oracle[k]) < 1e-9 * (1.0 + std::abs(oracle[k])));

    CHECK(reconstruction_error(m, eig) < 1e-12 * std::max(1.0, m.frobenius_norm()));
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        CHECK(std::abs(inner(eig.eigenvectors[a], eig.eigenvectors[b]) - (a == b ? 1.0 : 0.0)) <
              1e-12);
  }
}

TEST_CASE("pseudo-inverse: identity, rank-deficient diagonal, involution") {
  const HermitianMatrix id = pseudo_inverse(HermitianMatrix::identity(3));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(std::abs(id(i, j) - (i == j ? 1.0 : 0.0)) < 1e-13);

  HermitianMatrix d(2);
  d.set(0, 0, 2.0);
  const HermitianMatrix dp = pseudo_inverse(d);
  CHECK(std::abs(dp(0, 0) - 0.5) < 1e-14);
  CHECK(std::abs(dp(1, 1)) < 1e-14);

  TestRng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    HermitianMatrix psd(3);
    for (int k = 0; k < 3; ++k) add_outer(psd, random_unit(rng, 3), rng.uniform(0.2, 2.0));
    const HermitianMatrix once = pseudo_inverse(psd);
    const HermitianMatrix twice = pseudo_inverse(once);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(std::abs(twice(i, j) - psd(i, j)) < 1e-8);
    // m * m^+ * m = m
    for (int i = 0; i < 3; ++i) {
      CVector col(3, cplx(0.0));
      for (int r = 0; r < 3; ++r) col[r] = psd(r, i);
      const CVector back = psd.apply(once.apply(col));
      for (int r = 0; r < 3; ++r) CHECK(std::abs(back[r] - psd(r, i)) < 1e-10);
    }
  }
}

TEST_CASE("pseudo-inverse of the GU frame operator maps psi to its reciprocal") {
  const StateVector psi = example3_generator();
  std::vector<CVector> states;
  for (const auto& u : example3_group()) states.push_back(apply_matrix(u, psi.amplitudes));
  const HermitianMatrix pinv = pseudo_inverse(frame_operator(states));
  const CVector dual = pinv.apply(psi.amplitudes);
  const double c = 1.0 / (4.0 * std::sqrt(2.0));
  const CVector expected = {3 * c, 3 * c, 6 * c, 2 * c};
  for (int r = 0; r < 4; ++r) CHECK(std::abs(dual[r] - expected[r]) < 1e-12);
}

TEST_CASE("reciprocal states: qubit pair, self-dual basis, GU orbit") {
  const DualFrame qubit = reciprocal_states(example4());
  const CVector expected1 = {1.0, -1.0};
  const CVector expected2 = {0.0, std::sqrt(2.0)};
  for (int r = 0; r < 2; ++r) {
    CHECK(std::abs(qubit.reciprocal_states[0][r] - expected1[r]) < 1e-12);
    CHECK(std::abs(qubit.reciprocal_states[1][r] - expected2[r]) < 1e-12);
  }

  const Ensemble basis = make_ensemble(2, {{1.0, 0.0}, {0.0, 1.0}}, {0.5, 0.5});
  const DualFrame self = reciprocal_states(basis);
  CHECK(std::abs(self.reciprocal_states[0][0] - 1.0) < 1e-12);
  CHECK(std::abs(self.reciprocal_states[1][1] - 1.0) < 1e-12);

  const StateVector psi = example3_generator();
  const auto group = example3_group();
  std::vector<CVector> states;
  for (const auto& u : group) states.push_back(apply_matrix(u, psi.amplitudes));
  const DualFrame gu = reciprocal_states(make_ensemble(4, states, {0.25, 0.25, 0.25, 0.25}));
  const CVector dual0 = gu.reciprocal_states[0];
  for (int i = 0; i < 4; ++i) {
    const CVector expected = apply_matrix(group[i], dual0);
    for (int r = 0; r < 4; ++r) CHECK(std::abs(gu.reciprocal_states[i][r] - expected[r]) < 1e-12);
  }
}

TEST_CASE("reciprocal states reject dependent ensembles") {
  const double r2 = 1.0 / std::sqrt(2.0);
  Ensemble e = example4();
  e.states[1] = e.states[0];  // bypass the constructor on purpose
  (void)r2;
  CHECK_THROWS_AS(reciprocal_states(e), RankError);
}

TEST_CASE("dual-basis identity and dual_gram * gram = identity on random ensembles") {
  TestRng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 3);  // 2..4
    const int dim = n + static_cast<int>(rng.uniform() * 2);
    const Ensemble e = random_ensemble(rng, n, dim);
    const DualFrame f = reciprocal_states(e);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        CHECK(std::abs(inner(f.reciprocal_states[i], e.states[k].amplitudes) -
                       (i == k ? 1.0 : 0.0)) < 1e-9);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        cplx s = 0.0;
        for (int j = 0; j < n; ++j) s += f.dual_gram(i, j) * f.gram(j, k);
        CHECK(std::abs(s - (i == k ? 1.0 : 0.0)) < 1e-9);
      }
  }
}

TEST_CASE("frame operator: projector, shared spectrum with the Gram matrix") {
  TestRng rng(13);
  const CVector v = random_unit(rng, 4);
  const EigenDecomposition rank1 = hermitian_eig(frame_operator({v}));
  CHECK(std::abs(rank1.eigenvalues.back() - 1.0) < 1e-12);
  for (std::size_t k = 0; k + 1 < rank1.eigenvalues.size(); ++k)
    CHECK(std::abs(rank1.eigenvalues[k]) < 1e-12);

  const Ensemble eq = equiangular_ensemble(3, 0.2);
  std::vector<CVector> cols;
  for (const auto& s : eq.states) cols.push_back(s.amplitudes);
  const auto spec = hermitian_eig(frame_operator(cols)).eigenvalues;
  CHECK(std::abs(spec[0] - 0.8) < 1e-12);
  CHECK(std::abs(spec[1] - 0.8) < 1e-12);
  CHECK(std::abs(spec[2] - 1.4) < 1e-12);

  // Nonzero spectra of S = Phi Phi^* and G = Phi^* Phi coincide.
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 3);
    const int dim = n + static_cast<int>(rng.uniform() * 2);
    const Ensemble e = random_ensemble(rng, n, dim);
    std::vector<CVector> vs;
    for (const auto& s : e.states) vs.push_back(s.amplitudes);
    auto frame_spec = hermitian_eig(frame_operator(vs)).eigenvalues;
    const auto gram_spec = hermitian_eig(gram_matrix(e)).eigenvalues;
    std::vector<double> nonzero;
    for (double x : frame_spec)
      if (std::abs(x) > 1e-9) nonzero.push_back(x);
    REQUIRE(nonzero.size() == gram_spec.size());
    for (std::size_t k = 0; k < nonzero.size(); ++k)
      CHECK(std::abs(nonzero[k] - gram_spec[k]) < 1e-9);
  }
}

TEST_CASE("frame operator of the GU duals has top eigenvalue 9/2") {
  const DualFrame gu = reciprocal_states(make_ensemble(
      4,
      [] {
        std::vector<CVector> states;
        const StateVector psi = example3_generator();
        for (const auto& u : example3_group()) states.push_back(apply_matrix(u, psi.amplitudes));
        return states;
      }(),
      {0.25, 0.25, 0.25, 0.25}));
  const double lam = max_eigenvalue(frame_operator(gu.reciprocal_states));
  CHECK(std::abs(lam - 4.5) < 1e-12);
}

TEST_CASE("phase rotation leaves overlap moduli and frame spectra unchanged") {
  TestRng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const Ensemble e = random_ensemble(rng, 3, 4);
    Ensemble rotated = e;
    const double theta = rng.uniform(0.0, 6.28);
    const cplx phase(std::cos(theta), std::sin(theta));
    for (auto& z : rotated.states[1].amplitudes) z *= phase;

    const HermitianMatrix g0 = gram_matrix(e), g1 = gram_matrix(rotated);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(std::abs(std::abs(g0(i, j)) - std::abs(g1(i, j))) < 1e-12);

    const auto s0 = reciprocal_states(e).frame_eigenvalues;
    const auto s1 = reciprocal_states(rotated).frame_eigenvalues;
    for (std::size_t k = 0; k < s0.size(); ++k) CHECK(std::abs(s0[k] - s1[k]) < 1e-12);
  }
}

TEST_CASE("ensemble validation reports the failure mode") {
  const double r2 = 1.0 / std::sqrt(2.0);
  CHECK(validate_ensemble(2, {{1.0, 0.0}, {r2, r2}}, {0.5, 0.5}).ok);

  const auto bad_priors = validate_ensemble(2, {{1.0, 0.0}, {r2, r2}}, {0.5, 0.4});
  CHECK_FALSE(bad_priors.ok);

  const auto dependent = validate_ensemble(2, {{1.0, 0.0}, {1.0, 0.0}}, {0.5, 0.5});
  CHECK_FALSE(dependent.ok);
  CHECK(dependent.min_gram_eigenvalue < 1e-10);

  const auto unnormalized = validate_ensemble(2, {{0.9, 0.0}, {0.0, 1.0}}, {0.5, 0.5});
  CHECK_FALSE(unnormalized.ok);

  CHECK_THROWS(make_state({0.5, 0.5}));
}
