#pragma once

// Complex linear-algebra core for unambiguous state discrimination:
// state vectors, Gram matrices, a cyclic-Jacobi Hermitian eigensolver,
// Moore-Penrose pseudo-inverse, reciprocal (dual) states and frame
// operators. Everything here is a pure function over immutable inputs.

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace usd {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

// Default tolerances. The rank cutoff is relative to the largest
// eigenvalue of the matrix being inverted.
namespace tol {
inline constexpr double norm = 1e-9;        // state normalization
inline constexpr double dual = 1e-9;        // <dual_i|psi_k> = delta_ik
inline constexpr double psd = 1e-9;         // PSD feasibility slack
inline constexpr double rank_scale = 1e-10; // rank cutoff, times lambda_max
inline constexpr double jacobi_off = 1e-13; // Jacobi off-diagonal target
inline constexpr int jacobi_sweeps = 100;   // Jacobi sweep cap
}  // namespace tol

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};
struct DimensionError : Error {
  using Error::Error;
};
struct RankError : Error {
  using Error::Error;
};
struct ConvergenceError : Error {
  using Error::Error;
};
struct UnsupportedError : Error {
  using Error::Error;
};
struct DegeneratePriorError : Error {
  using Error::Error;
};

// <a|b> with the first argument conjugated (physics convention).
cplx inner(const CVector& a, const CVector& b);
double norm2(const CVector& v);

// Dense Hermitian matrix. set() writes both (i,j) and the conjugate at
// (j,i), so conjugate symmetry holds exactly by construction.
class HermitianMatrix {
 public:
  explicit HermitianMatrix(int dim);
  static HermitianMatrix identity(int dim);

  int dim() const { return dim_; }
  cplx operator()(int i, int j) const { return a_[i * dim_ + j]; }
  void set(int i, int j, cplx v);
  void add(int i, int j, cplx v) { set(i, j, (*this)(i, j) + v); }

  CVector apply(const CVector& x) const;   // y = M x
  double frobenius_norm() const;
  HermitianMatrix scaled(double s) const;
  HermitianMatrix plus(const HermitianMatrix& other, double weight = 1.0) const;

 private:
  int dim_;
  std::vector<cplx> a_;
};

// M += w * |v><v|
void add_outer(HermitianMatrix& m, const CVector& v, double w = 1.0);

struct EigenDecomposition {
  std::vector<double> eigenvalues;    // ascending
  std::vector<CVector> eigenvectors;  // orthonormal, eigenvectors[k] ~ eigenvalues[k]
};

// Cyclic Jacobi for Hermitian matrices. Dimensions here are small
// (<= 64), so the quadratic sweep cost is irrelevant; the payoff is a
// deterministic, dependency-free solver.
EigenDecomposition hermitian_eig(const HermitianMatrix& m);

double min_eigenvalue(const HermitianMatrix& m);
double max_eigenvalue(const HermitianMatrix& m);

// det(M) for Hermitian M (real by symmetry), via LU with partial pivoting.
double hermitian_determinant(const HermitianMatrix& m);

// Eigenvalues above tol_rank are inverted, the rest are zeroed.
// tol_rank < 0 selects the default relative cutoff tol::rank_scale * lambda_max.
HermitianMatrix pseudo_inverse(const HermitianMatrix& m, double tol_rank = -1.0);

struct StateVector {
  int dim = 0;
  CVector amplitudes;
};

// Throws unless the amplitudes have unit Euclidean norm within tol::norm.
StateVector make_state(CVector amplitudes);

struct Ensemble {
  int dim = 0;
  std::vector<StateVector> states;
  std::vector<double> priors;

  int size() const { return static_cast<int>(states.size()); }
};

struct EnsembleDiagnostics {
  bool ok = false;
  double prior_sum = 0.0;
  double min_gram_eigenvalue = 0.0;
  double worst_norm_error = 0.0;
  std::string message;
};

// Non-throwing validity check: unit norms, priors summing to 1 and a
// linearly independent state set (lambda_min(G) above the rank cutoff).
EnsembleDiagnostics validate_ensemble(int dim, const std::vector<CVector>& states,
                                      const std::vector<double>& priors);

// Throwing constructor used everywhere else.
Ensemble make_ensemble(int dim, const std::vector<CVector>& states,
                       const std::vector<double>& priors);

// G_ij = <psi_i|psi_j>. Hermitian, PSD, unit diagonal.
HermitianMatrix gram_matrix(const Ensemble& ensemble);

struct DualFrame {
  HermitianMatrix gram;       // G_ij = <psi_i|psi_j>
  HermitianMatrix dual_gram;  // a~_ij = <dual_i|dual_j>, inverse of G on the span
  std::vector<CVector> reciprocal_states;  // not unit norm
  std::vector<double> frame_eigenvalues;   // spectrum of S = sum |psi_i><psi_i|
};

// Reciprocal states dual_i with <dual_i|psi_k> = delta_ik, computed as
// S^+ psi_i with S the frame operator. The eigendecomposition route
// handles dim > N without forming an explicit inverse.
DualFrame reciprocal_states(const Ensemble& ensemble);

// S = sum_i |v_i><v_i|. Shares its nonzero spectrum with the Gram matrix.
HermitianMatrix frame_operator(const std::vector<CVector>& vectors);

// General square complex matrix, row-major. Only needed for unitary
// group elements; everything Hermitian uses HermitianMatrix.
using CMatrix = std::vector<CVector>;

CVector apply_matrix(const CMatrix& m, const CVector& x);
bool is_unitary(const CMatrix& m, double tolerance = 1e-10);

}  // namespace usd
