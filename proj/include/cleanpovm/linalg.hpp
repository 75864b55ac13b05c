#pragma once

// Dense complex linear algebra for small operators (d <= ~16).
//
// Superoperators act on row-major vectorizations: vec(A)[i*d + j] = A(i, j).
// For a map A -> X A Y this gives vec(X A Y) = (X kron Y^T) vec(A).

#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace cleanpovm {

using Complex = std::complex<double>;
using Index = Eigen::Index;
using Matrix = Eigen::MatrixXcd;
using Ket = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Rng = std::mt19937_64;

// All rank/zero decisions are relative to the largest magnitude in play.
struct Tolerances {
  double herm = 1e-9;
  double psd = 1e-9;
  double closure = 1e-9;
  double rank = 1e-8;
  double zero = 1e-8;
  double eig = 1e-10;
  double orth = 1e-10;
};

struct EigenDecomposition {
  RealVector values;  // ascending
  Matrix vectors;     // orthonormal columns, vectors.col(k) <-> values(k)
};

// Hermitian matrix with its spectrum cached at construction.
class HermitianOperator {
 public:
  HermitianOperator() = default;

  // Symmetrizes `m` to (m + m^dagger)/2. Throws NonHermitianInput when
  // ||m - m^dagger||_HS exceeds tol.herm * max(1, ||m||_HS).
  explicit HermitianOperator(const Matrix& m, const Tolerances& tol = {});

  Index dim() const { return matrix_.rows(); }
  const Matrix& matrix() const { return matrix_; }
  const RealVector& eigenvalues() const { return eig_.values; }
  const Matrix& eigenvectors() const { return eig_.vectors; }
  const EigenDecomposition& decomposition() const { return eig_; }
  double min_eigenvalue() const { return eig_.values(0); }
  double max_eigenvalue() const { return eig_.values(eig_.values.size() - 1); }

 private:
  Matrix matrix_;
  EigenDecomposition eig_;
};

EigenDecomposition eig_hermitian(const HermitianOperator& h);
EigenDecomposition eig_hermitian(const Matrix& m, const Tolerances& tol = {});

double hs_norm(const Matrix& m);
Matrix identity(Index d);
Matrix hermitize(const Matrix& m);

// Greedy maximal independent subset in input order. A vector is kept iff its
// residual against the span of the kept ones exceeds tol.rank * its norm.
std::vector<std::size_t> greedy_basis_subset(std::span<const Ket> vectors,
                                             const Tolerances& tol = {});

// Factorizes a basis once so that many kets can be expanded in it.
class BasisCoordinates {
 public:
  // Throws SingularBasis if the basis matrix is rank deficient at tol.rank.
  explicit BasisCoordinates(std::span<const Ket> basis,
                            const Tolerances& tol = {});

  Index dim() const { return basis_.rows(); }
  const Matrix& basis_matrix() const { return basis_; }

  // Coefficients with |c_j| <= tol.zero * max_k |c_k| are reported as zero.
  Ket coords(const Ket& v) const;

 private:
  Matrix basis_;
  Eigen::FullPivLU<Matrix> lu_;
  Tolerances tol_;
};

Ket coords_in_basis(const Ket& v, std::span<const Ket> basis,
                    const Tolerances& tol = {});

// Negative eigenvalues within tol.psd * max(1, lambda_max) are clamped.
HermitianOperator psd_sqrt(const HermitianOperator& h,
                           const Tolerances& tol = {});

Ket vec_row_major(const Matrix& a);
Matrix unvec_row_major(const Ket& v, Index d);

// d^2 x d^2 matrix of A -> sum_a R_a^dagger A R_a.
Matrix superop_matrix(std::span<const Matrix> kraus);

// LU factorization of a superoperator with a singular-value rank check.
class SuperopSolver {
 public:
  // Throws SingularSuperop when sigma_min <= rank_threshold * sigma_max.
  explicit SuperopSolver(const Matrix& superop, double rank_threshold = 1e-8);

  Index dim() const { return dim_; }
  const Matrix& superop() const { return superop_; }
  double condition_number() const { return condition_; }

  // Unhermitized solution of superop * vec(a) = vec(target).
  Matrix solve_raw(const Matrix& target) const;

 private:
  Matrix superop_;
  Eigen::FullPivLU<Matrix> lu_;
  Index dim_ = 0;
  double condition_ = 0.0;
};

// Solves E(A) = target and re-hermitizes. Throws SingularSuperop when the
// system is singular at tol.rank or the residual exceeds
// tol.eig * max(1, ||target||_HS).
HermitianOperator superop_solve(const Matrix& superop,
                                const HermitianOperator& target,
                                const Tolerances& tol = {});

// Columns spanning the orthogonal complement of span(basis columns).
Matrix orthogonal_complement(const Matrix& basis);
// Orthonormal columns spanning the same space as `basis` (assumed full rank).
Matrix orthonormalize(const Matrix& basis);
// ||v - Pi v|| / ||v|| with Pi the orthogonal projector onto span(basis).
double subspace_residual(const Matrix& basis, const Ket& v);

// Random draws. Kets and unitaries are Haar distributed.
Matrix random_gaussian(Index rows, Index cols, Rng& rng);
Ket random_ket(Index d, Rng& rng);
Matrix random_unitary(Index d, Rng& rng);
Matrix random_hermitian(Index d, Rng& rng);

// Decorrelated 64-bit seed for instance `index` of a run seeded by `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace cleanpovm
