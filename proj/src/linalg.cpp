#include "cleanpovm/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "cleanpovm/error.hpp"

namespace cleanpovm {

namespace {

void require_finite(const Matrix& m) {
  if (!m.allFinite()) throw Error(ErrorCode::NonFinite, "matrix has NaN or Inf entries");
}

void require_square(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw Error(ErrorCode::DimensionMismatch, "expected a nonempty square matrix");
  }
}

}  // namespace

HermitianOperator::HermitianOperator(const Matrix& m, const Tolerances& tol) {
  require_square(m);
  require_finite(m);
  const double asym = (m - m.adjoint()).norm();
  if (asym > tol.herm * std::max(1.0, m.norm())) {
    throw Error(ErrorCode::NonHermitianInput,
                "asymmetry " + std::to_string(asym) + " exceeds tolerance");
  }
  matrix_ = hermitize(m);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(matrix_);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::Internal, "Hermitian eigensolver did not converge");
  }
  eig_.values = solver.eigenvalues();
  eig_.vectors = solver.eigenvectors();
}

EigenDecomposition eig_hermitian(const HermitianOperator& h) { return h.decomposition(); }

EigenDecomposition eig_hermitian(const Matrix& m, const Tolerances& tol) {
  return HermitianOperator(m, tol).decomposition();
}

double hs_norm(const Matrix& m) { return m.norm(); }

Matrix identity(Index d) { return Matrix::Identity(d, d); }

Matrix hermitize(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

std::vector<std::size_t> greedy_basis_subset(std::span<const Ket> vectors,
                                             const Tolerances& tol) {
  std::vector<std::size_t> picked;
  if (vectors.empty()) return picked;
  const Index d = vectors.front().size();
  Matrix q(d, 0);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const Ket& v = vectors[i];
    if (v.size() != d) throw Error(ErrorCode::DimensionMismatch, "kets of unequal dimension");
    const double norm = v.norm();
    if (norm == 0.0) continue;
    Ket r = v;
    // Two passes of classical Gram-Schmidt keep the residual orthogonal.
    for (int pass = 0; pass < 2 && q.cols() > 0; ++pass) r -= q * (q.adjoint() * r);
    const double rn = r.norm();
    if (rn > tol.rank * norm) {
      picked.push_back(i);
      q.conservativeResize(Eigen::NoChange, q.cols() + 1);
      q.col(q.cols() - 1) = r / rn;
      if (q.cols() == d) break;
    }
  }
  return picked;
}

BasisCoordinates::BasisCoordinates(std::span<const Ket> basis, const Tolerances& tol)
    : tol_(tol) {
  if (basis.empty()) throw Error(ErrorCode::SingularBasis, "empty basis");
  const Index d = basis.front().size();
  if (static_cast<Index>(basis.size()) != d) {
    throw Error(ErrorCode::DimensionMismatch, "basis must contain exactly d kets");
  }
  basis_.resize(d, d);
  for (Index j = 0; j < d; ++j) {
    if (basis[j].size() != d) throw Error(ErrorCode::DimensionMismatch, "kets of unequal dimension");
    basis_.col(j) = basis[j];
  }
  const RealVector sv = Eigen::JacobiSVD<Matrix>(basis_).singularValues();
  if (!(sv(d - 1) > tol.rank * sv(0))) {
    throw Error(ErrorCode::SingularBasis, "basis is rank deficient");
  }
  lu_.compute(basis_);
}

Ket BasisCoordinates::coords(const Ket& v) const {
  if (v.size() != dim()) throw Error(ErrorCode::DimensionMismatch, "ket dimension");
  Ket c = lu_.solve(v);
  const double cmax = c.cwiseAbs().maxCoeff();
  for (Index j = 0; j < c.size(); ++j) {
    if (std::abs(c(j)) <= tol_.zero * cmax) c(j) = 0.0;
  }
  return c;
}

Ket coords_in_basis(const Ket& v, std::span<const Ket> basis, const Tolerances& tol) {
  return BasisCoordinates(basis, tol).coords(v);
}

HermitianOperator psd_sqrt(const HermitianOperator& h, const Tolerances& tol) {
  const RealVector& lam = h.eigenvalues();
  const double lmax = h.max_eigenvalue();
  if (h.min_eigenvalue() < -tol.psd * std::max(1.0, lmax)) {
    throw Error(ErrorCode::NotPsd, "negative eigenvalue " + std::to_string(h.min_eigenvalue()));
  }
  const RealVector root = lam.cwiseMax(0.0).cwiseSqrt();
  const Matrix& v = h.eigenvectors();
  return HermitianOperator(v * root.cast<Complex>().asDiagonal() * v.adjoint(), tol);
}

Ket vec_row_major(const Matrix& a) {
  Ket v(a.size());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) v(i * a.cols() + j) = a(i, j);
  }
  return v;
}

Matrix unvec_row_major(const Ket& v, Index d) {
  if (v.size() != d * d) throw Error(ErrorCode::DimensionMismatch, "vector length is not d^2");
  Matrix a(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) a(i, j) = v(i * d + j);
  }
  return a;
}

Matrix superop_matrix(std::span<const Matrix> kraus) {
  if (kraus.empty()) throw Error(ErrorCode::DimensionMismatch, "empty Kraus list");
  const Index d = kraus.front().rows();
  Matrix s = Matrix::Zero(d * d, d * d);
  for (const Matrix& r : kraus) {
    if (r.rows() != d || r.cols() != d) {
      throw Error(ErrorCode::DimensionMismatch, "Kraus operators must all be d x d");
    }
    // E(A)_{ij} = sum_{kl} conj(R_{ki}) A_{kl} R_{lj}
    for (Index i = 0; i < d; ++i) {
      for (Index j = 0; j < d; ++j) {
        for (Index k = 0; k < d; ++k) {
          const Complex rki = std::conj(r(k, i));
          if (rki == Complex(0.0)) continue;
          for (Index l = 0; l < d; ++l) s(i * d + j, k * d + l) += rki * r(l, j);
        }
      }
    }
  }
  return s;
}

SuperopSolver::SuperopSolver(const Matrix& superop, double rank_threshold)
    : superop_(superop) {
  const Index n = superop.rows();
  if (n != superop.cols() || n < 1) {
    throw Error(ErrorCode::DimensionMismatch, "superoperator must be square");
  }
  dim_ = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(n))));
  if (dim_ * dim_ != n) throw Error(ErrorCode::DimensionMismatch, "superoperator size is not d^2");
  require_finite(superop);
  const RealVector sv = Eigen::BDCSVD<Matrix>(superop).singularValues();
  const double smax = sv(0);
  const double smin = sv(n - 1);
  if (!(smin > rank_threshold * smax)) {
    throw Error(ErrorCode::SingularSuperop,
                "smallest singular value " + std::to_string(smin) + " vs largest " +
                    std::to_string(smax));
  }
  condition_ = smax / smin;
  lu_.compute(superop);
}

Matrix SuperopSolver::solve_raw(const Matrix& target) const {
  if (target.rows() != dim_ || target.cols() != dim_) {
    throw Error(ErrorCode::DimensionMismatch, "target dimension");
  }
  return unvec_row_major(lu_.solve(vec_row_major(target)), dim_);
}

HermitianOperator superop_solve(const Matrix& superop, const HermitianOperator& target,
                                const Tolerances& tol) {
  const SuperopSolver solver(superop, tol.rank);
  const Matrix a = hermitize(solver.solve_raw(target.matrix()));
  const Matrix back = unvec_row_major(superop * vec_row_major(a), target.dim());
  const double residual = (back - target.matrix()).norm();
  if (residual > tol.eig * std::max(1.0, target.matrix().norm())) {
    throw Error(ErrorCode::SingularSuperop,
                "solve residual " + std::to_string(residual) + " too large");
  }
  return HermitianOperator(a, tol);
}

Matrix orthogonal_complement(const Matrix& basis) {
  const Index d = basis.rows();
  const Index k = basis.cols();
  if (k == 0) return identity(d);
  Eigen::HouseholderQR<Matrix> qr(basis);
  const Matrix q = qr.householderQ() * identity(d);
  return q.rightCols(d - k);
}

Matrix orthonormalize(const Matrix& basis) {
  const Index d = basis.rows();
  const Index k = basis.cols();
  if (k == 0) return Matrix(d, 0);
  Eigen::HouseholderQR<Matrix> qr(basis);
  const Matrix q = qr.householderQ() * identity(d);
  return q.leftCols(k);
}

double subspace_residual(const Matrix& basis, const Ket& v) {
  const double n = v.norm();
  if (n == 0.0) return 0.0;
  if (basis.cols() == 0) return 1.0;
  const Matrix q = orthonormalize(basis);
  return (v - q * (q.adjoint() * v)).norm() / n;
}

Matrix random_gaussian(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(rows, cols);
  // Fill in row-major order so draws do not depend on storage layout.
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(i, j) = Complex(re, im);
    }
  }
  return g;
}

Ket random_ket(Index d, Rng& rng) {
  Ket v = random_gaussian(d, 1, rng).col(0);
  return v / v.norm();
}

Matrix random_unitary(Index d, Rng& rng) {
  const Matrix g = random_gaussian(d, d, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * identity(d);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix the phase ambiguity of QR so that q is Haar distributed.
  for (Index j = 0; j < d; ++j) {
    const Complex rjj = r(j, j);
    const double a = std::abs(rjj);
    if (a > 0.0) q.col(j) *= rjj / a;
  }
  return q;
}

Matrix random_hermitian(Index d, Rng& rng) {
  const Matrix g = random_gaussian(d, d, rng);
  return 0.5 * (g + g.adjoint());
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  auto splitmix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  return splitmix(splitmix(seed) ^ (index * 0xd1b54a32d192ed03ULL + 1));
}

}  // namespace cleanpovm
