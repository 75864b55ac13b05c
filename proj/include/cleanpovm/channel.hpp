#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "cleanpovm/linalg.hpp"
#include "cleanpovm/povm.hpp"

namespace cleanpovm {

// Channel in the Heisenberg picture, A -> sum_a R_a^dagger A R_a.
class KrausChannel {
 public:
  // Throws DimensionMismatch or ClosureViolation (||sum R^dagger R - 1||_HS > tol.closure).
  static KrausChannel make(std::vector<Matrix> kraus, const Tolerances& tol = {});
  // Shape checks only; used to carry certificates that may be broken.
  static KrausChannel unchecked(std::vector<Matrix> kraus);

  Index dim() const { return dim_; }
  const std::vector<Matrix>& kraus() const { return kraus_; }

  double closure_residual() const;
  Matrix apply(const Matrix& a) const;
  Matrix superop() const;
  // min_a ||1 - R_a||_HS.
  double identity_distance() const;

 private:
  Index dim_ = 0;
  std::vector<Matrix> kraus_;
};

HermitianOperator apply(const KrausChannel& e, const HermitianOperator& a,
                        const Tolerances& tol = {});
Povm apply_to_povm(const KrausChannel& e, const Povm& q);

// Largest singular value of a superoperator matrix, i.e. its norm as a map
// between Hilbert-Schmidt spaces.
double induced_norm(const Matrix& superop);

struct NearIdentityBound {
  double epsilon = 0.0;
  double f_eps = 0.0;  // 2(1 + sqrt(d)) eps + 2 eps^2
  std::optional<double> inverse_norm_bound;  // f / (1 - f), iff f < 1
};

NearIdentityBound f_bound(double epsilon, Index d);

// Solver for E(A) = B on d x d matrices.
class PositiveMapInverse {
 public:
  PositiveMapInverse(SuperopSolver solver, std::optional<NearIdentityBound> bound)
      : solver_(std::move(solver)), bound_(bound) {}

  // Hermitian solution; throws SingularSuperop if the round trip misses b by
  // more than 1e-8 * max(1, ||b||_HS).
  Matrix solve(const Matrix& b) const;

  const Matrix& superop() const { return solver_.superop(); }
  double condition_number() const { return solver_.condition_number(); }
  // Present when some Kraus operator certifies invertibility with f(eps) < 1.
  const std::optional<NearIdentityBound>& bound() const { return bound_; }

 private:
  SuperopSolver solver_;
  std::optional<NearIdentityBound> bound_;
};

// Accepts channels with a Kraus operator at f(eps) < 1 from the identity, or
// a superoperator with condition number below 1e12. Throws SingularSuperop.
PositiveMapInverse invert_positive_map(const KrausChannel& e);

// lambda_m(X) - lambda_M(X) f(eps) sqrt(d) / (1 - f(eps)), a lower bound on
// lambda_m(E^{-1}(X)). Throws BoundUnavailable if f >= 1 and
// PreconditionViolated if X is not PSD.
double min_eig_lower_bound(const HermitianOperator& x, double epsilon, Index d);

struct SpectrumWidthReport {
  double min_before = 0.0;
  double max_before = 0.0;
  double min_after = 0.0;
  double max_after = 0.0;
  bool ok = true;
};

SpectrumWidthReport spectrum_width_check(const KrausChannel& e, const HermitianOperator& x,
                                         const Tolerances& tol = {});

// Kraus operators cut from a Haar-like isometry C^d -> C^(k d).
KrausChannel random_unital_channel(Index d, std::size_t num_kraus, Rng& rng);
// First Kraus operator is a contraction at HS distance about `epsilon` from
// the identity; the remaining ones absorb 1 - R_1^dagger R_1.
KrausChannel random_near_identity_channel(Index d, double epsilon, std::size_t num_kraus,
                                          Rng& rng);

}  // namespace cleanpovm
