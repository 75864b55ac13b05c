#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cleanpovm/cleanness.hpp"
#include "cleanpovm/linalg.hpp"
#include "cleanpovm/povm.hpp"

namespace cleanpovm {

enum class WitnessCase { A, B, C, D };
enum class WideningDirection { MaxEigIncrease, MinEigDecrease };

std::string_view to_string(WitnessCase c);
std::string_view to_string(WideningDirection d);
std::optional<WitnessCase> parse_witness_case(std::string_view s);
std::optional<WideningDirection> parse_widening_direction(std::string_view s);

// Contract constants of every certificate.
inline constexpr double kWitnessChannelResidual = 1e-8;
inline constexpr double kWitnessStrictMargin = 1e-6;

// Certificate that P is not clean: E(Q_i) = P_i for all i with a strictly
// wider spectrum at `widened_index`. Stored as plain data so that broken
// certificates can be represented and rejected by verify_witness().
struct Witness {
  std::vector<Matrix> q;      // same outcome order as P
  std::vector<Matrix> kraus;  // R_a with E(A) = sum_a R_a^dagger A R_a
  std::size_t widened_index = 0;
  WitnessCase case_tag = WitnessCase::A;
  double epsilon = 0.0;  // 0 for case (a), which has no parameter
  WideningDirection direction = WideningDirection::MaxEigIncrease;
};

// Dispatches on the verdict and the geometry of the separating pair.
// Errors: VerdictIsClean, PreconditionViolated, ConstructionFailed,
// EpsilonSearchFailed.
Witness build_witness(const Povm& p, const CleannessVerdict& verdict);

// All elements mu_i * 1. Errors: SingleOutcome, NotScalar.
Witness witness_case_a(const Povm& p);
// Every element block diagonal for V + V^perp; V is swapped with V^perp when
// it is the larger of the two. `v` holds spanning columns.
Witness witness_case_b(const Povm& p, const Matrix& v);
// Rank-one supports in V or V^perp, some full-rank element not block diagonal.
Witness witness_case_c(const Povm& p, const Matrix& v);
// Rank-one supports in V or W, some support in W but not in V^perp.
Witness witness_case_d(const Povm& p, const Matrix& v, const Matrix& w);

struct WitnessReport {
  bool q_valid = false;
  bool channel_unital = false;
  bool reproduces_p = false;
  bool strictly_widened = false;
  double closure_residual = 0.0;
  double max_residual = 0.0;  // max_i ||E(Q_i) - P_i||_HS
  double widening = 0.0;      // signed gain along the declared direction
  std::string q_error;

  bool accepted() const { return q_valid && channel_unital && reproduces_p && strictly_widened; }
};

// Re-checks a certificate with povm/channel primitives only. Throws
// DimensionMismatch if the witness does not match P's dimension or outcome count.
WitnessReport verify_witness(const Povm& p, const Witness& w);

// Constructions written in an orthonormal basis whose first dim(V) vectors
// span V. Kraus lists hold R_a, not R_a^dagger.
namespace case_b {

// A is dim V x dim V^perp with A A^dagger = 1_V.
std::vector<Matrix> kraus(const Matrix& a, double eps);
// F_eps on the block-diagonal part of m; E_eps(F_eps(m)) = m.
Matrix return_map(const Matrix& m, const Matrix& a, double eps);

}  // namespace case_b

namespace case_c {

std::vector<Matrix> kraus(Index dim_v, Index d, double eps);
// Off-diagonal blocks scaled by 1 / (1 - eps^2).
Matrix inverse_formula(const Matrix& m, Index dim_v, double eps);

}  // namespace case_c

namespace case_d {

// Coefficient of A A^dagger under the square root of B(eps), chosen so that
// the three Kraus operators close to the identity.
double radicand_coefficient(double eps);
// Throws NotPsd when 1 - c(eps) A A^dagger is not positive definite.
Matrix b_matrix(const Matrix& a, double eps);
std::vector<Matrix> kraus(const Matrix& a, double eps);

}  // namespace case_d

}  // namespace cleanpovm
