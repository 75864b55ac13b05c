#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cleanpovm/linalg.hpp"

namespace cleanpovm {

struct RankOneData {
  double weight = 0.0;  // lambda > 0
  Ket support;          // unit norm, largest-magnitude amplitude real positive
};

struct PovmElement {
  HermitianOperator op;
  Index rank = 0;  // eigenvalues above tol.rank * lambda_max
  std::optional<RankOneData> rank_one;
};

// Finite POVM on C^d. Instances only come out of validate(), so every Povm
// is closed (sum = 1), PSD and free of zero elements.
class Povm {
 public:
  Index dim() const { return dim_; }
  std::size_t size() const { return elements_.size(); }
  const std::vector<PovmElement>& elements() const { return elements_; }
  const PovmElement& operator[](std::size_t i) const { return elements_[i]; }
  const std::vector<std::string>& labels() const { return labels_; }
  const Tolerances& tolerances() const { return tol_; }
  std::vector<Matrix> matrices() const;

 private:
  friend Povm validate(std::vector<Matrix> raw, const Tolerances& tol,
                       std::vector<std::string> labels);

  Index dim_ = 0;
  std::vector<PovmElement> elements_;
  std::vector<std::string> labels_;
  Tolerances tol_;
};

// Errors: DimensionMismatch, NonHermitianInput, NotPsd(index),
// ZeroElement(index), ClosureViolation.
Povm validate(std::vector<Matrix> raw, const Tolerances& tol = {},
              std::vector<std::string> labels = {});

// QuasiQubitGeneral is the umbrella label for the three quasi-qubit classes;
// classify() always reports the most specific one.
enum class PovmClass { RankOne, FullRank, StrictQuasiQubit, QuasiQubitGeneral, NotQuasiQubit };

std::string_view to_string(PovmClass c);

struct RankProfile {
  PovmClass kind = PovmClass::NotQuasiQubit;
  std::vector<Index> ranks;

  bool is_quasi_qubit() const { return kind != PovmClass::NotQuasiQubit; }
};

RankProfile classify(const Povm& p);

struct RankOneSupport {
  std::size_t index = 0;  // POVM element index (0-based)
  double weight = 0.0;
  Ket support;
};

std::vector<RankOneSupport> rank_one_supports(const Povm& p);

// Scalar elements are mu * 1 up to tol.zero relative spread.
bool is_scalar_element(const PovmElement& e, const Tolerances& tol);

enum class PovmKind { RankOne, FullRank, StrictQuasiQubit, Scalar };

std::string_view to_string(PovmKind k);
std::optional<PovmKind> parse_povm_kind(std::string_view s);

// How rank-one supports are placed for the strict kind.
//   Generic:          Haar-random supports.
//   Split:            supports drawn inside the blocks of a random oblique
//                     direct-sum decomposition, plus an occasional bridging
//                     support spanning two blocks.
//   OrthogonalBlocks: like Split with mutually orthogonal blocks; every
//                     full-rank element is block diagonal.
enum class SupportLayout { Generic, Split, OrthogonalBlocks };

// Errors: InfeasibleRequest (n = 0, d < 2, rank-one with n < d, strict with n < 2).
Povm random_povm(PovmKind kind, Index d, std::size_t n, std::uint64_t seed);
Povm random_povm(PovmKind kind, Index d, std::size_t n, Rng& rng,
                 SupportLayout layout = SupportLayout::Generic);

// Mixed ensemble of quasi-qubit POVMs with at least two outcomes, covering
// every kind and layout. Used for fuzzing.
Povm random_quasi_qubit_povm(Index d, Rng& rng);

// Elements U P_i U^dagger.
Povm conjugate(const Povm& p, const Matrix& u);
// Elements reordered so that result[k] = p[order[k]].
Povm permute(const Povm& p, std::span<const std::size_t> order);

// Best-effort search for U with U P_i U^dagger = Q_i for all i, through the
// spectrum of a random real combination sum_i c_i P_i. Returns nullopt when
// the spectra of the combinations differ or the phase-fixed candidate fails
// verification. Throws Inconclusive after 8 degenerate draws.
std::optional<Matrix> unitary_equivalence_check(const Povm& p, const Povm& q, Rng& rng,
                                                double tol = 1e-6);

}  // namespace cleanpovm
