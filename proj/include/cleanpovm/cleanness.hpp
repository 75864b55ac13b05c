#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cleanpovm/linalg.hpp"
#include "cleanpovm/povm.hpp"

namespace cleanpovm {

// Collection of subspaces V_B = span(basis_kets[j] : j in B) whose direct sum
// is C^d. Blocks hold 0-based positions into basis_kets.
struct BlockPartition {
  // POVM element index of each basis ket; empty when the basis does not come
  // from rank-one supports (full-rank POVMs).
  std::vector<std::size_t> basis_indices;
  std::vector<Ket> basis_kets;
  std::vector<std::vector<std::size_t>> blocks;
};

// Supplementary proper subspaces V, W given by spanning columns. Positions
// refer to BlockPartition::basis_kets when the pair came from a partition.
struct SeparatingPair {
  Matrix v;
  Matrix w;
  std::vector<std::size_t> v_positions;
  std::vector<std::size_t> w_positions;
};

enum class VerdictReason {
  RankOne,
  TotallyDetermined,
  SupportsDoNotSpan,
  PartitionSplit,
  ScalarElements,
  TrivialSingleOutcome,
};

std::string_view to_string(VerdictReason r);

struct CleannessVerdict {
  bool clean = false;
  VerdictReason reason = VerdictReason::RankOne;
  std::optional<BlockPartition> partition;
  std::optional<SeparatingPair> separating_pair;
};

// Partition refinement over the rank-one supports. Throws NotQuasiQubit for
// POVMs outside the quasi-qubit class.
CleannessVerdict decide_clean(const Povm& p);

// V = first block, W = the remaining blocks. Throws SingleBlock.
SeparatingPair separating_pair(const BlockPartition& partition);

// Pair for supports that do not span C^d: V = span(supports) (or span(e1)
// when there are none) and W its orthogonal complement.
SeparatingPair separating_pair_for_supports(std::span<const Ket> supports, Index d,
                                            const Tolerances& tol = {});

// Dimension of {R : R psi_i is colinear to psi_i for all i}, from the stacked
// (n(d-1)) x d^2 system at tol.rank. Equals 1 iff a spanning support family
// totally determines C^d.
std::size_t totally_determined_nullspace(std::span<const Ket> supports, Index d,
                                         const Tolerances& tol = {});

// Every d-subset of the d+1 vectors has rank d.
bool projective_frame_by_subsets(std::span<const Ket> vectors, const Tolerances& tol = {});
// First d vectors independent and the last with no zero coordinate in that basis.
bool projective_frame_by_coordinates(std::span<const Ket> vectors, const Tolerances& tol = {});
// Both routes; throws WrongCount for a count other than d+1 and Internal if
// the routes disagree.
bool is_projective_frame(std::span<const Ket> vectors, const Tolerances& tol = {});

}  // namespace cleanpovm
