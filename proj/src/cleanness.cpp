#include "cleanpovm/cleanness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cleanpovm/error.hpp"

namespace cleanpovm {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  // Returns the size of the merged set.
  std::size_t unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return size_[a];
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return size_[a];
  }

  // Blocks ordered by their smallest member, members ascending.
  std::vector<std::vector<std::size_t>> groups() {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> slot(parent_.size(), parent_.size());
    for (std::size_t x = 0; x < parent_.size(); ++x) {
      const std::size_t r = find(x);
      if (slot[r] == parent_.size()) {
        slot[r] = out.size();
        out.emplace_back();
      }
      out[slot[r]].push_back(x);
    }
    return out;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

Matrix stack(std::span<const Ket> kets, std::span<const std::size_t> positions) {
  Matrix m(kets.front().size(), static_cast<Index>(positions.size()));
  for (std::size_t k = 0; k < positions.size(); ++k) m.col(static_cast<Index>(k)) = kets[positions[k]];
  return m;
}

CleannessVerdict full_rank_verdict(const Povm& p) {
  const Tolerances& tol = p.tolerances();
  const Index d = p.dim();
  std::size_t pick = p.size();
  double spread = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (is_scalar_element(p[i], tol)) continue;
    const double s = p[i].op.max_eigenvalue() - p[i].op.min_eigenvalue();
    if (s > spread) {
      spread = s;
      pick = i;
    }
  }
  CleannessVerdict v;
  v.clean = false;
  if (pick == p.size()) {
    v.reason = VerdictReason::ScalarElements;
    return v;
  }
  // u = (v_min + v_max)/sqrt(2) makes the chosen element non-block-diagonal
  // for span(u) + span(u)^perp.
  const Matrix& vecs = p[pick].op.eigenvectors();
  const Ket u = (vecs.col(0) + vecs.col(d - 1)) / std::sqrt(2.0);
  const Matrix rest = orthogonal_complement(u);
  BlockPartition part;
  part.basis_kets.push_back(u);
  for (Index k = 0; k < rest.cols(); ++k) part.basis_kets.push_back(rest.col(k));
  part.blocks.push_back({0});
  part.blocks.emplace_back();
  for (std::size_t k = 1; k < static_cast<std::size_t>(d); ++k) part.blocks.back().push_back(k);
  v.reason = VerdictReason::PartitionSplit;
  v.separating_pair = separating_pair(part);
  v.partition = std::move(part);
  return v;
}

}  // namespace

std::string_view to_string(VerdictReason r) {
  switch (r) {
    case VerdictReason::RankOne: return "RankOne";
    case VerdictReason::TotallyDetermined: return "TotallyDetermined";
    case VerdictReason::SupportsDoNotSpan: return "SupportsDoNotSpan";
    case VerdictReason::PartitionSplit: return "PartitionSplit";
    case VerdictReason::ScalarElements: return "ScalarElements";
    case VerdictReason::TrivialSingleOutcome: return "TrivialSingleOutcome";
  }
  return "Unknown";
}

CleannessVerdict decide_clean(const Povm& p) {
  const RankProfile profile = classify(p);
  if (!profile.is_quasi_qubit()) {
    throw Error(ErrorCode::NotQuasiQubit, "some element has rank strictly between 1 and d");
  }
  CleannessVerdict verdict;
  if (profile.kind == PovmClass::RankOne) {
    verdict.clean = true;
    verdict.reason = VerdictReason::RankOne;
    return verdict;
  }
  if (p.size() == 1) {
    verdict.clean = true;
    verdict.reason = VerdictReason::TrivialSingleOutcome;
    return verdict;
  }
  const std::vector<RankOneSupport> supports = rank_one_supports(p);
  if (supports.empty()) return full_rank_verdict(p);

  const Tolerances& tol = p.tolerances();
  const Index d = p.dim();
  const auto du = static_cast<std::size_t>(d);
  std::vector<Ket> kets;
  for (const auto& s : supports) kets.push_back(s.support);

  const std::vector<std::size_t> picked = greedy_basis_subset(kets, tol);
  if (picked.size() < du) {
    verdict.clean = false;
    verdict.reason = VerdictReason::SupportsDoNotSpan;
    verdict.separating_pair = separating_pair_for_supports(kets, d, tol);
    return verdict;
  }

  BlockPartition part;
  for (std::size_t k : picked) {
    part.basis_indices.push_back(supports[k].index);
    part.basis_kets.push_back(kets[k]);
  }
  const BasisCoordinates coords(part.basis_kets, tol);
  DisjointSets sets(du);
  std::vector<bool> in_basis(kets.size(), false);
  for (std::size_t k : picked) in_basis[k] = true;

  for (std::size_t s = 0; s < kets.size(); ++s) {
    if (in_basis[s]) continue;
    const Ket c = coords.coords(kets[s]);
    std::size_t anchor = du;
    for (std::size_t j = 0; j < du; ++j) {
      if (c(static_cast<Index>(j)) == Complex(0.0)) continue;
      if (anchor == du) {
        anchor = j;
        continue;
      }
      if (sets.unite(anchor, j) == du) {
        verdict.clean = true;
        verdict.reason = VerdictReason::TotallyDetermined;
        part.blocks = sets.groups();
        verdict.partition = std::move(part);
        return verdict;
      }
    }
  }

  part.blocks = sets.groups();
  verdict.clean = false;
  verdict.reason = VerdictReason::PartitionSplit;
  SeparatingPair pair = separating_pair(part);
  for (const Ket& k : kets) {
    if (subspace_residual(pair.v, k) > tol.zero && subspace_residual(pair.w, k) > tol.zero) {
      throw Error(ErrorCode::Internal, "a support lies in neither separating subspace");
    }
  }
  verdict.separating_pair = std::move(pair);
  verdict.partition = std::move(part);
  return verdict;
}

SeparatingPair separating_pair(const BlockPartition& partition) {
  if (partition.blocks.size() < 2) throw Error(ErrorCode::SingleBlock, "partition has one block");
  SeparatingPair pair;
  pair.v_positions = partition.blocks.front();
  for (std::size_t b = 1; b < partition.blocks.size(); ++b) {
    pair.w_positions.insert(pair.w_positions.end(), partition.blocks[b].begin(),
                            partition.blocks[b].end());
  }
  std::sort(pair.w_positions.begin(), pair.w_positions.end());
  pair.v = stack(partition.basis_kets, pair.v_positions);
  pair.w = stack(partition.basis_kets, pair.w_positions);
  return pair;
}

SeparatingPair separating_pair_for_supports(std::span<const Ket> supports, Index d,
                                            const Tolerances& tol) {
  SeparatingPair pair;
  const std::vector<std::size_t> picked = greedy_basis_subset(supports, tol);
  if (picked.size() >= static_cast<std::size_t>(d)) {
    throw Error(ErrorCode::PreconditionViolated, "supports span the whole space");
  }
  if (picked.empty()) {
    pair.v = Matrix::Zero(d, 1);
    pair.v(0, 0) = 1.0;
  } else {
    pair.v = orthonormalize(stack(supports, picked));
  }
  pair.w = orthogonal_complement(pair.v);
  return pair;
}

std::size_t totally_determined_nullspace(std::span<const Ket> supports, Index d,
                                         const Tolerances& tol) {
  const Index unknowns = d * d;
  Matrix system(static_cast<Index>(supports.size()) * (d - 1), unknowns);
  Index row = 0;
  for (const Ket& raw : supports) {
    if (raw.size() != d) throw Error(ErrorCode::DimensionMismatch, "support dimension");
    const Ket psi = raw / raw.norm();
    const Matrix perp = orthogonal_complement(psi);
    // <u_k| R |psi> = sum_ij conj(u_k[i]) R_ij psi[j] = 0
    for (Index k = 0; k < perp.cols(); ++k, ++row) {
      for (Index i = 0; i < d; ++i) {
        for (Index j = 0; j < d; ++j) system(row, i * d + j) = std::conj(perp(i, k)) * psi(j);
      }
    }
  }
  if (row == 0) return static_cast<std::size_t>(unknowns);
  const RealVector sv = Eigen::JacobiSVD<Matrix>(system).singularValues();
  const Index rank = (sv.array() > tol.rank * sv(0)).count();
  return static_cast<std::size_t>(unknowns - rank);
}

bool projective_frame_by_subsets(std::span<const Ket> vectors, const Tolerances& tol) {
  const auto n = vectors.size();
  for (std::size_t skip = 0; skip < n; ++skip) {
    std::vector<Ket> subset;
    for (std::size_t k = 0; k < n; ++k) {
      if (k != skip) subset.push_back(vectors[k]);
    }
    if (greedy_basis_subset(subset, tol).size() != subset.size()) return false;
  }
  return true;
}

bool projective_frame_by_coordinates(std::span<const Ket> vectors, const Tolerances& tol) {
  const auto d = vectors.size() - 1;
  const auto first = vectors.first(d);
  if (greedy_basis_subset(first, tol).size() != d) return false;
  const Ket c = coords_in_basis(vectors[d], first, tol);
  return (c.array() != Complex(0.0)).all();
}

bool is_projective_frame(std::span<const Ket> vectors, const Tolerances& tol) {
  if (vectors.empty() || vectors.size() != static_cast<std::size_t>(vectors.front().size()) + 1) {
    throw Error(ErrorCode::WrongCount, "a projective frame has exactly d+1 vectors");
  }
  const bool by_subsets = projective_frame_by_subsets(vectors, tol);
  const bool by_coords = projective_frame_by_coordinates(vectors, tol);
  if (by_subsets != by_coords) {
    throw Error(ErrorCode::Internal, "projective frame routes disagree");
  }
  return by_subsets;
}

}  // namespace cleanpovm
