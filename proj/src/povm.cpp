#include "cleanpovm/povm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cleanpovm/error.hpp"

namespace cleanpovm {

namespace {

Ket fix_phase(Ket v) {
  v /= v.norm();
  Index best = 0;
  for (Index k = 1; k < v.size(); ++k) {
    // Strict comparison keeps the first index on ties.
    if (std::abs(v(k)) > std::abs(v(best))) best = k;
  }
  const Complex a = v(best);
  v *= std::conj(a) / std::abs(a);
  v(best) = std::abs(a);
  return v;
}

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t uniform_count(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// Positive definite matrix on the columns of `frame` (orthonormal or not),
// with eigenvalues of the inner block bounded away from zero.
Matrix random_positive(const Matrix& frame, Rng& rng) {
  const Index m = frame.cols();
  const Matrix g = random_gaussian(m, m, rng);
  Matrix inner = g * g.adjoint();
  inner /= inner.trace().real();
  inner += uniform(rng, 0.05, 0.3) * identity(m);
  return frame * inner * frame.adjoint();
}

// Random partition of {0..d-1} into m nonempty groups.
std::vector<std::vector<Index>> random_blocks(Index d, Rng& rng) {
  const auto m = static_cast<Index>(uniform_count(rng, 2, static_cast<std::size_t>(d)));
  std::vector<Index> perm(static_cast<std::size_t>(d));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Index> cuts(static_cast<std::size_t>(d - 1));
  std::iota(cuts.begin(), cuts.end(), Index{1});
  std::shuffle(cuts.begin(), cuts.end(), rng);
  cuts.resize(static_cast<std::size_t>(m - 1));
  std::sort(cuts.begin(), cuts.end());
  std::vector<std::vector<Index>> blocks;
  Index start = 0;
  cuts.push_back(d);
  for (Index cut : cuts) {
    blocks.emplace_back(perm.begin() + start, perm.begin() + cut);
    start = cut;
  }
  return blocks;
}

Matrix columns(const Matrix& frame, const std::vector<Index>& cols) {
  Matrix out(frame.rows(), static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Index>(k)) = frame.col(cols[k]);
  return out;
}

Ket ket_in(const Matrix& sub, Rng& rng) {
  Ket v = sub * random_gaussian(sub.cols(), 1, rng).col(0);
  return v / v.norm();
}

std::vector<Ket> draw_supports(Index d, std::size_t k, SupportLayout layout, Rng& rng,
                               std::vector<Matrix>& block_frames) {
  std::vector<Ket> kets;
  if (layout == SupportLayout::Generic) {
    for (std::size_t i = 0; i < k; ++i) {
      if (!kets.empty() && uniform(rng, 0, 1) < 0.15) {
        kets.push_back(kets[uniform_count(rng, 0, kets.size() - 1)]);
      } else {
        kets.push_back(random_ket(d, rng));
      }
    }
    return kets;
  }
  const Matrix frame = layout == SupportLayout::Split ? random_gaussian(d, d, rng)
                                                      : random_unitary(d, rng);
  const auto blocks = random_blocks(d, rng);
  block_frames.clear();
  for (const auto& b : blocks) block_frames.push_back(columns(frame, b));
  for (std::size_t i = 0; i < k; ++i) {
    const double u = uniform(rng, 0, 1);
    if (!kets.empty() && u < 0.15) {
      kets.push_back(kets[uniform_count(rng, 0, kets.size() - 1)]);
    } else if (u < 0.30) {
      const std::size_t a = uniform_count(rng, 0, blocks.size() - 1);
      std::size_t b = uniform_count(rng, 0, blocks.size() - 2);
      if (b >= a) ++b;
      Matrix both(d, block_frames[a].cols() + block_frames[b].cols());
      both << block_frames[a], block_frames[b];
      kets.push_back(ket_in(both, rng));
    } else {
      kets.push_back(ket_in(block_frames[uniform_count(rng, 0, blocks.size() - 1)], rng));
    }
  }
  return kets;
}

// Scales the proper part so its top eigenvalue sits in [0.4, 0.85] and
// appends the full-rank complement.
std::vector<Matrix> close_with_complement(std::vector<Matrix> parts, Index d, Rng& rng) {
  Matrix sum = Matrix::Zero(d, d);
  for (const Matrix& m : parts) sum += m;
  const double top = HermitianOperator(sum).max_eigenvalue();
  const double scale = uniform(rng, 0.4, 0.85) / top;
  sum.setZero();
  for (Matrix& m : parts) {
    m *= scale;
    sum += m;
  }
  parts.push_back(identity(d) - sum);
  return parts;
}

}  // namespace

std::vector<Matrix> Povm::matrices() const {
  std::vector<Matrix> out;
  out.reserve(elements_.size());
  for (const auto& e : elements_) out.push_back(e.op.matrix());
  return out;
}

Povm validate(std::vector<Matrix> raw, const Tolerances& tol, std::vector<std::string> labels) {
  if (raw.empty()) throw Error(ErrorCode::DimensionMismatch, "a POVM needs at least one element");
  const Index d = raw.front().rows();
  if (d < 2) throw Error(ErrorCode::DimensionMismatch, "dimension must be at least 2");
  if (!labels.empty() && labels.size() != raw.size()) {
    throw Error(ErrorCode::DimensionMismatch, "label count differs from element count");
  }
  Povm p;
  p.dim_ = d;
  p.tol_ = tol;
  p.labels_ = std::move(labels);
  Matrix sum = Matrix::Zero(d, d);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const Matrix& m = raw[i];
    if (m.rows() != d || m.cols() != d) {
      throw Error(ErrorCode::DimensionMismatch, "elements must all be d x d", i);
    }
    PovmElement e;
    try {
      e.op = HermitianOperator(m, tol);
    } catch (const Error& err) {
      throw Error(err.code(), "invalid element", i);
    }
    const double lmax = e.op.max_eigenvalue();
    if (e.op.min_eigenvalue() < -tol.psd * std::max(1.0, lmax)) {
      throw Error(ErrorCode::NotPsd, "min eigenvalue " + std::to_string(e.op.min_eigenvalue()), i);
    }
    if (e.op.matrix().norm() <= tol.zero) throw Error(ErrorCode::ZeroElement, "", i);
    const RealVector& lam = e.op.eigenvalues();
    e.rank = (lam.array() > tol.rank * lmax).count();
    if (e.rank == 1) {
      e.rank_one = RankOneData{lmax, fix_phase(e.op.eigenvectors().col(d - 1))};
    }
    sum += e.op.matrix();
    p.elements_.push_back(std::move(e));
  }
  const double closure = (sum - identity(d)).norm();
  if (closure > tol.closure) {
    throw Error(ErrorCode::ClosureViolation, "||sum - 1||_HS = " + std::to_string(closure));
  }
  return p;
}

std::string_view to_string(PovmClass c) {
  switch (c) {
    case PovmClass::RankOne: return "rank-one";
    case PovmClass::FullRank: return "full-rank";
    case PovmClass::StrictQuasiQubit: return "strict-quasi-qubit";
    case PovmClass::QuasiQubitGeneral: return "quasi-qubit";
    case PovmClass::NotQuasiQubit: return "not-quasi-qubit";
  }
  return "unknown";
}

RankProfile classify(const Povm& p) {
  RankProfile profile;
  bool any_one = false;
  bool any_full = false;
  bool other = false;
  for (const auto& e : p.elements()) {
    profile.ranks.push_back(e.rank);
    if (e.rank == 1) {
      any_one = true;
    } else if (e.rank == p.dim()) {
      any_full = true;
    } else {
      other = true;
    }
  }
  if (other) {
    profile.kind = PovmClass::NotQuasiQubit;
  } else if (any_one && any_full) {
    profile.kind = PovmClass::StrictQuasiQubit;
  } else if (any_one) {
    profile.kind = PovmClass::RankOne;
  } else {
    profile.kind = PovmClass::FullRank;
  }
  return profile;
}

std::vector<RankOneSupport> rank_one_supports(const Povm& p) {
  std::vector<RankOneSupport> out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (const auto& r = p[i].rank_one) out.push_back({i, r->weight, r->support});
  }
  return out;
}

bool is_scalar_element(const PovmElement& e, const Tolerances& tol) {
  return e.op.max_eigenvalue() - e.op.min_eigenvalue() <= tol.zero * e.op.max_eigenvalue();
}

std::string_view to_string(PovmKind k) {
  switch (k) {
    case PovmKind::RankOne: return "rank-one";
    case PovmKind::FullRank: return "full-rank";
    case PovmKind::StrictQuasiQubit: return "strict-quasi-qubit";
    case PovmKind::Scalar: return "scalar";
  }
  return "unknown";
}

std::optional<PovmKind> parse_povm_kind(std::string_view s) {
  for (PovmKind k : {PovmKind::RankOne, PovmKind::FullRank, PovmKind::StrictQuasiQubit,
                     PovmKind::Scalar}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

Povm random_povm(PovmKind kind, Index d, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return random_povm(kind, d, n, rng);
}

Povm random_povm(PovmKind kind, Index d, std::size_t n, Rng& rng, SupportLayout layout) {
  if (d < 2) throw Error(ErrorCode::InfeasibleRequest, "dimension must be at least 2");
  if (n < 1) throw Error(ErrorCode::InfeasibleRequest, "need at least one outcome");
  std::vector<Matrix> elements;
  switch (kind) {
    case PovmKind::Scalar: {
      std::vector<double> w(n);
      for (double& x : w) x = uniform(rng, 0.2, 1.0);
      const double total = std::accumulate(w.begin(), w.end(), 0.0);
      for (double x : w) elements.push_back((x / total) * identity(d));
      if (n == 1) elements.front() = identity(d);
      break;
    }
    case PovmKind::RankOne: {
      if (n < static_cast<std::size_t>(d)) {
        throw Error(ErrorCode::InfeasibleRequest, "a rank-one POVM needs at least d outcomes");
      }
      for (int attempt = 0;; ++attempt) {
        std::vector<Ket> kets;
        Matrix frame = Matrix::Zero(d, d);
        for (std::size_t i = 0; i < n; ++i) {
          kets.push_back(std::sqrt(uniform(rng, 0.2, 1.0)) * random_ket(d, rng));
          frame += kets.back() * kets.back().adjoint();
        }
        const HermitianOperator s(frame);
        if (s.min_eigenvalue() < 1e-6 * s.max_eigenvalue() && attempt < 16) continue;
        const RealVector inv_root = s.eigenvalues().cwiseSqrt().cwiseInverse();
        const Matrix t = s.eigenvectors() * inv_root.cast<Complex>().asDiagonal() *
                         s.eigenvectors().adjoint();
        for (const Ket& v : kets) {
          const Ket u = t * v;
          elements.push_back(u * u.adjoint());
        }
        break;
      }
      break;
    }
    case PovmKind::FullRank: {
      if (n == 1) {
        elements.push_back(identity(d));
        break;
      }
      std::vector<Matrix> parts;
      for (std::size_t i = 0; i + 1 < n; ++i) parts.push_back(random_positive(identity(d), rng));
      elements = close_with_complement(std::move(parts), d, rng);
      break;
    }
    case PovmKind::StrictQuasiQubit: {
      if (n < 2) throw Error(ErrorCode::InfeasibleRequest, "a strict quasi-qubit POVM needs n >= 2");
      const std::size_t k = uniform_count(rng, 1, n - 1);
      std::vector<Matrix> frames;
      const auto kets = draw_supports(d, k, layout, rng, frames);
      std::vector<Matrix> parts;
      for (const Ket& v : kets) parts.push_back(uniform(rng, 0.2, 1.0) * v * v.adjoint());
      for (std::size_t i = 0; i + 1 + k < n; ++i) {
        if (layout == SupportLayout::OrthogonalBlocks) {
          Matrix m = Matrix::Zero(d, d);
          for (const Matrix& f : frames) m += random_positive(f, rng);
          parts.push_back(m);
        } else {
          parts.push_back(random_positive(identity(d), rng));
        }
      }
      elements = close_with_complement(std::move(parts), d, rng);
      std::shuffle(elements.begin(), elements.end(), rng);
      break;
    }
  }
  return validate(std::move(elements));
}

Povm random_quasi_qubit_povm(Index d, Rng& rng) {
  const auto du = static_cast<std::size_t>(d);
  const double u = uniform(rng, 0.0, 1.0);
  if (u < 0.12) return random_povm(PovmKind::RankOne, d, uniform_count(rng, du, 2 * du + 1), rng);
  if (u < 0.20) return random_povm(PovmKind::FullRank, d, uniform_count(rng, 2, du + 2), rng);
  if (u < 0.25) return random_povm(PovmKind::Scalar, d, uniform_count(rng, 2, 4), rng);
  const double v = uniform(rng, 0.0, 1.0);
  const SupportLayout layout = v < 0.25   ? SupportLayout::Generic
                               : v < 0.65 ? SupportLayout::Split
                                          : SupportLayout::OrthogonalBlocks;
  return random_povm(PovmKind::StrictQuasiQubit, d, uniform_count(rng, 2, 2 * du + 3), rng, layout);
}

Povm conjugate(const Povm& p, const Matrix& u) {
  std::vector<Matrix> out;
  for (const auto& e : p.elements()) out.push_back(u * e.op.matrix() * u.adjoint());
  return validate(std::move(out), p.tolerances(), p.labels());
}

Povm permute(const Povm& p, std::span<const std::size_t> order) {
  if (order.size() != p.size()) throw Error(ErrorCode::DimensionMismatch, "permutation length");
  std::vector<Matrix> out;
  std::vector<std::string> labels;
  for (std::size_t k : order) {
    out.push_back(p[k].op.matrix());
    if (!p.labels().empty()) labels.push_back(p.labels()[k]);
  }
  return validate(std::move(out), p.tolerances(), std::move(labels));
}

std::optional<Matrix> unitary_equivalence_check(const Povm& p, const Povm& q, Rng& rng, double tol) {
  if (p.dim() != q.dim() || p.size() != q.size()) {
    throw Error(ErrorCode::DimensionMismatch, "POVMs differ in dimension or outcome count");
  }
  const Index d = p.dim();
  const std::size_t n = p.size();
  auto verify = [&](const Matrix& u) {
    if ((u.adjoint() * u - identity(d)).norm() > 1e-8) return false;
    for (std::size_t i = 0; i < n; ++i) {
      if ((u * p[i].op.matrix() * u.adjoint() - q[i].op.matrix()).norm() > tol) return false;
    }
    return true;
  };
  if (verify(identity(d))) return identity(d);

  std::normal_distribution<double> normal(0.0, 1.0);
  for (int attempt = 0; attempt < 8; ++attempt) {
    Matrix x = Matrix::Zero(d, d);
    Matrix y = Matrix::Zero(d, d);
    double cnorm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = normal(rng);
      cnorm += c * c;
      x += c * p[i].op.matrix();
      y += c * q[i].op.matrix();
    }
    const HermitianOperator hx(x);
    const HermitianOperator hy(y);
    const double scale = std::max(1.0, std::sqrt(cnorm));
    if ((hx.eigenvalues() - hy.eigenvalues()).cwiseAbs().maxCoeff() > tol * scale) {
      return std::nullopt;  // spectra are unitary invariants
    }
    const RealVector& lam = hx.eigenvalues();
    double gap = std::numeric_limits<double>::infinity();
    for (Index k = 0; k + 1 < d; ++k) gap = std::min(gap, lam(k + 1) - lam(k));
    if (gap <= 1e-6 * scale) continue;

    const Matrix& vx = hx.eigenvectors();
    const Matrix& vy = hy.eigenvectors();
    std::vector<Matrix> pe, qe;
    for (std::size_t i = 0; i < n; ++i) {
      pe.push_back(vx.adjoint() * p[i].op.matrix() * vx);
      qe.push_back(vy.adjoint() * q[i].op.matrix() * vy);
    }
    // Phases d_k with q'_{kl} = d_k p'_{kl} conj(d_l), propagated along the
    // strongest available couplings.
    std::vector<Complex> phase(static_cast<std::size_t>(d), Complex(0.0));
    std::vector<bool> known(static_cast<std::size_t>(d), false);
    for (Index assigned = 0; assigned < d; ++assigned) {
      double best = 0.0;
      Index bk = -1, bl = -1;
      std::size_t bi = 0;
      for (Index k = 0; k < d; ++k) {
        if (!known[k]) continue;
        for (Index l = 0; l < d; ++l) {
          if (known[l]) continue;
          for (std::size_t i = 0; i < n; ++i) {
            const double a = std::abs(pe[i](k, l));
            if (a > best) {
              best = a;
              bk = k;
              bl = l;
              bi = i;
            }
          }
        }
      }
      if (bk < 0 || best <= 1e-9) {
        const auto fresh = static_cast<Index>(std::find(known.begin(), known.end(), false) - known.begin());
        phase[fresh] = 1.0;
        known[fresh] = true;
        continue;
      }
      const Complex r = qe[bi](bk, bl) / (phase[bk] * pe[bi](bk, bl));
      phase[bl] = std::abs(r) > 0 ? std::conj(r / std::abs(r)) : Complex(1.0);
      known[bl] = true;
    }
    Eigen::VectorXcd dvec(d);
    for (Index k = 0; k < d; ++k) dvec(k) = phase[k];
    const Matrix u = vy * dvec.asDiagonal() * vx.adjoint();
    if (verify(u)) return u;
    return std::nullopt;
  }
  throw Error(ErrorCode::Inconclusive, "random combinations stayed degenerate");
}

}  // namespace cleanpovm
