#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "cleanpovm/cleanness.hpp"
#include "cleanpovm/error.hpp"
#include "oracles.hpp"

using namespace cleanpovm;

namespace {

const double s2 = 1.0 / std::sqrt(2.0);

Matrix projector(const Ket& v) { return v * v.adjoint() / v.squaredNorm(); }

Ket e(Index d, Index k) {
  Ket v = Ket::Zero(d);
  v(k) = 1.0;
  return v;
}

std::vector<Ket> supports_of(const Povm& p) {
  std::vector<Ket> out;
  for (const auto& s : rank_one_supports(p)) out.push_back(s.support);
  return out;
}

Povm qb_notclean() {
  return validate({oracle::diag({0.25, 0}), oracle::diag({0, 0.25}), oracle::diag({0.75, 0.75})});
}

}  // namespace

TEST_CASE("trine is clean through the rank-one fast path") {
  std::vector<Matrix> els;
  for (int k = 0; k < 3; ++k) {
    const double theta = 2.0 * M_PI * k / 3.0;
    els.push_back((2.0 / 3.0) * projector(oracle::ket({std::cos(theta / 2), std::sin(theta / 2)})));
  }
  const CleannessVerdict v = decide_clean(validate(els));
  CHECK(v.clean);
  CHECK(v.reason == VerdictReason::RankOne);
}

TEST_CASE("diagonal qubit POVM splits into two blocks") {
  const CleannessVerdict v = decide_clean(qb_notclean());
  CHECK_FALSE(v.clean);
  CHECK(v.reason == VerdictReason::PartitionSplit);
  REQUIRE(v.partition);
  CHECK(v.partition->blocks == std::vector<std::vector<std::size_t>>{{0}, {1}});
  CHECK(v.partition->basis_indices == std::vector<std::size_t>{0, 1});
  REQUIRE(v.separating_pair);
  CHECK(subspace_residual(v.separating_pair->v, e(2, 0)) < 1e-12);
  CHECK(subspace_residual(v.separating_pair->w, e(2, 1)) < 1e-12);
}

TEST_CASE("a third non-colinear support merges everything") {
  const Matrix plus = 0.25 * projector(oracle::ket({1, 1}));
  const Matrix rest = identity(2) - 0.25 * oracle::diag({1, 0}) - 0.25 * oracle::diag({0, 1}) - plus;
  Matrix expected(2, 2);
  expected << 0.625, -0.125, -0.125, 0.625;
  CHECK((rest - expected).norm() < 1e-15);
  const auto [lo, hi] = oracle::eig2(0.625, -0.125, 0.625);
  CHECK(lo == doctest::Approx(0.5));
  CHECK(hi == doctest::Approx(0.75));

  const Povm p = validate({0.25 * oracle::diag({1, 0}), 0.25 * oracle::diag({0, 1}), plus, rest});
  const CleannessVerdict v = decide_clean(p);
  CHECK(v.clean);
  CHECK(v.reason == VerdictReason::TotallyDetermined);
  REQUIRE(v.partition);
  CHECK(v.partition->blocks.size() == 1);
  CHECK(oracle::colinear_solution_dim(supports_of(p), 2) == 1);
  CHECK(totally_determined_nullspace(supports_of(p), 2) == 1);
}

TEST_CASE("decide_clean rejects non-quasi-qubit POVMs") {
  const Povm p = validate({oracle::diag({0.5, 0.5, 0}), oracle::diag({0.5, 0.5, 1})});
  try {
    decide_clean(p);
    FAIL("expected NotQuasiQubit");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::NotQuasiQubit);
  }
}

TEST_CASE("decide_clean boundary verdicts") {
  const CleannessVerdict single = decide_clean(validate({identity(3)}));
  CHECK(single.clean);
  CHECK(single.reason == VerdictReason::TrivialSingleOutcome);

  const CleannessVerdict scalar = decide_clean(validate({0.3 * identity(2), 0.7 * identity(2)}));
  CHECK_FALSE(scalar.clean);
  CHECK(scalar.reason == VerdictReason::ScalarElements);

  const Povm full = validate({oracle::diag({0.2, 0.6}), oracle::diag({0.8, 0.4})});
  const CleannessVerdict fv = decide_clean(full);
  CHECK_FALSE(fv.clean);
  CHECK(fv.reason == VerdictReason::PartitionSplit);
  REQUIRE(fv.separating_pair);
  CHECK(fv.separating_pair->v.cols() == 1);
  // u = (v1 + v2)/sqrt(2) gives <u|P|u^perp> = (l1 - l2)/2 for the chosen element.
  const Ket u = fv.separating_pair->v.col(0);
  const Ket w = fv.separating_pair->w.col(0);
  CHECK(std::abs(u.dot(w)) < 1e-12);
  CHECK(std::abs(u.dot(full[0].op.matrix() * w)) == doctest::Approx(0.2));
}

TEST_CASE("supports that do not span give a separating pair") {
  const Matrix p1 = 0.3 * oracle::diag({1, 0, 0});
  const Matrix p2 = 0.3 * projector(oracle::ket({1, 1, 0}));
  const Povm p = validate({p1, p2, identity(3) - p1 - p2});
  const CleannessVerdict v = decide_clean(p);
  CHECK_FALSE(v.clean);
  CHECK(v.reason == VerdictReason::SupportsDoNotSpan);
  REQUIRE(v.separating_pair);
  CHECK(v.separating_pair->v.cols() == 2);
  CHECK(v.separating_pair->w.cols() == 1);
  CHECK(subspace_residual(v.separating_pair->w, e(3, 2)) < 1e-12);
}

TEST_CASE("separating_pair examples") {
  BlockPartition two;
  two.basis_kets = {e(2, 0), e(2, 1)};
  two.blocks = {{0}, {1}};
  const SeparatingPair a = separating_pair(two);
  CHECK((a.v - e(2, 0)).norm() == 0.0);
  CHECK((a.w - e(2, 1)).norm() == 0.0);

  Rng rng(3);
  BlockPartition three;
  three.basis_kets = {random_ket(3, rng), random_ket(3, rng), random_ket(3, rng)};
  three.blocks = {{0, 1}, {2}};
  const SeparatingPair b = separating_pair(three);
  CHECK(b.v.cols() == 2);
  CHECK((b.v.col(0) - three.basis_kets[0]).norm() == 0.0);
  CHECK((b.v.col(1) - three.basis_kets[1]).norm() == 0.0);
  CHECK((b.w.col(0) - three.basis_kets[2]).norm() == 0.0);

  const std::vector<Ket> one{e(2, 0)};
  const SeparatingPair c = separating_pair_for_supports(one, 2);
  CHECK(subspace_residual(c.v, e(2, 0)) < 1e-12);
  CHECK(subspace_residual(c.w, e(2, 1)) < 1e-12);

  BlockPartition single;
  single.basis_kets = {e(2, 0), e(2, 1)};
  single.blocks = {{0, 1}};
  try {
    separating_pair(single);
    FAIL("expected SingleBlock");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::SingleBlock);
  }
}

TEST_CASE("nullspace examples") {
  CHECK(totally_determined_nullspace(std::vector<Ket>{e(2, 0), e(2, 1)}, 2) == 2);
  CHECK(totally_determined_nullspace(std::vector<Ket>{e(2, 0), e(2, 1), oracle::ket({s2, s2})}, 2) == 1);
  CHECK(totally_determined_nullspace(std::vector<Ket>{e(2, 0)}, 2) == 3);
  CHECK(totally_determined_nullspace(std::vector<Ket>{}, 3) == 9);
}

TEST_CASE("nullspace agrees with the elimination oracle on random families") {
  Rng rng(12);
  for (int t = 0; t < 300; ++t) {
    const Index d = 2 + t % 4;
    const Povm p = random_quasi_qubit_povm(d, rng);
    const std::vector<Ket> s = supports_of(p);
    CHECK(totally_determined_nullspace(s, d) ==
          static_cast<std::size_t>(oracle::colinear_solution_dim(s, static_cast<int>(d))));
  }
}

TEST_CASE("projective frame examples") {
  CHECK(is_projective_frame(std::vector<Ket>{e(2, 0), e(2, 1), oracle::ket({1, 1})}));
  CHECK_FALSE(is_projective_frame(std::vector<Ket>{e(2, 0), e(2, 1), e(2, 0)}));
  CHECK_FALSE(is_projective_frame(std::vector<Ket>{e(3, 0), e(3, 1), e(3, 2), oracle::ket({1, 1, 0})}));
  try {
    is_projective_frame(std::vector<Ket>{e(2, 0), e(2, 1)});
    FAIL("expected WrongCount");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::WrongCount);
  }
}

TEST_CASE("projective frame routes agree on random inputs") {
  Rng rng(100);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int frames = 0;
  for (int t = 0; t < 1000; ++t) {
    const Index d = 2 + t % 4;
    std::vector<Ket> v;
    for (Index k = 0; k <= d; ++k) v.push_back(random_ket(d, rng));
    // Knock out coordinates or repeat vectors to hit both answers.
    if (u(rng) < 0.3) v[static_cast<std::size_t>(d)](static_cast<Index>(u(rng) * d)) = 0.0;
    if (u(rng) < 0.2) v[1] = v[0];
    const bool a = projective_frame_by_subsets(v);
    const bool b = projective_frame_by_coordinates(v);
    CHECK(a == b);
    frames += a;
  }
  CHECK(frames > 100);
  CHECK(frames < 1000);
}

TEST_CASE("a projective frame of supports makes a POVM clean") {
  Rng rng(44);
  for (int t = 0; t < 50; ++t) {
    const Index d = 2 + t % 4;
    std::vector<Matrix> els;
    Matrix sum = Matrix::Zero(d, d);
    for (Index k = 0; k <= d; ++k) {
      const Matrix pk = 0.5 / static_cast<double>(d + 1) * projector(random_ket(d, rng));
      els.push_back(pk);
      sum += pk;
    }
    els.push_back(identity(d) - sum);
    const CleannessVerdict v = decide_clean(validate(els));
    CHECK(v.clean);
    CHECK(v.reason == VerdictReason::TotallyDetermined);
  }
}

TEST_CASE("verdict agrees with the nullspace oracle") {
  Rng rng(7);
  for (int t = 0; t < 1000; ++t) {
    const Index d = 2 + t % 4;
    const Povm p = random_quasi_qubit_povm(d, rng);
    const CleannessVerdict v = decide_clean(p);
    const bool oracle = classify(p).kind == PovmClass::RankOne ||
                        oracle::colinear_solution_dim(supports_of(p), static_cast<int>(d)) == 1;
    CHECK(v.clean == oracle);
  }
}

TEST_CASE("qubit verdict matches pairwise colinearity") {
  Rng rng(8);
  for (int t = 0; t < 1000; ++t) {
    const Povm p = random_quasi_qubit_povm(2, rng);
    const bool expected = classify(p).kind == PovmClass::RankOne || oracle::three_noncolinear(supports_of(p));
    CHECK(decide_clean(p).clean == expected);
  }
}

TEST_CASE("separating pairs contain every support") {
  Rng rng(9);
  for (int t = 0; t < 500; ++t) {
    const Index d = 2 + t % 4;
    const Povm p = random_quasi_qubit_povm(d, rng);
    const CleannessVerdict v = decide_clean(p);
    if (v.clean || !v.separating_pair) continue;
    CHECK(v.separating_pair->v.cols() + v.separating_pair->w.cols() == d);
    for (const Ket& s : supports_of(p)) {
      const bool inside = subspace_residual(v.separating_pair->v, s) <= 1e-8 ||
                          subspace_residual(v.separating_pair->w, s) <= 1e-8;
      CHECK(inside);
    }
  }
}

TEST_CASE("verdict is invariant under permutation and conjugation") {
  Rng rng(10);
  for (int t = 0; t < 300; ++t) {
    const Index d = 2 + t % 4;
    const Povm p = random_quasi_qubit_povm(d, rng);
    std::vector<std::size_t> order(p.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    const Povm q = conjugate(permute(p, order), random_unitary(d, rng));
    CHECK(decide_clean(p).clean == decide_clean(q).clean);
  }
}

TEST_CASE("verdict reasons respect the clean flag") {
  Rng rng(11);
  for (int t = 0; t < 300; ++t) {
    const Povm p = random_quasi_qubit_povm(2 + t % 4, rng);
    const CleannessVerdict v = decide_clean(p);
    if (v.clean) {
      CHECK((v.reason == VerdictReason::RankOne || v.reason == VerdictReason::TotallyDetermined ||
             v.reason == VerdictReason::TrivialSingleOutcome));
    } else {
      if (v.reason == VerdictReason::PartitionSplit) {
        REQUIRE(v.partition);
        CHECK(v.partition->blocks.size() >= 2);
      }
      if (v.reason != VerdictReason::ScalarElements) CHECK(v.separating_pair.has_value());
    }
  }
}
