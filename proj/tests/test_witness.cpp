#include <doctest.h>

#include <cmath>
#include <vector>

#include "cleanpovm/channel.hpp"
#include "cleanpovm/cleanness.hpp"
#include "cleanpovm/error.hpp"
#include "cleanpovm/witness.hpp"
#include "oracles.hpp"

using namespace cleanpovm;

namespace {

Matrix projector(const Ket& v) { return v * v.adjoint() / v.squaredNorm(); }

Matrix column(std::initializer_list<Complex> v) { return Matrix(oracle::ket(v)); }

Povm qb_notclean() {
  return validate({oracle::diag({0.25, 0}), oracle::diag({0, 0.25}), oracle::diag({0.75, 0.75})});
}

double max_reproduction_error(const Povm& p, const Witness& w) {
  double worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    worst = std::max(worst, (oracle::heisenberg(w.kraus, w.q[i]) - p[i].op.matrix()).norm());
  }
  return worst;
}

double closure(const std::vector<Matrix>& kraus) {
  Matrix s = Matrix::Zero(kraus.front().cols(), kraus.front().cols());
  for (const Matrix& r : kraus) s += r.adjoint() * r;
  return (s - identity(s.rows())).norm();
}

void check_error(ErrorCode code, const auto& fn) {
  try {
    fn();
    FAIL("expected " << to_string(code));
  } catch (const Error& e) {
    CHECK(e.code() == code);
  }
}

}  // namespace

TEST_CASE("case and direction strings round trip") {
  for (WitnessCase c : {WitnessCase::A, WitnessCase::B, WitnessCase::C, WitnessCase::D}) {
    CHECK(parse_witness_case(to_string(c)) == c);
  }
  for (WideningDirection d : {WideningDirection::MaxEigIncrease, WideningDirection::MinEigDecrease}) {
    CHECK(parse_widening_direction(to_string(d)) == d);
  }
  CHECK(to_string(WitnessCase::D) == "d");
  CHECK_FALSE(parse_witness_case("e"));
  CHECK_FALSE(parse_widening_direction("sideways"));
}

TEST_CASE("case (a) on a qubit") {
  const Povm p = validate({0.5 * identity(2), 0.5 * identity(2)});
  const Witness w = witness_case_a(p);
  CHECK(w.case_tag == WitnessCase::A);
  CHECK(w.epsilon == 0.0);
  CHECK(w.widened_index == 0);
  CHECK(w.direction == WideningDirection::MaxEigIncrease);
  REQUIRE(w.q.size() == 2);
  CHECK((w.q[0] - oracle::diag({0.5, 1.0})).norm() < 1e-15);
  CHECK((w.q[1] - oracle::diag({0.5, 0.0})).norm() < 1e-15);
  REQUIRE(w.kraus.size() == 2);
  CHECK((w.kraus[0] - oracle::unit(2, 0, 0)).norm() == 0.0);
  CHECK((w.kraus[1] - oracle::unit(2, 0, 1)).norm() == 0.0);
  const WitnessReport r = verify_witness(p, w);
  CHECK(r.accepted());
  CHECK(r.widening == doctest::Approx(0.5));
}

TEST_CASE("case (a) in dimension three") {
  const Povm p = validate({identity(3) / 3.0, 2.0 * identity(3) / 3.0});
  const Witness w = witness_case_a(p);
  CHECK((w.q[0] - oracle::diag({1.0 / 3.0, 1.0, 1.0})).norm() < 1e-15);
  CHECK((w.q[1] - oracle::diag({2.0 / 3.0, 0.0, 0.0})).norm() < 1e-15);
  CHECK(w.kraus.size() == 3);
  CHECK(verify_witness(p, w).accepted());
}

TEST_CASE("case (a) errors") {
  check_error(ErrorCode::SingleOutcome, [] { witness_case_a(validate({identity(2)})); });
  check_error(ErrorCode::NotScalar, [] { witness_case_a(qb_notclean()); });
}

TEST_CASE("case (b) on the diagonal qubit POVM") {
  const Povm p = qb_notclean();
  const Witness w = witness_case_b(p, column({1, 0}));
  CHECK(w.case_tag == WitnessCase::B);
  CHECK(w.widened_index == 0);
  CHECK(w.direction == WideningDirection::MaxEigIncrease);
  const double eps = w.epsilon;
  CHECK(eps > 0.0);
  CHECK(eps < 1.0);
  CHECK((w.q[0] - oracle::diag({(1 + eps * eps) * 0.25, 0.0})).norm() < 1e-14);
  CHECK(closure(w.kraus) <= 1e-12);
  CHECK(max_reproduction_error(p, w) <= 1e-12);
  const WitnessReport r = verify_witness(p, w);
  CHECK(r.accepted());
  CHECK(r.widening == doctest::Approx(0.25 * eps * eps));
}

TEST_CASE("case (b) return map inverts the channel on block-diagonal input") {
  Rng rng(21);
  for (int t = 0; t < 100; ++t) {
    const Index k = 1 + t % 2;
    const Index m = k + t % 3;
    const Index d = k + m;
    Matrix a = Matrix::Zero(k, m);
    a.leftCols(k) = identity(k);
    a = a * random_unitary(m, rng);
    const double eps = 0.05 + 0.4 * (t % 5) / 5.0;
    Matrix x = Matrix::Zero(d, d);
    x.topLeftCorner(k, k) = random_hermitian(k, rng);
    x.bottomRightCorner(m, m) = random_hermitian(m, rng);
    const std::vector<Matrix> r = case_b::kraus(a, eps);
    CHECK(closure(r) <= 1e-12);
    CHECK((oracle::heisenberg(r, case_b::return_map(x, a, eps)) - x).norm() <= 1e-12);
  }
}

TEST_CASE("case (c) inverse formula") {
  Matrix m(2, 2);
  m << 0.5, 0.1, 0.1, 0.5;
  const Matrix q = case_c::inverse_formula(m, 1, 0.2);
  CHECK(std::abs(q(0, 1) - 0.1 / 0.96) < 1e-15);
  CHECK(std::abs(q(1, 0) - 0.1 / 0.96) < 1e-15);
  CHECK(q(0, 0) == m(0, 0));
  CHECK(q(1, 1) == m(1, 1));
  const std::vector<Matrix> r = case_c::kraus(1, 2, 0.2);
  CHECK(closure(r) <= 1e-15);
  CHECK((oracle::heisenberg(r, q) - m).norm() <= 1e-15);
}

TEST_CASE("case (c) leaves rank-one elements untouched") {
  // Supports e1 and e2 only; the full-rank elements have off-diagonal blocks.
  Matrix up(2, 2);
  up << 0.3, 0.2, 0.2, 0.25;
  Matrix down(2, 2);
  down << 0.3, -0.2, -0.2, 0.25;
  const Povm p = validate({oracle::diag({0.4, 0}), oracle::diag({0, 0.5}), up, down});
  const Witness w = witness_case_c(p, column({1, 0}));
  CHECK(w.case_tag == WitnessCase::C);
  CHECK(w.direction == WideningDirection::MinEigDecrease);
  CHECK(w.widened_index >= 2);
  CHECK((w.q[0].array() == p[0].op.matrix().array()).all());
  CHECK((w.q[1].array() == p[1].op.matrix().array()).all());
  CHECK(verify_witness(p, w).accepted());

  check_error(ErrorCode::PreconditionViolated, [] { witness_case_c(qb_notclean(), column({1, 0})); });
}

TEST_CASE("case (d) on a qubit") {
  const Matrix plus = 0.3 * projector(oracle::ket({1, 1}));
  const Matrix e1 = 0.3 * oracle::diag({1, 0});
  const Povm p = validate({e1, plus, identity(2) - e1 - plus});
  const Witness w = witness_case_d(p, column({1, 0}), column({1, 1}));
  CHECK(w.case_tag == WitnessCase::D);
  CHECK(w.direction == WideningDirection::MaxEigIncrease);
  CHECK(w.widened_index == 1);
  CHECK(closure(w.kraus) <= 1e-10);
  CHECK(max_reproduction_error(p, w) <= 1e-8);
  const WitnessReport r = verify_witness(p, w);
  CHECK(r.accepted());
  CHECK(r.widening >= kWitnessStrictMargin);

  const CleannessVerdict v = decide_clean(p);
  CHECK_FALSE(v.clean);
  const Witness built = build_witness(p, v);
  CHECK(verify_witness(p, built).accepted());
}

TEST_CASE("case (d) Kraus operators close and approach the identity") {
  Matrix a(1, 1);
  a << 0.7;
  for (double eps : {0.1, 0.05, 0.01}) CHECK(closure(case_d::kraus(a, eps)) <= 1e-10);
  const double c = case_d::radicand_coefficient(0.1);
  CHECK(c == doctest::Approx(0.01 + 1e-4 / 0.99 + 0.01 / (0.99 * 0.99)).epsilon(1e-15));

  double previous = 1.0;
  for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const std::vector<Matrix> r = case_d::kraus(a, eps);
    const double gap = (r[2] - identity(2)).norm();
    CHECK(gap < previous);
    previous = gap;
  }
  CHECK(previous < 1e-6);

  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    const Index k = 1 + t % 2;
    const Index m = k + t % 2;
    Matrix x = random_gaussian(k, m, rng);
    x /= x.norm();
    CHECK(closure(case_d::kraus(x, 0.02 + 0.01 * (t % 5))) <= 1e-10);
  }

  Matrix big(1, 1);
  big << 100.0;
  check_error(ErrorCode::NotPsd, [&] { case_d::b_matrix(big, 0.5); });
}

TEST_CASE("tampered witnesses are rejected") {
  const Povm p = qb_notclean();
  const Witness good = build_witness(p, decide_clean(p));
  REQUIRE(verify_witness(p, good).accepted());

  Witness shifted = good;
  shifted.q[shifted.widened_index] += 1e-3 * identity(2);
  shifted.q[(shifted.widened_index + 1) % 3] -= 1e-3 * identity(2);
  const WitnessReport bad = verify_witness(p, shifted);
  CHECK_FALSE(bad.accepted());
  CHECK_FALSE(bad.reproduces_p);

  Witness truncated = good;
  truncated.kraus.pop_back();
  const WitnessReport cut = verify_witness(p, truncated);
  CHECK_FALSE(cut.accepted());
  CHECK_FALSE(cut.channel_unital);

  Witness negative = good;
  negative.q[0] = -negative.q[0];
  CHECK_FALSE(verify_witness(p, negative).q_valid);

  Witness flat = good;
  flat.widened_index = 2;
  flat.direction = WideningDirection::MaxEigIncrease;
  flat.q = std::vector<Matrix>{p[0].op.matrix(), p[1].op.matrix(), p[2].op.matrix()};
  flat.kraus = {identity(2)};
  CHECK_FALSE(verify_witness(p, flat).strictly_widened);

  Witness wrong_count = good;
  wrong_count.q.pop_back();
  check_error(ErrorCode::DimensionMismatch, [&] { verify_witness(p, wrong_count); });
  Witness wrong_dim = good;
  for (Matrix& q : wrong_dim.q) q = identity(3) / 3.0;
  check_error(ErrorCode::DimensionMismatch, [&] { verify_witness(p, wrong_dim); });
}

TEST_CASE("build_witness refuses clean POVMs") {
  const Povm p = validate({0.5 * oracle::diag({1, 0}), 0.5 * oracle::diag({0, 1}),
                           0.5 * projector(oracle::ket({1, 1})), 0.5 * projector(oracle::ket({1, -1}))});
  const CleannessVerdict v = decide_clean(p);
  REQUIRE(v.clean);
  check_error(ErrorCode::VerdictIsClean, [&] { build_witness(p, v); });
}

TEST_CASE("witnesses are sound on random not-clean POVMs") {
  Rng rng(77);
  int cases[4] = {0, 0, 0, 0};
  for (Index d = 2; d <= 4; ++d) {
    int built = 0;
    for (int t = 0; t < 5000 && built < 500; ++t) {
      const Povm p = random_quasi_qubit_povm(d, rng);
      const CleannessVerdict v = decide_clean(p);
      if (v.clean) continue;
      ++built;
      const Witness w = build_witness(p, v);
      const WitnessReport r = verify_witness(p, w);
      CHECK(r.accepted());
      CHECK(r.closure_residual <= 1e-10);
      CHECK(max_reproduction_error(p, w) <= 1e-8);
      ++cases[static_cast<int>(w.case_tag)];

      const KrausChannel e = KrausChannel::make(w.kraus);
      for (const Matrix& q : w.q) CHECK(spectrum_width_check(e, HermitianOperator(hermitize(q))).ok);
    }
    CHECK(built == 500);
  }
  for (int c : cases) CHECK(c > 0);
}

TEST_CASE("case (b) round trip on random block-diagonal POVMs") {
  Rng rng(88);
  for (int t = 0; t < 100; ++t) {
    const Index k = 1 + t % 2;
    const Index d = 2 * k + t % 2;
    const Matrix u = random_unitary(d, rng);
    const Ket s = u.col(0);
    Matrix full_v = Matrix::Zero(d, d);
    Matrix full_p = Matrix::Zero(d, d);
    full_v.topLeftCorner(k, k) = random_hermitian(k, rng);
    full_p.bottomRightCorner(d - k, d - k) = random_hermitian(d - k, rng);
    Matrix block = full_v + full_p;
    const double lo = eig_hermitian(block).values.minCoeff();
    const double hi = eig_hermitian(block).values.maxCoeff();
    block = (block - lo * identity(d)) / (hi - lo) * 0.5 + 0.1 * identity(d);
    const Matrix p0 = 0.2 * s * s.adjoint();
    const Matrix p1 = u * block * u.adjoint();
    const Povm p = validate({p0, p1, identity(d) - p0 - p1});
    const Witness w = witness_case_b(p, u.leftCols(k));
    CHECK(verify_witness(p, w).accepted());
    CHECK(max_reproduction_error(p, w) <= 1e-10);
  }
}
