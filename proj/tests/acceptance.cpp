// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "cleanpovm/channel.hpp"
#include "cleanpovm/cleanness.hpp"
#include "cleanpovm/povm.hpp"
#include "cleanpovm/witness.hpp"
#include "oracles.hpp"

using namespace cleanpovm;

namespace {

struct Outcome {
  std::size_t trials = 0;
  std::size_t failures = 0;
  std::string note;
};

std::vector<Ket> supports_of(const Povm& p) {
  std::vector<Ket> out;
  for (const auto& s : rank_one_supports(p)) out.push_back(s.support);
  return out;
}

std::pair<double, double> extreme_eigs(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

// Not-clean instances collected by the first two criteria for the third.
std::vector<Povm> not_clean_pool;

Outcome oracle_agreement() {
  Outcome o;
  for (Index d = 2; d <= 5; ++d) {
    Rng rng(derive_seed(1001, static_cast<std::uint64_t>(d)));
    for (int t = 0; t < 1000; ++t) {
      const Povm p = random_quasi_qubit_povm(d, rng);
      const CleannessVerdict v = decide_clean(p);
      const bool expected = classify(p).kind == PovmClass::RankOne ||
                            totally_determined_nullspace(supports_of(p), d, p.tolerances()) == 1;
      ++o.trials;
      if (v.clean != expected) ++o.failures;
      if (!v.clean) not_clean_pool.push_back(p);
    }
  }
  return o;
}

Outcome qubit_closed_form() {
  Outcome o;
  Rng rng(2002);
  for (int t = 0; t < 1000; ++t) {
    const Povm p = random_quasi_qubit_povm(2, rng);
    const CleannessVerdict v = decide_clean(p);
    const bool expected = classify(p).kind == PovmClass::RankOne || oracle::three_noncolinear(supports_of(p));
    ++o.trials;
    if (v.clean != expected) ++o.failures;
    if (!v.clean) not_clean_pool.push_back(p);
  }
  return o;
}

Outcome witness_soundness() {
  Outcome o;
  for (const Povm& p : not_clean_pool) {
    ++o.trials;
    try {
      const Witness w = build_witness(p, decide_clean(p));
      bool ok = true;
      const Index d = p.dim();
      Matrix sum = Matrix::Zero(d, d);
      for (const Matrix& r : w.kraus) sum += r.adjoint() * r;
      ok &= (sum - Matrix::Identity(d, d)).norm() <= 1e-10;
      for (std::size_t i = 0; i < p.size(); ++i) {
        ok &= (oracle::heisenberg(w.kraus, w.q[i]) - p[i].op.matrix()).norm() <= 1e-8;
        const auto [lo, hi] = extreme_eigs(w.q[i]);
        ok &= lo >= -1e-10 * hi;
      }
      const auto [plo, phi] = extreme_eigs(p[w.widened_index].op.matrix());
      const auto [qlo, qhi] = extreme_eigs(w.q[w.widened_index]);
      const double gain = w.direction == WideningDirection::MaxEigIncrease ? qhi - phi : plo - qlo;
      ok &= gain >= 1e-6;
      if (!ok) ++o.failures;
    } catch (const std::exception&) {
      ++o.failures;
    }
  }
  return o;
}

Outcome spectrum_width() {
  Outcome o;
  for (Index d = 2; d <= 4; ++d) {
    Rng rng(derive_seed(4004, static_cast<std::uint64_t>(d)));
    for (int t = 0; t < 1000; ++t) {
      const KrausChannel e = random_unital_channel(d, 1 + static_cast<std::size_t>(t % 5), rng);
      const Matrix x = random_hermitian(d, rng);
      const auto [lo, hi] = extreme_eigs(x);
      const auto [elo, ehi] = extreme_eigs(oracle::heisenberg(e.kraus(), x));
      ++o.trials;
      if (elo < lo - 1e-10 || ehi > hi + 1e-10) ++o.failures;
    }
  }
  return o;
}

Outcome near_identity_bound() {
  Outcome o;
  for (Index d = 2; d <= 3; ++d) {
    Rng rng(derive_seed(5005, static_cast<std::uint64_t>(d)));
    std::uniform_real_distribution<double> u(1e-4, 0.05);
    for (int t = 0; t < 200; ++t) {
      const KrausChannel e = random_near_identity_channel(d, u(rng), 2 + static_cast<std::size_t>(t % 3), rng);
      const double eps = e.identity_distance();
      const double f = 2.0 * (1.0 + std::sqrt(static_cast<double>(d))) * eps + 2.0 * eps * eps;
      const Matrix s = superop_matrix(e.kraus());
      const Eigen::JacobiSVD<Matrix> svd(s - Matrix::Identity(d * d, d * d));
      bool ok = eps > 0.0 && eps <= 0.05 + 1e-12 && svd.singularValues()(0) <= f + 1e-10;
      if (f < 1.0) {
        const Matrix target = random_hermitian(d, rng);
        const Matrix a = superop_solve(s, HermitianOperator(target)).matrix();
        ok &= (oracle::heisenberg(e.kraus(), a) - target).norm() <= 1e-8;
      }
      ++o.trials;
      if (!ok) ++o.failures;
    }
  }
  return o;
}

Outcome case_b_round_trip() {
  Outcome o;
  Rng rng(6006);
  std::uniform_real_distribution<double> u(0.01, 0.9);
  for (Index d = 2; d <= 4; ++d) {
    for (Index k = 1; k < d; ++k) {
      // The construction puts the smaller summand first.
      const Index small = std::min(k, d - k);
      const Index large = d - small;
      for (int t = 0; t < 100; ++t) {
        Matrix a = Matrix::Zero(small, large);
        a.leftCols(small) = Matrix::Identity(small, small);
        a = a * random_unitary(large, rng);
        Matrix m = Matrix::Zero(d, d);
        m.topLeftCorner(small, small) = random_hermitian(small, rng);
        m.bottomRightCorner(large, large) = random_hermitian(large, rng);
        const double eps = u(rng);
        const Matrix back = oracle::heisenberg(case_b::kraus(a, eps), case_b::return_map(m, a, eps));
        ++o.trials;
        if ((back - m).norm() > 1e-10) ++o.failures;
      }
    }
  }
  return o;
}

Outcome worked_case_a() {
  Outcome o;
  o.trials = 1;
  const Povm p = validate({0.5 * Matrix::Identity(2, 2), 0.5 * Matrix::Identity(2, 2)});
  const Witness w = witness_case_a(p);
  bool ok = w.q.size() == 2 && w.kraus.size() == 2;
  if (ok) {
    ok &= w.q[0] == oracle::diag({0.5, 1.0});
    ok &= w.q[1] == oracle::diag({0.5, 0.0});
    ok &= w.kraus[0] == oracle::unit(2, 0, 0);
    ok &= w.kraus[1] == oracle::unit(2, 0, 1);
    for (std::size_t i = 0; i < 2; ++i) {
      ok &= (oracle::heisenberg(w.kraus, w.q[i]) - p[i].op.matrix()).norm() <= 1e-12;
    }
    ok &= extreme_eigs(w.q[0]).second - extreme_eigs(p[0].op.matrix()).second == 0.5;
  }
  if (!ok) o.failures = 1;
  return o;
}

Outcome invariance() {
  Outcome o;
  for (Index d = 2; d <= 4; ++d) {
    Rng rng(derive_seed(8008, static_cast<std::uint64_t>(d)));
    for (int t = 0; t < 200; ++t) {
      const Povm p = random_quasi_qubit_povm(d, rng);
      std::vector<std::size_t> order(p.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::shuffle(order.begin(), order.end(), rng);
      const Povm q = conjugate(permute(p, order), random_unitary(d, rng));
      ++o.trials;
      if (decide_clean(p).clean != decide_clean(q).clean) ++o.failures;
    }
  }
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"AC1", "oracle agreement, d = 2..5", oracle_agreement},
      {"AC2", "qubit closed form", qubit_closed_form},
      {"AC3", "witness soundness", witness_soundness},
      {"AC4", "spectrum-width monotonicity", spectrum_width},
      {"AC5", "near-identity bound and inversion", near_identity_bound},
      {"AC6", "block-diagonal return map round trip", case_b_round_trip},
      {"AC7", "scalar qubit witness", worked_case_a},
      {"AC8", "permutation and unitary invariance", invariance},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.failures = o.trials + 1;
      o.note = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = o.failures == 0 && o.trials > 0;
    failed += !pass;
    std::printf("%s %s: %s (%zu trials, %zu failures, %.2f s)%s%s\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.trials, o.failures, secs, o.note.empty() ? "" : " ", o.note.c_str());
  }
  return failed == 0 ? 0 : 1;
}
