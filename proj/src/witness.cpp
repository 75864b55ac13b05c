#include "cleanpovm/witness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cleanpovm/channel.hpp"
#include "cleanpovm/error.hpp"

namespace cleanpovm {

namespace {

constexpr double kStartEpsilon = 0.25;
constexpr int kMaxHalvings = 40;
constexpr double kStrictC = 1e-9;

// Unitary whose first k columns span V.
struct Frame {
  Matrix u;
  Index k = 0;

  Index d() const { return u.rows(); }
  Index m() const { return d() - k; }
  Matrix qv() const { return u.leftCols(k); }
  Matrix qp() const { return u.rightCols(m()); }
  Matrix to(const Matrix& a) const { return u.adjoint() * a * u; }
  Matrix from(const Matrix& a) const { return u * a * u.adjoint(); }
};

Frame frame_for(const Matrix& v) {
  if (v.cols() == 0 || v.cols() >= v.rows()) {
    throw Error(ErrorCode::PreconditionViolated, "V must be a proper nonzero subspace");
  }
  Eigen::HouseholderQR<Matrix> qr(v);
  Frame f;
  f.u = qr.householderQ() * identity(v.rows());
  f.k = v.cols();
  return f;
}

double off_block_norm(const Frame& f, const Matrix& a) {
  return f.to(a).topRightCorner(f.k, f.m()).norm();
}

bool block_diagonal(const Frame& f, const Matrix& a, const Tolerances& tol) {
  return off_block_norm(f, a) <= tol.zero * std::max(1.0, a.norm());
}

bool in_span(const Matrix& orthonormal, const Ket& psi, const Tolerances& tol) {
  return (psi - orthonormal * (orthonormal.adjoint() * psi)).norm() <= tol.zero * psi.norm();
}

std::vector<Matrix> kraus_from_adapted(const Frame& f, const std::vector<Matrix>& adapted) {
  std::vector<Matrix> out;
  out.reserve(adapted.size());
  for (const Matrix& r : adapted) out.push_back(f.from(r));
  return out;
}

double lambda_min(const Matrix& a) { return eig_hermitian(hermitize(a)).values(0); }

double lambda_max(const Matrix& a) {
  const RealVector v = eig_hermitian(hermitize(a)).values;
  return v(v.size() - 1);
}

bool positive_enough(const Matrix& a, const Tolerances& tol) {
  const RealVector v = eig_hermitian(hermitize(a)).values;
  return v(0) >= tol.psd * v(v.size() - 1);
}

std::vector<RankOneSupport> supports_of(const Povm& p) { return rank_one_supports(p); }

std::vector<std::size_t> full_rank_indices(const Povm& p) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i].rank == p.dim()) out.push_back(i);
  }
  return out;
}

}  // namespace

std::string_view to_string(WitnessCase c) {
  switch (c) {
    case WitnessCase::A: return "a";
    case WitnessCase::B: return "b";
    case WitnessCase::C: return "c";
    case WitnessCase::D: return "d";
  }
  return "?";
}

std::string_view to_string(WideningDirection d) {
  return d == WideningDirection::MaxEigIncrease ? "max-eig-increase" : "min-eig-decrease";
}

std::optional<WitnessCase> parse_witness_case(std::string_view s) {
  if (s == "a") return WitnessCase::A;
  if (s == "b") return WitnessCase::B;
  if (s == "c") return WitnessCase::C;
  if (s == "d") return WitnessCase::D;
  return std::nullopt;
}

std::optional<WideningDirection> parse_widening_direction(std::string_view s) {
  if (s == "max-eig-increase") return WideningDirection::MaxEigIncrease;
  if (s == "min-eig-decrease") return WideningDirection::MinEigDecrease;
  return std::nullopt;
}

namespace case_b {

std::vector<Matrix> kraus(const Matrix& a, double eps) {
  const Index k = a.rows();
  const Index m = a.cols();
  const Index d = k + m;
  const double e2 = eps * eps;
  const double den = 1.0 + e2;
  const Matrix ik = identity(k);
  const Matrix im = identity(m);

  // X_a = R_a^dagger in block form over V + V^perp.
  Matrix x1 = Matrix::Zero(d, d);
  x1.topLeftCorner(k, k) = std::sqrt(e2 / den) * ik;
  x1.topRightCorner(k, m) = std::sqrt(e2 * e2 / den) * a;
  x1.bottomRightCorner(m, m) = std::sqrt((1.0 - e2) / den) * im;

  Matrix x2 = Matrix::Zero(d, d);
  x2.bottomRightCorner(m, m) = std::sqrt(e2 / den) * im;

  Matrix x3 = Matrix::Zero(d, d);
  x3.topLeftCorner(k, k) = std::sqrt((1.0 - e2) / den) * ik;
  x3.topRightCorner(k, m) = std::sqrt((e2 - e2 * e2) / den) * a;
  x3.bottomRightCorner(m, m) = -std::sqrt(e2 / den) * im;

  return {x1.adjoint(), x2.adjoint(), x3.adjoint()};
}

Matrix return_map(const Matrix& mat, const Matrix& a, double eps) {
  const Index k = a.rows();
  const Index m = a.cols();
  const double e2 = eps * eps;
  const Matrix b = mat.topLeftCorner(k, k);
  const Matrix dd = mat.bottomRightCorner(m, m);
  Matrix out(k + m, k + m);
  out.topLeftCorner(k, k) = (1.0 + e2) * b + e2 * a * dd * a.adjoint();
  out.topRightCorner(k, m) = -eps * a * dd;
  out.bottomLeftCorner(m, k) = -eps * dd * a.adjoint();
  out.bottomRightCorner(m, m) = dd;
  return out;
}

}  // namespace case_b

namespace case_c {

std::vector<Matrix> kraus(Index dim_v, Index d, double eps) {
  Matrix pv = Matrix::Zero(d, d);
  pv.topLeftCorner(dim_v, dim_v) = identity(dim_v);
  const Matrix pp = identity(d) - pv;
  return {eps * pv, eps * pp, std::sqrt(1.0 - eps * eps) * identity(d)};
}

Matrix inverse_formula(const Matrix& mat, Index dim_v, double eps) {
  const Index m = mat.rows() - dim_v;
  const double s = 1.0 / (1.0 - eps * eps);
  Matrix out = mat;
  out.topRightCorner(dim_v, m) *= s;
  out.bottomLeftCorner(m, dim_v) *= s;
  return out;
}

}  // namespace case_c

namespace case_d {

double radicand_coefficient(double eps) {
  const double e2 = eps * eps;
  const double c = 1.0 - e2;
  return e2 + e2 * e2 / c + e2 / (c * c);
}

Matrix b_matrix(const Matrix& a, double eps) {
  const Index k = a.rows();
  const HermitianOperator radicand(identity(k) - radicand_coefficient(eps) * a * a.adjoint());
  if (radicand.min_eigenvalue() <= 0.0) {
    throw Error(ErrorCode::NotPsd, "1 - c(eps) A A^dagger is not positive definite");
  }
  return psd_sqrt(radicand).matrix();
}

std::vector<Matrix> kraus(const Matrix& a, double eps) {
  const Index k = a.rows();
  const Index m = a.cols();
  const Index d = k + m;
  const double e2 = eps * eps;
  const double c = 1.0 - e2;
  const Matrix b = b_matrix(a, eps);

  Matrix x1 = Matrix::Zero(d, d);
  x1.topLeftCorner(k, k) = eps * b;
  x1.topRightCorner(k, m) = -eps / c * a;

  Matrix x2 = Matrix::Zero(d, d);
  x2.topRightCorner(k, m) = eps * a;
  x2.bottomRightCorner(m, m) = eps * identity(m);

  Matrix x3 = Matrix::Zero(d, d);
  x3.topLeftCorner(k, k) = std::sqrt(c) * b;
  x3.topRightCorner(k, m) = -e2 / std::sqrt(c) * a;
  x3.bottomRightCorner(m, m) = std::sqrt(c) * identity(m);

  return {x1.adjoint(), x2.adjoint(), x3.adjoint()};
}

}  // namespace case_d

Witness witness_case_a(const Povm& p) {
  if (p.size() < 2) throw Error(ErrorCode::SingleOutcome, "case (a) needs at least two outcomes");
  const Tolerances& tol = p.tolerances();
  const Index d = p.dim();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!is_scalar_element(p[i], tol)) throw Error(ErrorCode::NotScalar, "element is not mu * 1", i);
  }
  Witness w;
  w.case_tag = WitnessCase::A;
  w.epsilon = 0.0;
  w.widened_index = 0;
  w.direction = WideningDirection::MaxEigIncrease;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double mu = p[i].op.matrix().trace().real() / static_cast<double>(d);
    Matrix q = Matrix::Zero(d, d);
    q(0, 0) = mu;
    if (i == 0) {
      for (Index j = 1; j < d; ++j) q(j, j) = 1.0;
    }
    w.q.push_back(q);
  }
  for (Index alpha = 0; alpha < d; ++alpha) {
    Matrix r = Matrix::Zero(d, d);
    r(0, alpha) = 1.0;
    w.kraus.push_back(r);
  }
  return w;
}

Witness witness_case_b(const Povm& p, const Matrix& v_in) {
  const Tolerances& tol = p.tolerances();
  Frame f = frame_for(v_in);
  if (f.k > f.m()) {
    // Work with the smaller of V and V^perp.
    Matrix u(f.d(), f.d());
    u << f.qp(), f.qv();
    f.k = f.m();
    f.u = u;
  }
  const Index k = f.k;
  const Index m = f.m();

  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!block_diagonal(f, p[i].op.matrix(), tol)) {
      throw Error(ErrorCode::PreconditionViolated, "element is not block diagonal", i);
    }
  }
  const std::vector<RankOneSupport> supports = supports_of(p);
  const std::vector<std::size_t> full = full_rank_indices(p);
  if (supports.empty() || full.empty()) {
    throw Error(ErrorCode::PreconditionViolated, "case (b) needs rank-one and full-rank elements");
  }

  const Matrix qv = f.qv();
  const Matrix qp = f.qp();
  const RankOneSupport* in_v = nullptr;
  const RankOneSupport* in_perp = nullptr;
  for (const auto& s : supports) {
    if (in_span(qv, s.support, tol)) {
      if (!in_v || s.weight > in_v->weight) in_v = &s;
    } else if (in_span(qp, s.support, tol)) {
      if (!in_perp || s.weight > in_perp->weight) in_perp = &s;
    } else {
      throw Error(ErrorCode::PreconditionViolated, "support in neither V nor V^perp", s.index);
    }
  }

  Matrix a = Matrix::Zero(k, m);
  a.leftCols(k) = identity(k);
  const RankOneSupport* widened = in_v;
  if (!widened) {
    widened = in_perp;
    // Extend w0 to an orthonormal basis of V^perp so that A w0 = e1.
    const Ket w0 = qp.adjoint() * in_perp->support;
    Eigen::HouseholderQR<Matrix> qr(Matrix(w0 / w0.norm()));
    Matrix basis = qr.householderQ() * identity(m);
    basis.col(0) = w0 / w0.norm();
    basis = orthonormalize(basis);
    a = a * basis.adjoint();
  }

  std::size_t anchor = full.front();
  for (std::size_t i : full) {
    if (p[i].op.min_eigenvalue() > p[anchor].op.min_eigenvalue()) anchor = i;
  }

  std::vector<Matrix> adapted(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) adapted[i] = f.to(p[i].op.matrix());

  double eps = kStartEpsilon;
  std::vector<Matrix> q(p.size());
  bool found = false;
  for (int iter = 0; iter <= kMaxHalvings; ++iter, eps /= 2.0) {
    Matrix rest = identity(f.d());
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (i == anchor) continue;
      q[i] = case_b::return_map(adapted[i], a, eps);
      rest -= q[i];
    }
    q[anchor] = rest;
    if (positive_enough(rest, tol)) {
      found = true;
      break;
    }
  }
  if (!found) throw Error(ErrorCode::EpsilonSearchFailed, "case (b): Q_1 never became positive");

  Witness w;
  w.case_tag = WitnessCase::B;
  w.epsilon = eps;
  w.widened_index = widened->index;
  w.direction = WideningDirection::MaxEigIncrease;
  for (const Matrix& qa : q) w.q.push_back(hermitize(f.from(qa)));
  w.kraus = kraus_from_adapted(f, case_b::kraus(a, eps));

  const double gain = lambda_max(w.q[w.widened_index]) - p[w.widened_index].op.max_eigenvalue();
  if (gain < kWitnessStrictMargin) {
    throw Error(ErrorCode::ConstructionFailed,
                "case (b): widening " + std::to_string(gain) + " below margin", w.widened_index);
  }
  return w;
}

Witness witness_case_c(const Povm& p, const Matrix& v_in) {
  const Tolerances& tol = p.tolerances();
  const Frame f = frame_for(v_in);
  const Index k = f.k;
  const Matrix qv = f.qv();
  const Matrix qp = f.qp();
  for (const auto& s : supports_of(p)) {
    if (!in_span(qv, s.support, tol) && !in_span(qp, s.support, tol)) {
      throw Error(ErrorCode::PreconditionViolated, "support in neither V nor V^perp", s.index);
    }
  }
  const std::vector<std::size_t> full = full_rank_indices(p);
  std::vector<Matrix> adapted(p.size());
  bool mixed = false;
  for (std::size_t i : full) {
    adapted[i] = f.to(p[i].op.matrix());
    if (!block_diagonal(f, p[i].op.matrix(), tol)) mixed = true;
  }
  if (!mixed) throw Error(ErrorCode::PreconditionViolated, "no element has an off-diagonal block");

  // Scaling the off-diagonal blocks by 1 + t, t = eps^2 / (1 - eps^2).
  auto scaled = [&](std::size_t i, double t) {
    Matrix out = adapted[i];
    out.topRightCorner(k, f.m()) *= 1.0 + t;
    out.bottomLeftCorner(f.m(), k) *= 1.0 + t;
    return out;
  };
  // g is concave in t: a minimum of minimum eigenvalues of affine families.
  auto g = [&](double t) {
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i : full) lo = std::min(lo, lambda_min(scaled(i, t)));
    return lo;
  };

  const double g0 = g(0.0);
  for (double fraction : {0.5, 0.01}) {
    const double target = fraction * g0;
    double lo = 0.0;
    double hi = 0.0;
    for (double t = 1e-3; t < 1e12; t *= 2.0) {
      if (g(t) < target) {
        hi = t;
        break;
      }
      lo = t;
    }
    if (hi == 0.0) continue;
    for (int iter = 0; iter < 200 && hi - lo > 1e-15 * hi; ++iter) {
      const double mid = 0.5 * (lo + hi);
      (g(mid) < target ? hi : lo) = mid;
    }
    const double t = lo;
    const double eps = std::sqrt(t / (1.0 + t));

    std::size_t widened = full.front();
    double best = -std::numeric_limits<double>::infinity();
    std::vector<Matrix> q(p.size());
    bool positive = true;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i].rank_one) {
        q[i] = p[i].op.matrix();
        continue;
      }
      const Matrix qa = case_c::inverse_formula(adapted[i], k, eps);
      q[i] = hermitize(f.from(qa));
      if (!positive_enough(q[i], tol)) positive = false;
      const double drop = p[i].op.min_eigenvalue() - lambda_min(q[i]);
      if (drop > best) {
        best = drop;
        widened = i;
      }
    }
    if (!positive || best < kWitnessStrictMargin) continue;

    Witness w;
    w.case_tag = WitnessCase::C;
    w.epsilon = eps;
    w.widened_index = widened;
    w.direction = WideningDirection::MinEigDecrease;
    w.q = std::move(q);
    w.kraus = kraus_from_adapted(f, case_c::kraus(k, f.d(), eps));
    return w;
  }
  throw Error(ErrorCode::EpsilonSearchFailed, "case (c): no eps with a strict decrease");
}

Witness witness_case_d(const Povm& p, const Matrix& v_in, const Matrix& w_in) {
  const Tolerances& tol = p.tolerances();
  const Index d = p.dim();
  Frame f = frame_for(v_in);
  const Index k = f.k;
  const Index m = f.m();
  if (w_in.rows() != d || w_in.cols() != m) {
    throw Error(ErrorCode::PreconditionViolated, "W is not a supplement of V");
  }
  const Matrix wa = f.qv().adjoint() * w_in;
  const Matrix wb = f.qp().adjoint() * w_in;
  const Eigen::JacobiSVD<Matrix> wb_svd(wb);
  const RealVector wsv = wb_svd.singularValues();
  if (wsv(m - 1) <= tol.rank * wsv(0)) {
    throw Error(ErrorCode::PreconditionViolated, "V and W are not supplementary");
  }
  // W = range [[A0], [1]] in the adapted frame. Rotate both blocks so that A
  // is diagonal and the columns of [[A], [1]] are orthogonal.
  const Matrix a0 = wa * wb.fullPivLu().inverse();
  const Eigen::JacobiSVD<Matrix> svd(a0, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix u(d, d);
  u << f.qv() * svd.matrixU(), f.qp() * svd.matrixV();
  f.u = u;
  Matrix a = Matrix::Zero(k, m);
  for (Index j = 0; j < svd.singularValues().size(); ++j) a(j, j) = svd.singularValues()(j);

  const Matrix qv = f.qv();
  const Matrix qp = f.qp();
  const std::vector<RankOneSupport> supports = supports_of(p);
  std::vector<const RankOneSupport*> eligible;
  for (const auto& s : supports) {
    const bool in_v = in_span(qv, s.support, tol);
    const bool in_w = subspace_residual(w_in, s.support) <= tol.zero;
    if (!in_v && !in_w) throw Error(ErrorCode::PreconditionViolated, "support in neither V nor W", s.index);
    if (in_w && !in_span(qp, s.support, tol)) eligible.push_back(&s);
  }
  if (eligible.empty()) {
    throw Error(ErrorCode::PreconditionViolated, "no support in W outside V^perp");
  }

  double eps = kStartEpsilon;
  for (int iter = 0; iter <= kMaxHalvings; ++iter, eps /= 2.0) {
    std::vector<Matrix> adapted_kraus;
    try {
      adapted_kraus = case_d::kraus(a, eps);
    } catch (const Error&) {
      continue;
    }
    const KrausChannel channel = KrausChannel::make(kraus_from_adapted(f, adapted_kraus), tol);
    std::optional<PositiveMapInverse> inverse;
    try {
      inverse.emplace(invert_positive_map(channel));
    } catch (const Error&) {
      continue;
    }
    const Matrix x3 = f.from(adapted_kraus[2].adjoint());
    const Eigen::FullPivLU<Matrix> x3_lu(x3);

    std::vector<Matrix> q(p.size());
    std::vector<double> c_value(p.size(), 1.0);
    bool ok = true;
    for (std::size_t i = 0; i < p.size() && ok; ++i) {
      const Matrix& target = p[i].op.matrix();
      Matrix solved;
      try {
        solved = inverse->solve(target);
      } catch (const Error&) {
        ok = false;
        break;
      }
      if (!p[i].rank_one) {
        if (!positive_enough(solved, tol)) ok = false;
        q[i] = solved;
        continue;
      }
      const RankOneData& r1 = *p[i].rank_one;
      Ket phi = x3_lu.solve(r1.support);
      phi /= phi.norm();
      const Matrix proj = phi * phi.adjoint();
      const double c = (r1.support.adjoint() * channel.apply(proj) * r1.support)(0, 0).real();
      q[i] = (r1.weight / c) * proj;
      c_value[i] = c;
      const double gap = (q[i] - solved).norm();
      if (gap > 1e-8 * std::max(1.0, q[i].norm())) {
        throw Error(ErrorCode::ConstructionFailed,
                    "case (d): rank-one formula and solve differ by " + std::to_string(gap), i);
      }
    }
    if (!ok) continue;

    const RankOneSupport* widened = nullptr;
    double gain = 0.0;
    for (const RankOneSupport* s : eligible) {
      const double c = c_value[s->index];
      if (c >= 1.0 - kStrictC) continue;
      const double g = s->weight / c - s->weight;
      if (!widened || g > gain) {
        widened = s;
        gain = g;
      }
    }
    if (!widened || gain < kWitnessStrictMargin) {
      throw Error(ErrorCode::ConstructionFailed,
                  "case (d): widening " + std::to_string(gain) + " below margin");
    }
    Witness w;
    w.case_tag = WitnessCase::D;
    w.epsilon = eps;
    w.widened_index = widened->index;
    w.direction = WideningDirection::MaxEigIncrease;
    w.q = std::move(q);
    w.kraus = channel.kraus();
    return w;
  }
  throw Error(ErrorCode::EpsilonSearchFailed, "case (d): no admissible eps");
}

Witness build_witness(const Povm& p, const CleannessVerdict& verdict) {
  if (verdict.clean) throw Error(ErrorCode::VerdictIsClean, "no witness exists for a clean POVM");
  if (verdict.reason == VerdictReason::ScalarElements) return witness_case_a(p);
  if (!verdict.separating_pair) {
    throw Error(ErrorCode::PreconditionViolated, "verdict carries no separating pair");
  }
  const Tolerances& tol = p.tolerances();
  const SeparatingPair& pair = *verdict.separating_pair;
  const Frame f = frame_for(pair.v);
  const Matrix qv = f.qv();
  const Matrix qp = f.qp();
  const std::vector<RankOneSupport> supports = supports_of(p);

  bool orthogonal_split = true;
  for (const auto& s : supports) {
    if (!in_span(qv, s.support, tol) && !in_span(qp, s.support, tol)) orthogonal_split = false;
  }
  if (orthogonal_split) {
    bool all_block = true;
    for (const auto& el : p.elements()) {
      if (!block_diagonal(f, el.op.matrix(), tol)) all_block = false;
    }
    if (!supports.empty() && all_block) return witness_case_b(p, pair.v);
    return witness_case_c(p, pair.v);
  }
  try {
    return witness_case_d(p, pair.v, pair.w);
  } catch (const Error& first) {
    if (first.code() == ErrorCode::VerdictIsClean) throw;
    try {
      return witness_case_d(p, pair.w, pair.v);
    } catch (const Error&) {
      throw first;
    }
  }
}

WitnessReport verify_witness(const Povm& p, const Witness& w) {
  const Index d = p.dim();
  if (w.q.size() != p.size()) throw Error(ErrorCode::DimensionMismatch, "outcome counts differ");
  for (const Matrix& q : w.q) {
    if (q.rows() != d || q.cols() != d) throw Error(ErrorCode::DimensionMismatch, "Q dimension");
  }
  for (const Matrix& r : w.kraus) {
    if (r.rows() != d || r.cols() != d) throw Error(ErrorCode::DimensionMismatch, "Kraus dimension");
  }

  WitnessReport report;
  try {
    validate(w.q, p.tolerances());
    report.q_valid = true;
  } catch (const Error& e) {
    report.q_error = e.what();
  }

  if (w.kraus.empty()) {
    report.closure_residual = std::numeric_limits<double>::infinity();
    report.max_residual = std::numeric_limits<double>::infinity();
    return report;
  }
  const KrausChannel channel = KrausChannel::unchecked(w.kraus);
  report.closure_residual = channel.closure_residual();
  report.channel_unital = report.closure_residual <= p.tolerances().closure;

  for (std::size_t i = 0; i < p.size(); ++i) {
    const double r = (channel.apply(w.q[i]) - p[i].op.matrix()).norm();
    report.max_residual = std::max(report.max_residual, r);
  }
  report.reproduces_p = report.max_residual <= kWitnessChannelResidual;

  if (w.widened_index < p.size() && w.q[w.widened_index].allFinite()) {
    const Matrix& q = w.q[w.widened_index];
    const HermitianOperator& pw = p[w.widened_index].op;
    report.widening = w.direction == WideningDirection::MaxEigIncrease
                          ? lambda_max(q) - pw.max_eigenvalue()
                          : pw.min_eigenvalue() - lambda_min(q);
    report.strictly_widened = report.widening >= kWitnessStrictMargin;
  }
  return report;
}

}  // namespace cleanpovm
