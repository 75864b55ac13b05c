#include "cleanpovm/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cleanpovm/error.hpp"

namespace cleanpovm {

namespace {

constexpr double kRoundTripTolerance = 1e-8;
constexpr double kMaxCondition = 1e12;

}  // namespace

KrausChannel KrausChannel::unchecked(std::vector<Matrix> kraus) {
  if (kraus.empty()) throw Error(ErrorCode::DimensionMismatch, "empty Kraus list");
  KrausChannel e;
  e.dim_ = kraus.front().rows();
  for (const Matrix& r : kraus) {
    if (r.rows() != e.dim_ || r.cols() != e.dim_) {
      throw Error(ErrorCode::DimensionMismatch, "Kraus operators must all be d x d");
    }
    if (!r.allFinite()) throw Error(ErrorCode::NonFinite, "Kraus operator has NaN or Inf");
  }
  e.kraus_ = std::move(kraus);
  return e;
}

KrausChannel KrausChannel::make(std::vector<Matrix> kraus, const Tolerances& tol) {
  KrausChannel e = unchecked(std::move(kraus));
  const double residual = e.closure_residual();
  if (residual > tol.closure) {
    throw Error(ErrorCode::ClosureViolation,
                "||sum R^dagger R - 1||_HS = " + std::to_string(residual));
  }
  return e;
}

double KrausChannel::closure_residual() const {
  Matrix sum = Matrix::Zero(dim_, dim_);
  for (const Matrix& r : kraus_) sum += r.adjoint() * r;
  return (sum - identity(dim_)).norm();
}

Matrix KrausChannel::apply(const Matrix& a) const {
  if (a.rows() != dim_ || a.cols() != dim_) throw Error(ErrorCode::DimensionMismatch, "operator dimension");
  Matrix out = Matrix::Zero(dim_, dim_);
  for (const Matrix& r : kraus_) out += r.adjoint() * a * r;
  return out;
}

Matrix KrausChannel::superop() const { return superop_matrix(kraus_); }

double KrausChannel::identity_distance() const {
  double best = std::numeric_limits<double>::infinity();
  for (const Matrix& r : kraus_) best = std::min(best, (identity(dim_) - r).norm());
  return best;
}

HermitianOperator apply(const KrausChannel& e, const HermitianOperator& a, const Tolerances& tol) {
  return HermitianOperator(hermitize(e.apply(a.matrix())), tol);
}

Povm apply_to_povm(const KrausChannel& e, const Povm& q) {
  if (e.dim() != q.dim()) throw Error(ErrorCode::DimensionMismatch, "channel and POVM dimension");
  std::vector<Matrix> out;
  for (const auto& el : q.elements()) out.push_back(hermitize(e.apply(el.op.matrix())));
  return validate(std::move(out), q.tolerances(), q.labels());
}

double induced_norm(const Matrix& superop) {
  return Eigen::BDCSVD<Matrix>(superop).singularValues()(0);
}

NearIdentityBound f_bound(double epsilon, Index d) {
  NearIdentityBound b;
  b.epsilon = epsilon;
  b.f_eps = 2.0 * (1.0 + std::sqrt(static_cast<double>(d))) * epsilon + 2.0 * epsilon * epsilon;
  if (b.f_eps < 1.0) b.inverse_norm_bound = b.f_eps / (1.0 - b.f_eps);
  return b;
}

Matrix PositiveMapInverse::solve(const Matrix& b) const {
  const Matrix a = hermitize(solver_.solve_raw(b));
  const Index d = solver_.dim();
  const Matrix back = unvec_row_major(solver_.superop() * vec_row_major(a), d);
  const double residual = (back - b).norm();
  if (residual > kRoundTripTolerance * std::max(1.0, b.norm())) {
    throw Error(ErrorCode::SingularSuperop, "round-trip residual " + std::to_string(residual));
  }
  return a;
}

PositiveMapInverse invert_positive_map(const KrausChannel& e) {
  const NearIdentityBound bound = f_bound(e.identity_distance(), e.dim());
  const bool certified = bound.f_eps < 1.0;
  // A certified channel has sigma_min >= 1 - f > 0, so the solver's own rank
  // test only matters for uncertified ones.
  SuperopSolver solver(e.superop(), certified ? 0.0 : 1.0 / kMaxCondition);
  std::optional<NearIdentityBound> cert;
  if (certified) cert = bound;
  return PositiveMapInverse(std::move(solver), cert);
}

double min_eig_lower_bound(const HermitianOperator& x, double epsilon, Index d) {
  const NearIdentityBound b = f_bound(epsilon, d);
  if (!b.inverse_norm_bound) throw Error(ErrorCode::BoundUnavailable, "f(eps) >= 1");
  if (x.min_eigenvalue() < 0.0) {
    throw Error(ErrorCode::PreconditionViolated, "operator is not positive semidefinite");
  }
  return x.min_eigenvalue() -
         x.max_eigenvalue() * b.f_eps * std::sqrt(static_cast<double>(d)) / (1.0 - b.f_eps);
}

SpectrumWidthReport spectrum_width_check(const KrausChannel& e, const HermitianOperator& x,
                                         const Tolerances& tol) {
  const HermitianOperator y = apply(e, x, tol);
  SpectrumWidthReport r;
  r.min_before = x.min_eigenvalue();
  r.max_before = x.max_eigenvalue();
  r.min_after = y.min_eigenvalue();
  r.max_after = y.max_eigenvalue();
  r.ok = r.min_after >= r.min_before - tol.eig && r.max_after <= r.max_before + tol.eig;
  return r;
}

KrausChannel random_unital_channel(Index d, std::size_t num_kraus, Rng& rng) {
  if (num_kraus < 1) throw Error(ErrorCode::InfeasibleRequest, "need at least one Kraus operator");
  const auto k = static_cast<Index>(num_kraus);
  const Matrix g = random_gaussian(k * d, d, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  const Matrix iso = qr.householderQ() * Matrix::Identity(k * d, d);
  std::vector<Matrix> kraus;
  for (Index a = 0; a < k; ++a) kraus.push_back(iso.middleRows(a * d, d));
  return KrausChannel::make(std::move(kraus));
}

KrausChannel random_near_identity_channel(Index d, double epsilon, std::size_t num_kraus,
                                          Rng& rng) {
  if (num_kraus < 2) throw Error(ErrorCode::InfeasibleRequest, "need at least two Kraus operators");
  Matrix g = random_gaussian(d, d, rng);
  g *= epsilon / g.norm();
  Matrix r1;
  // Shrinking to a contraction moves R_1; rescale until the distance is <= epsilon.
  for (int iter = 0; iter < 64; ++iter) {
    r1 = identity(d) + g;
    const double top = Eigen::JacobiSVD<Matrix>(r1).singularValues()(0);
    if (top > 1.0) r1 /= top;
    const double dist = (identity(d) - r1).norm();
    if (dist <= epsilon) break;
    g *= 0.99 * epsilon / dist;
  }
  const HermitianOperator rest(identity(d) - r1.adjoint() * r1);
  const Matrix root = psd_sqrt(rest).matrix();
  std::vector<Matrix> kraus{r1};
  std::vector<double> w(num_kraus - 1);
  std::uniform_real_distribution<double> uni(0.1, 1.0);
  double total = 0.0;
  for (double& x : w) total += (x = uni(rng));
  for (double x : w) kraus.push_back(std::sqrt(x / total) * random_unitary(d, rng) * root);
  return KrausChannel::make(std::move(kraus));
}

}  // namespace cleanpovm
