#include "chaoskit/moments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chaoskit/error.hpp"

namespace chaoskit {

namespace {
constexpr double kCenteredTolerance = 1e-9;
}

GaussianTarget::GaussianTarget(Eigen::MatrixXd cov) : cov_(std::move(cov)) {
  if (cov_.rows() == 0 || cov_.rows() != cov_.cols()) throw DomainError("covariance must be a non-empty square matrix");
  if (!cov_.allFinite()) throw DomainError("covariance must be finite");
  if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw DomainError("covariance must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10) throw DomainError("covariance must be positive semidefinite");
}

GaussianTarget GaussianTarget::identity(std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d);
  return GaussianTarget(Eigen::MatrixXd::Identity(n, n));
}

double GaussianTarget::operator()(std::size_t i, std::size_t j) const {
  if (i >= dim() || j >= dim()) throw DomainError("covariance index out of range");
  return cov_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
}

double moment4(const SpectralFn& f) {
  const auto sq = multiply(f, f);
  return inner(sq, sq);
}

double mixed22(const SpectralFn& f, const SpectralFn& g) {
  require_same_space(f, g);
  return inner(multiply(f, f), multiply(g, g));
}

double var_gamma(const SpectralFn& f, const SpectralFn& g) {
  const auto gm = gamma(f, g);
  const double mean = gm.mean();
  return gm.norm2() - mean * mean;
}

double gaussian_mixed(const GaussianTarget& c, std::size_t i, std::size_t j) {
  const double cij = c(i, j);
  return c(i, i) * c(j, j) + 2.0 * cij * cij;
}

SpectralInequality thm33_sides(const SpectralFn& f, double eta) {
  SpectralInequality out;
  out.top_eigenvalue = f.max_eigenvalue();
  out.precondition_ok = eta >= out.top_eigenvalue * (1.0 - kGroupTolerance);
  // (L + η) F; L is self-adjoint so ∫F(L+η)²F = ‖(L+η)F‖².
  auto shifted = apply_L(f);
  shifted += eta * f;
  out.lhs = shifted.norm2();
  out.rhs = eta * inner(f, shifted);
  out.scale = eta * eta * f.norm2();
  return out;
}

double prop31_bound(std::span<const SpectralFn> fs, const GaussianTarget& c) {
  if (fs.size() != c.dim())
    throw DomainError("prop31_bound: " + std::to_string(fs.size()) + " components but target dimension " +
                      std::to_string(c.dim()));
  for (std::size_t i = 0; i < fs.size(); ++i) {
    if (std::abs(fs[i].mean()) > kCenteredTolerance)
      throw PreconditionError("prop31_bound: component " + std::to_string(i) + " is not centered");
    require_same_space(fs[0], fs[i]);
  }
  std::vector<SpectralFn> pseudo;
  pseudo.reserve(fs.size());
  for (const auto& f : fs) pseudo.push_back(-1.0 * apply_Linv(f));

  double total = 0.0;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    for (std::size_t j = 0; j < fs.size(); ++j) {
      auto diff = gamma(fs[i], pseudo[j]);
      diff *= -1.0;
      diff.add(diff.product_space().zero_index(), c(i, j));
      total += diff.norm2();
    }
  }
  return std::sqrt(total);
}

double a_coeff(double lambda_i, double lambda_j) {
  const double s = lambda_i + lambda_j;
  if (!(s > 0.0)) throw DomainError("a_coeff: lambda_i + lambda_j must be positive");
  return 2.0 * lambda_j / s;
}

namespace {

double admissible_eigenvalue(const SpectralFn& f, const char* which) {
  const auto lam = eigenfunction_eigenvalue(f);
  if (!lam) throw PreconditionError(std::string("remainder_r: ") + which + " is not an eigenfunction");
  if (*lam <= 0.0) throw PreconditionError(std::string("remainder_r: ") + which + " has eigenvalue 0 (constant)");
  return *lam;
}

bool distinct_eigenvalues(double x, double y) {
  return std::abs(x - y) > kGroupTolerance * (1.0 + std::max(std::abs(x), std::abs(y)));
}

}  // namespace

double remainder_r(const SpectralFn& fi, const SpectralFn& fj) {
  require_same_space(fi, fj);
  const double li = admissible_eigenvalue(fi, "F_i");
  const double lj = admissible_eigenvalue(fj, "F_j");
  const double cii = fi.norm2();
  const double cjj = fj.norm2();
  const double cij = inner(fi, fj);
  if (distinct_eigenvalues(li, lj) && std::abs(cij) > kCenteredTolerance * (1.0 + std::sqrt(cii * cjj)))
    throw PreconditionError("remainder_r: nonzero covariance between eigenfunctions of different eigenvalues");
  const double a = distinct_eigenvalues(li, lj) ? a_coeff(li, lj) : 1.0;
  const double m22 = mixed22(fi, fj);
  return lj * (0.5 * m22 - 0.5 * cii * cjj - a * cij * cij) - cij * cij * (1.0 - a) / lj;
}

double remainder_r(const SpectralFn& fi, const SpectralFn& fj, const GaussianTarget& c, std::size_t i,
                   std::size_t j) {
  const double li = admissible_eigenvalue(fi, "F_i");
  const double lj = admissible_eigenvalue(fj, "F_j");
  if (distinct_eigenvalues(li, lj) && c(i, j) != 0.0)
    throw PreconditionError("remainder_r: target covariance C_" + std::to_string(i) + std::to_string(j) +
                            " must vanish between eigenfunctions of different eigenvalues");
  return remainder_r(fi, fj);
}

FmtReport fmt_report(const SpectralFn& f) {
  FmtReport r;
  r.m2 = f.norm2();
  r.m4 = moment4(f);
  r.var_gamma = var_gamma(f, f);
  r.mean = f.mean();
  r.centered = std::abs(r.mean) <= kCenteredTolerance;
  r.eigenvalue = eigenfunction_eigenvalue(f);
  r.chaotic = r.eigenvalue.has_value() && is_chaotic(f).chaotic;
  return r;
}

JointReport joint_report(std::span<const SpectralFn> fs, const GaussianTarget& c) {
  const std::size_t d = fs.size();
  if (d != c.dim()) throw DomainError("joint_report: component count does not match the target dimension");
  const auto n = static_cast<Eigen::Index>(d);
  JointReport r;
  r.cov = Eigen::MatrixXd::Zero(n, n);
  r.mixed22 = Eigen::MatrixXd::Zero(n, n);
  r.isserlis = Eigen::MatrixXd::Zero(n, n);
  r.r_matrix = Eigen::MatrixXd::Zero(n, n);
  r.var_gamma = Eigen::MatrixXd::Zero(n, n);

  std::vector<SpectralFn> squares;
  for (const auto& f : fs) {
    r.components.push_back(fmt_report(f));
    const auto lam = r.components.back().eigenvalue;
    if (!lam) throw PreconditionError("joint_report: every component must be an eigenfunction");
    r.eigenvalues.push_back(*lam);
    squares.push_back(multiply(f, f));
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      r.cov(ii, jj) = inner(fs[i], fs[j]);
      r.mixed22(ii, jj) = inner(squares[i], squares[j]);
      r.isserlis(ii, jj) = gaussian_mixed(c, i, j);
      r.r_matrix(ii, jj) = remainder_r(fs[i], fs[j], c, i, j);
      r.var_gamma(ii, jj) = var_gamma(fs[i], fs[j]);
    }
  }
  r.prop31 = prop31_bound(fs, c);
  r.chaotic_vector = is_chaotic_vector(fs).chaotic;
  return r;
}

}  // namespace chaoskit
