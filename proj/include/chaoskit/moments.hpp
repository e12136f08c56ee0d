#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "chaoskit/spectral.hpp"

namespace chaoskit {

/// Covariance matrix of a centered Gaussian target. Symmetric to 1e-12 and
/// positive semidefinite up to −1e-10, checked on construction.
class GaussianTarget {
 public:
  explicit GaussianTarget(Eigen::MatrixXd cov);
  static GaussianTarget identity(std::size_t d);

  std::size_t dim() const { return static_cast<std::size_t>(cov_.rows()); }
  const Eigen::MatrixXd& cov() const { return cov_; }
  double operator()(std::size_t i, std::size_t j) const;

 private:
  Eigen::MatrixXd cov_;
};

/// ∫F⁴ dμ.
double moment4(const SpectralFn& f);
/// ∫F²G² dμ.
double mixed22(const SpectralFn& f, const SpectralFn& g);
/// Var Γ(F,G) = ∫Γ(F,G)² dμ − (∫Γ(F,G) dμ)².
double var_gamma(const SpectralFn& f, const SpectralFn& g);

/// E[Z_i² Z_j²] = C_ii C_jj + 2 C_ij² for Z ~ N(0, C).
double gaussian_mixed(const GaussianTarget& c, std::size_t i, std::size_t j);

struct SpectralInequality {
  double lhs = 0.0;  // ∫F (L+η)² F dμ
  double rhs = 0.0;  // η ∫F (L+η) F dμ
  double top_eigenvalue = 0.0;
  bool precondition_ok = true;  // η ≥ top eigenvalue of F
  double scale = 0.0;           // η²‖F‖², magnitude of the terms involved
  bool holds(double tol = 1e-8) const { return lhs <= rhs + tol * (1.0 + scale); }
};

/// Both sides of ∫F(L+η)²F ≤ η∫F(L+η)F for F supported on eigenvalues ≤ η.
/// Values are returned even when η is below the top eigenvalue (precondition_ok = false).
SpectralInequality thm33_sides(const SpectralFn& f, double eta);

/// √(Σ_ij ∫(C_ij − Γ(F_i, −L⁻¹F_j))² dμ). The characteristic-function gap of the
/// vector against N(0, C) at t is at most ‖t‖² times this value.
/// Throws PreconditionError if a component has |∫F_i dμ| > 1e-9.
double prop31_bound(std::span<const SpectralFn> fs, const GaussianTarget& c);

/// 2λ_j / (λ_i + λ_j). Throws DomainError when both vanish.
double a_coeff(double lambda_i, double lambda_j);

/// R_ij = λ_j(½∫F_i²F_j² − ½C_ii C_jj − a_ij C_ij²) − C_ij²(1−a_ij)/λ_j with C taken
/// from the exact covariances of the pair itself.
/// Throws PreconditionError for non-eigenfunctions, zero eigenvalues, or a nonzero
/// covariance between eigenfunctions of different eigenvalues.
double remainder_r(const SpectralFn& fi, const SpectralFn& fj);

/// Same, additionally requiring the target entry C_ij to vanish across distinct eigenvalues.
double remainder_r(const SpectralFn& fi, const SpectralFn& fj, const GaussianTarget& c, std::size_t i,
                   std::size_t j);

struct FmtReport {
  double m2 = 0.0;
  double m4 = 0.0;
  double var_gamma = 0.0;
  bool chaotic = false;
  double mean = 0.0;
  bool centered = false;
  std::optional<double> eigenvalue;  // unset when F is not an eigenfunction
};

struct JointReport {
  std::vector<FmtReport> components;
  std::vector<double> eigenvalues;
  Eigen::MatrixXd cov;
  Eigen::MatrixXd mixed22;
  Eigen::MatrixXd isserlis;  // E[Z_i² Z_j²] under the target
  Eigen::MatrixXd r_matrix;
  Eigen::MatrixXd var_gamma;  // Var Γ(F_i, F_j)
  double prop31 = 0.0;
  bool chaotic_vector = false;
};

FmtReport fmt_report(const SpectralFn& f);
JointReport joint_report(std::span<const SpectralFn> fs, const GaussianTarget& c);

}  // namespace chaoskit
