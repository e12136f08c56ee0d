#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace chaoskit {

enum class Family { Hermite, Laguerre, Jacobi };

/// Which classical one-dimensional diffusion a coordinate follows.
///
///   Hermite:       L = d²/dx² − x d/dx,                         μ = N(0,1),      λ_p = p
///   Laguerre(α):   L = x d²/dx² + (α+1−x) d/dx,                  μ = Gamma(α+1,1), λ_p = p
///   Jacobi(a,b):   L = (1−x²) d²/dx² − ((a+b)x + (a−b)) d/dx,    μ ∝ (1−x)^{a−1}(1+x)^{b−1} on [−1,1],
///                  λ_p = p(p+a+b−1)
struct BasisKind {
  Family family = Family::Hermite;
  double alpha = 0.0;  // Laguerre shape, > -1
  double a = 1.0;      // Jacobi, > 0
  double b = 1.0;      // Jacobi, > 0

  static BasisKind hermite() { return {}; }
  static BasisKind laguerre(double alpha);
  static BasisKind jacobi(double a, double b);

  /// Throws DomainError if parameters are out of range.
  void validate() const;

  /// Parameters in a canonical order: {} / {alpha} / {a, b}.
  std::vector<double> params() const;

  /// "hermite", "laguerre" or "jacobi".
  std::string family_name() const;

  /// Human readable, e.g. "jacobi(2,2)".
  std::string label() const;

  /// Eigenvalue of the degree-p eigenpolynomial.
  double eigenvalue(int p) const;

  /// Coefficients of the generator L f = diffusion(x) f'' + drift(x) f'.
  double diffusion(double x) const;
  double drift(double x) const;

  static BasisKind from_name(const std::string& name, std::span<const double> params);

  friend bool operator==(const BasisKind&, const BasisKind&) = default;
};

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Orthonormal polynomial eigensystem Q_0..Q_max of one coordinate generator.
///
/// The polynomials satisfy  x Q_p = b_{p+1} Q_{p+1} + a_p Q_p + b_p Q_{p-1}  with Q_0 ≡ 1.
/// Off-diagonal coefficients b_p carry the sign convention of the family (Laguerre
/// uses the classical (−1)^p leading sign, so Q_1 = (α+1−x)/√(α+1)).
///
/// Construction verifies L Q_p = −λ_p Q_p at every node of the (max_degree+1)-point
/// Gauss rule and throws EigenrelationError on mismatch. Immutable afterwards; the
/// linearization table is filled lazily and is safe to query from several threads.
class Basis {
 public:
  static constexpr int kMaxDegreeCap = 512;
  static constexpr double kEigTolerance = 1e-9;

  Basis(BasisKind kind, int max_degree);
  ~Basis();
  Basis(const Basis&) = delete;
  Basis& operator=(const Basis&) = delete;

  const BasisKind& kind() const { return kind_; }
  int max_degree() const { return max_degree_; }
  double eigenvalue(int p) const { return eigenvalues_.at(static_cast<std::size_t>(p)); }
  std::span<const double> eigenvalues() const { return eigenvalues_; }

  /// Diagonal recurrence coefficient a_p, p = 0..max_degree.
  double recurrence_diag(int p) const { return diag_.at(static_cast<std::size_t>(p)); }
  /// Off-diagonal recurrence coefficient b_p, p = 1..max_degree+1 (b_0 is 0).
  double recurrence_offdiag(int p) const { return offdiag_.at(static_cast<std::size_t>(p)); }

  /// Writes Q_0(x)..Q_{out.size()-1}(x); out.size() may not exceed max_degree+1.
  void evaluate_all(double x, std::span<double> out) const;
  double value(int p, double x) const;

  /// Values, first and second derivatives of Q_0..Q_{n-1} at x.
  void evaluate_with_derivatives(double x, std::span<double> q, std::span<double> dq,
                                 std::span<double> d2q) const;

  /// Gauss rule with `nodes` points (Golub–Welsch); exact for degree ≤ 2·nodes−1.
  QuadratureRule gauss_quadrature(int nodes) const;

  /// Coefficients c_0..c_{m+n} of Q_m·Q_n = Σ c_k Q_k. Requires m+n ≤ max_degree.
  std::span<const double> linearize(int m, int n) const;

  /// Largest residual |L Q_p + λ_p Q_p| / (1+λ_p) / scale found during construction.
  double eigen_residual() const { return eigen_residual_; }

  friend bool operator==(const Basis& x, const Basis& y) {
    return x.kind_ == y.kind_ && x.max_degree_ == y.max_degree_;
  }

 private:
  void build_recurrence();
  void verify_eigenrelation();
  std::vector<double> compute_linearization(int m, int n) const;

  BasisKind kind_;
  int max_degree_;
  std::vector<double> diag_;
  std::vector<double> offdiag_;
  std::vector<double> eigenvalues_;

  // Full Gauss rule (max_degree+1 points) and Q_p values at its nodes, row-major by p.
  QuadratureRule rule_;
  std::vector<double> node_values_;
  double eigen_residual_ = 0.0;

  struct LinearizationCache;
  std::unique_ptr<LinearizationCache> cache_;
};

using BasisPtr = std::shared_ptr<const Basis>;

/// Same as constructing Basis directly but returns a shareable handle.
BasisPtr make_basis(BasisKind kind, int max_degree);

}  // namespace chaoskit
