#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "chaoskit/basis.hpp"

namespace chaoskit {

/// Relative tolerance used to decide that two eigenvalues coincide.
inline constexpr double kGroupTolerance = 1e-9;
/// Default relative mass tolerance of the chaos checks.
inline constexpr double kChaosTolerance = 1e-8;

/// Per-coordinate polynomial degrees of one product basis function Q_{α_1}⊗…⊗Q_{α_d}.
struct MultiIndex {
  std::vector<int> degrees;

  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> d) : degrees(std::move(d)) {}
  MultiIndex(std::initializer_list<int> d) : degrees(d) {}

  std::size_t size() const { return degrees.size(); }
  int operator[](std::size_t i) const { return degrees[i]; }
  bool is_zero() const;

  friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;
  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
};

/// Ordered list of coordinate bases. The generator is the sum of the coordinate
/// generators, so the eigenvalue of α is Σ_i λ^{(i)}_{α_i}.
class ProductSpace {
 public:
  explicit ProductSpace(std::vector<BasisPtr> coords);

  /// `dims` coordinates sharing one basis.
  static std::shared_ptr<const ProductSpace> uniform(BasisKind kind, int max_degree, std::size_t dims);

  std::size_t dim() const { return coords_.size(); }
  const Basis& coord(std::size_t i) const { return *coords_.at(i); }
  const BasisPtr& coord_ptr(std::size_t i) const { return coords_.at(i); }
  const std::vector<BasisPtr>& coords() const { return coords_; }

  double eigenvalue(const MultiIndex& alpha) const;

  /// Throws DegreeOverflow / SpaceMismatch if alpha does not fit this space.
  void check_index(const MultiIndex& alpha) const;

  MultiIndex zero_index() const { return MultiIndex(std::vector<int>(dim(), 0)); }

  /// Structural equality: same kinds and max degrees, coordinate by coordinate.
  friend bool operator==(const ProductSpace& x, const ProductSpace& y);

 private:
  std::vector<BasisPtr> coords_;
};

using SpacePtr = std::shared_ptr<const ProductSpace>;

/// A function in L²(E, μ) with finitely many nonzero coefficients in the product
/// orthonormal basis. Coefficients are kept in lexicographic multi-index order;
/// exact zeros are never stored.
class SpectralFn {
 public:
  using Coeffs = std::map<MultiIndex, double>;

  explicit SpectralFn(SpacePtr space);

  static SpectralFn constant(SpacePtr space, double value = 1.0);
  static SpectralFn basis_function(SpacePtr space, MultiIndex alpha, double value = 1.0);
  /// value · Q_degree in coordinate `coord`, Q_0 elsewhere.
  static SpectralFn coordinate(SpacePtr space, std::size_t coord, int degree, double value = 1.0);

  const SpacePtr& space() const { return space_; }
  const ProductSpace& product_space() const { return *space_; }
  const Coeffs& coeffs() const { return coeffs_; }
  std::size_t size() const { return coeffs_.size(); }
  bool is_zero() const { return coeffs_.empty(); }

  double coeff(const MultiIndex& alpha) const;
  /// Adds `value` to the coefficient of alpha.
  void add(const MultiIndex& alpha, double value);
  void set(const MultiIndex& alpha, double value);

  /// ∫F dμ.
  double mean() const;
  /// ∫F² dμ = Σ coefficients².
  double norm2() const;
  double norm() const;
  /// Largest eigenvalue carried by a nonzero coefficient (0 for the zero function).
  double max_eigenvalue() const;
  /// Largest per-coordinate degrees over the support.
  std::vector<int> max_degrees() const;

  SpectralFn& operator+=(const SpectralFn& other);
  SpectralFn& operator-=(const SpectralFn& other);
  SpectralFn& operator*=(double s);

  friend SpectralFn operator+(SpectralFn x, const SpectralFn& y) { return x += y; }
  friend SpectralFn operator-(SpectralFn x, const SpectralFn& y) { return x -= y; }
  friend SpectralFn operator*(double s, SpectralFn x) { return x *= s; }
  friend SpectralFn operator*(SpectralFn x, double s) { return x *= s; }

 private:
  SpacePtr space_;
  Coeffs coeffs_;
};

void require_same_space(const SpectralFn& f, const SpectralFn& g);

double inner(const SpectralFn& f, const SpectralFn& g);

/// Exact product, coordinate-wise via Basis::linearize.
SpectralFn multiply(const SpectralFn& f, const SpectralFn& g);

SpectralFn apply_L(const SpectralFn& f);

/// Pseudo-inverse: −F_α/Λ(α) off the kernel, 0 on constants.
SpectralFn apply_Linv(const SpectralFn& f);

/// Carré du champ ½(L(FG) − F·LG − G·LF).
SpectralFn gamma(const SpectralFn& f, const SpectralFn& g);

/// Orthogonal projection onto ker(L + eigenvalue·Id).
SpectralFn project(const SpectralFn& f, double eigenvalue);

/// Pointwise value at a point of E (one coordinate per entry).
double evaluate_at(const SpectralFn& f, std::span<const double> point);

struct SpectrumGroup {
  double eigenvalue;
  std::vector<MultiIndex> members;
};
using Spectrum = std::vector<SpectrumGroup>;

/// Support grouped by eigenvalue, ascending.
Spectrum spectrum(const SpectralFn& f);

/// Eigenvalue of f if all but one eigenvalue group carry at most tol·‖f‖.
std::optional<double> eigenfunction_eigenvalue(const SpectralFn& f, double tol = kChaosTolerance);

struct OffendingMass {
  double eigenvalue;
  double mass;      // ‖π_λ(product)‖
  double relative;  // mass / ‖product‖
};

struct ChaosCheck {
  bool chaotic = true;
  double bound = 0.0;         // eigenvalues above this must carry no mass
  double product_norm = 0.0;  // ‖F²‖ or ‖FG‖
  std::vector<OffendingMass> offending;
};

/// F² ∈ ⊕_{λ ≤ 2Λ_F} ker(L+λ). Throws PreconditionError unless F is an eigenfunction.
ChaosCheck is_chaotic(const SpectralFn& f, double tol = kChaosTolerance);

/// FG ∈ ⊕_{λ ≤ Λ_F+Λ_G} ker(L+λ). FG = 0 is jointly chaotic.
ChaosCheck is_jointly_chaotic(const SpectralFn& f, const SpectralFn& g, double tol = kChaosTolerance);

struct PairCheck {
  std::size_t i;
  std::size_t j;
  ChaosCheck check;
};

struct VectorChaosCheck {
  bool chaotic = true;
  std::vector<PairCheck> failures;
};

/// Every unordered pair (i ≤ j, diagonal included) jointly chaotic.
VectorChaosCheck is_chaotic_vector(std::span<const SpectralFn> fs, double tol = kChaosTolerance);

}  // namespace chaoskit
