#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "chaoskit/spectral.hpp"

namespace chaoskit {

/// Dense order-p tensor over R^m, row-major (last index fastest). Indices are 0-based.
class RawTensor {
 public:
  RawTensor(int dim, int order);

  int dim() const { return dim_; }
  int order() const { return order_; }
  std::size_t size() const { return data_.size(); }

  double& operator[](std::span<const int> idx) { return data_[offset(idx)]; }
  double operator[](std::span<const int> idx) const { return data_[offset(idx)]; }
  double& at_flat(std::size_t k) { return data_[k]; }
  double at_flat(std::size_t k) const { return data_[k]; }
  /// Inverse of the flat layout.
  std::vector<int> unflatten(std::size_t k) const;

  double inner(const RawTensor& other) const;

 private:
  std::size_t offset(std::span<const int> idx) const;

  int dim_;
  int order_;
  std::vector<double> data_;
};

/// Symmetric tensor f ∈ (R^m)^{⊙p}, stored on sorted index tuples i_1 ≤ … ≤ i_p.
class SymTensor {
 public:
  SymTensor(int dim, int order);

  int dim() const { return dim_; }
  int order() const { return order_; }
  const std::map<std::vector<int>, double>& entries() const { return entries_; }

  /// Value at any index tuple (order does not matter).
  double get(std::vector<int> idx) const;
  void set(std::vector<int> idx, double value);

  /// Number of distinct orderings of a sorted tuple: p! / Π k_j!.
  static double multiplicity(std::span<const int> sorted);

  /// Full-tensor inner product Σ_{all tuples} f g = Σ_sorted mult·f·g.
  double inner(const SymTensor& other) const;
  double norm2() const { return inner(*this); }

  RawTensor to_raw() const;

 private:
  void check(const std::vector<int>& idx) const;

  int dim_;
  int order_;
  std::map<std::vector<int>, double> entries_;
};

/// Average over all permutations of the index slots.
SymTensor symmetrize(const RawTensor& t);

/// (f ⊗_r g)(i, j) = Σ_k f(k, i) g(k, j) over r shared slots; order p+q−2r.
/// r = 0 is the tensor product; r = p = q yields an order-0 tensor holding ⟨f,g⟩.
RawTensor contract(const SymTensor& f, const SymTensor& g, int r);

/// Standard-Gaussian product space with m coordinates, shared Hermite basis.
SpacePtr wiener_space(int m, int max_degree);

/// I_p(f) over the Hermite coordinates of `space`: I_p(e_{i_1}⊗̃…⊗̃e_{i_p}) = Π_j He_{k_j}(X_j)
/// with k_j the multiplicity of index j, so that E[I_p(f) I_q(g)] = δ_pq p! ⟨f,g⟩.
SpectralFn multiple_integral(const SymTensor& f, const SpacePtr& space);

struct ProductFormulaCheck {
  double lhs = 0.0;  // ⟨π_{2p}(I_p(f)²), π_{2p}(I_p(g)²)⟩ computed spectrally
  double rhs = 0.0;  // 2 p!² ⟨f,g⟩² + Σ_{r=1}^{p−1} p!² C(p,r)² ⟨f ⊗_r g, g ⊗_r f⟩
  bool agrees(double tol) const;
};

/// Compares the top-chaos projection of the squares with the contraction formula.
ProductFormulaCheck product_formula_check(const SymTensor& f, const SymTensor& g, const SpacePtr& space);

/// Σ_{r=1}^{p−1} p!² C(p,r)² ⟨f ⊗_r f, g ⊗_r g⟩, pairing each kernel with itself. Agrees with
/// the cross-paired sum when f = g, not in general.
double self_contraction_sum(const SymTensor& f, const SymTensor& g);

}  // namespace chaoskit
