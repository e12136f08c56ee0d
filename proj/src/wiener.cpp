#include "chaoskit/wiener.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "chaoskit/error.hpp"

namespace chaoskit {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

double binomial(int n, int k) { return factorial(n) / (factorial(k) * factorial(n - k)); }

std::size_t ipow(int base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= static_cast<std::size_t>(base);
  return r;
}

}  // namespace

RawTensor::RawTensor(int dim, int order) : dim_(dim), order_(order) {
  if (dim < 1) throw DomainError("tensor dimension must be >= 1");
  if (order < 0) throw DomainError("tensor order must be >= 0");
  data_.assign(ipow(dim, order), 0.0);
}

std::size_t RawTensor::offset(std::span<const int> idx) const {
  if (static_cast<int>(idx.size()) != order_) throw DomainError("index length does not match tensor order");
  std::size_t k = 0;
  for (const int i : idx) {
    if (i < 0 || i >= dim_) throw DomainError("tensor index out of range");
    k = k * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(i);
  }
  return k;
}

std::vector<int> RawTensor::unflatten(std::size_t k) const {
  std::vector<int> idx(static_cast<std::size_t>(order_));
  for (int s = order_ - 1; s >= 0; --s) {
    idx[static_cast<std::size_t>(s)] = static_cast<int>(k % static_cast<std::size_t>(dim_));
    k /= static_cast<std::size_t>(dim_);
  }
  return idx;
}

double RawTensor::inner(const RawTensor& other) const {
  if (dim_ != other.dim_ || order_ != other.order_) throw DomainError("tensor shapes differ");
  return std::inner_product(data_.begin(), data_.end(), other.data_.begin(), 0.0);
}

SymTensor::SymTensor(int dim, int order) : dim_(dim), order_(order) {
  if (dim < 1) throw DomainError("tensor dimension must be >= 1");
  if (order < 1) throw DomainError("symmetric tensor order must be >= 1");
}

void SymTensor::check(const std::vector<int>& idx) const {
  if (static_cast<int>(idx.size()) != order_) throw DomainError("index length does not match tensor order");
  for (const int i : idx)
    if (i < 0 || i >= dim_) throw DomainError("tensor index out of range");
}

double SymTensor::get(std::vector<int> idx) const {
  check(idx);
  std::sort(idx.begin(), idx.end());
  const auto it = entries_.find(idx);
  return it == entries_.end() ? 0.0 : it->second;
}

void SymTensor::set(std::vector<int> idx, double value) {
  check(idx);
  std::sort(idx.begin(), idx.end());
  if (value == 0.0)
    entries_.erase(idx);
  else
    entries_[idx] = value;
}

double SymTensor::multiplicity(std::span<const int> sorted) {
  double m = factorial(static_cast<int>(sorted.size()));
  std::size_t k = 0;
  while (k < sorted.size()) {
    std::size_t run = 1;
    while (k + run < sorted.size() && sorted[k + run] == sorted[k]) ++run;
    m /= factorial(static_cast<int>(run));
    k += run;
  }
  return m;
}

double SymTensor::inner(const SymTensor& other) const {
  if (dim_ != other.dim_ || order_ != other.order_) throw DomainError("tensor shapes differ");
  double s = 0.0;
  for (const auto& [idx, v] : entries_) {
    const auto it = other.entries_.find(idx);
    if (it != other.entries_.end()) s += multiplicity(idx) * v * it->second;
  }
  return s;
}

RawTensor SymTensor::to_raw() const {
  RawTensor t(dim_, order_);
  for (std::size_t k = 0; k < t.size(); ++k) {
    auto idx = t.unflatten(k);
    std::sort(idx.begin(), idx.end());
    const auto it = entries_.find(idx);
    if (it != entries_.end()) t.at_flat(k) = it->second;
  }
  return t;
}

SymTensor symmetrize(const RawTensor& t) {
  if (t.order() < 1) throw DomainError("symmetrize: order must be >= 1");
  // Every distinct arrangement of a sorted tuple occurs equally often among the p!
  // permutations, so averaging over arrangements equals averaging over permutations.
  std::map<std::vector<int>, double> sums;
  for (std::size_t k = 0; k < t.size(); ++k) {
    auto idx = t.unflatten(k);
    std::sort(idx.begin(), idx.end());
    sums[idx] += t.at_flat(k);
  }
  SymTensor out(t.dim(), t.order());
  for (const auto& [idx, s] : sums) out.set(idx, s / SymTensor::multiplicity(idx));
  return out;
}

RawTensor contract(const SymTensor& f, const SymTensor& g, int r) {
  if (f.dim() != g.dim()) throw DomainError("contract: dimensions differ");
  const int p = f.order();
  const int q = g.order();
  if (r < 0 || r > std::min(p, q)) throw DomainError("contract: r must lie in [0, min(p, q)]");
  const int m = f.dim();
  const RawTensor fr = f.to_raw();
  const RawTensor gr = g.to_raw();
  RawTensor out(m, p + q - 2 * r);
  const std::size_t n_shared = ipow(m, r);
  const std::size_t f_free = ipow(m, p - r);
  const std::size_t g_free = ipow(m, q - r);
  // Row-major: f(k, i) sits at k·m^{p−r} + i, g(k, j) at k·m^{q−r} + j.
  for (std::size_t i = 0; i < f_free; ++i) {
    for (std::size_t j = 0; j < g_free; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n_shared; ++k) s += fr.at_flat(k * f_free + i) * gr.at_flat(k * g_free + j);
      out.at_flat(i * g_free + j) = s;
    }
  }
  return out;
}

SpacePtr wiener_space(int m, int max_degree) {
  return ProductSpace::uniform(BasisKind::hermite(), max_degree, static_cast<std::size_t>(m));
}

SpectralFn multiple_integral(const SymTensor& f, const SpacePtr& space) {
  if (static_cast<std::size_t>(f.dim()) != space->dim())
    throw DomainError("multiple_integral: tensor dimension does not match the space");
  for (const auto& c : space->coords())
    if (c->kind().family != Family::Hermite) throw DomainError("multiple_integral needs Hermite coordinates");
  SpectralFn out(space);
  for (const auto& [idx, v] : f.entries()) {
    MultiIndex alpha = space->zero_index();
    for (const int i : idx) ++alpha.degrees[static_cast<std::size_t>(i)];
    // He_k = √(k!) Q_k.
    double scale = SymTensor::multiplicity(idx);
    for (const int k : alpha.degrees) scale *= std::sqrt(factorial(k));
    out.add(alpha, scale * v);
  }
  return out;
}

bool ProductFormulaCheck::agrees(double tol) const { return std::abs(lhs - rhs) <= tol * (1.0 + std::abs(lhs)); }

ProductFormulaCheck product_formula_check(const SymTensor& f, const SymTensor& g, const SpacePtr& space) {
  if (f.order() != g.order() || f.dim() != g.dim()) throw DomainError("product_formula_check: shapes differ");
  const int p = f.order();
  const auto i_f = multiple_integral(f, space);
  const auto i_g = multiple_integral(g, space);
  const double top = 2.0 * p;

  ProductFormulaCheck out;
  out.lhs = inner(project(multiply(i_f, i_f), top), project(multiply(i_g, i_g), top));

  const double pf2 = factorial(p) * factorial(p);
  const double fg = f.inner(g);
  double rhs = 2.0 * pf2 * fg * fg;
  for (int r = 1; r <= p - 1; ++r) {
    const double c = binomial(p, r);
    rhs += pf2 * c * c * contract(f, g, r).inner(contract(g, f, r));
  }
  out.rhs = rhs;
  return out;
}

double self_contraction_sum(const SymTensor& f, const SymTensor& g) {
  if (f.order() != g.order() || f.dim() != g.dim()) throw DomainError("self_contraction_sum: shapes differ");
  const int p = f.order();
  const double pf2 = factorial(p) * factorial(p);
  double s = 0.0;
  for (int r = 1; r <= p - 1; ++r) {
    const double c = binomial(p, r);
    s += pf2 * c * c * contract(f, f, r).inner(contract(g, g, r));
  }
  return s;
}

}  // namespace chaoskit
