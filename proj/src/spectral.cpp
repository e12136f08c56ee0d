#include "chaoskit/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

#include "chaoskit/error.hpp"

namespace chaoskit {

bool MultiIndex::is_zero() const {
  return std::all_of(degrees.begin(), degrees.end(), [](int d) { return d == 0; });
}

ProductSpace::ProductSpace(std::vector<BasisPtr> coords) : coords_(std::move(coords)) {
  if (coords_.empty()) throw DomainError("a product space needs at least one coordinate");
  for (const auto& c : coords_)
    if (!c) throw DomainError("null coordinate basis");
}

SpacePtr ProductSpace::uniform(BasisKind kind, int max_degree, std::size_t dims) {
  auto basis = make_basis(kind, max_degree);
  return std::make_shared<const ProductSpace>(std::vector<BasisPtr>(dims, basis));
}

double ProductSpace::eigenvalue(const MultiIndex& alpha) const {
  double total = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i)
    if (alpha[i] != 0) total += coords_[i]->eigenvalue(alpha[i]);
  return total;
}

void ProductSpace::check_index(const MultiIndex& alpha) const {
  if (alpha.size() != dim())
    throw SpaceMismatch("multi-index has " + std::to_string(alpha.size()) + " entries, space has " +
                        std::to_string(dim()) + " coordinates");
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] < 0) throw DomainError("negative degree in multi-index");
    if (alpha[i] > coords_[i]->max_degree())
      throw DegreeOverflow("degree " + std::to_string(alpha[i]) + " exceeds max_degree " +
                           std::to_string(coords_[i]->max_degree()) + " in coordinate " + std::to_string(i));
  }
}

bool operator==(const ProductSpace& x, const ProductSpace& y) {
  if (x.dim() != y.dim()) return false;
  for (std::size_t i = 0; i < x.dim(); ++i) {
    if (x.coords_[i] == y.coords_[i]) continue;
    if (!(*x.coords_[i] == *y.coords_[i])) return false;
  }
  return true;
}

SpectralFn::SpectralFn(SpacePtr space) : space_(std::move(space)) {
  if (!space_) throw DomainError("SpectralFn needs a space");
}

SpectralFn SpectralFn::constant(SpacePtr space, double value) {
  SpectralFn f(std::move(space));
  f.add(f.space_->zero_index(), value);
  return f;
}

SpectralFn SpectralFn::basis_function(SpacePtr space, MultiIndex alpha, double value) {
  SpectralFn f(std::move(space));
  f.add(alpha, value);
  return f;
}

SpectralFn SpectralFn::coordinate(SpacePtr space, std::size_t coord, int degree, double value) {
  MultiIndex alpha = space->zero_index();
  if (coord >= alpha.size()) throw DomainError("coordinate index out of range");
  alpha.degrees[coord] = degree;
  return basis_function(std::move(space), std::move(alpha), value);
}

double SpectralFn::coeff(const MultiIndex& alpha) const {
  const auto it = coeffs_.find(alpha);
  return it == coeffs_.end() ? 0.0 : it->second;
}

void SpectralFn::add(const MultiIndex& alpha, double value) {
  if (value == 0.0) return;
  space_->check_index(alpha);
  auto [it, inserted] = coeffs_.try_emplace(alpha, value);
  if (!inserted) {
    it->second += value;
    if (it->second == 0.0) coeffs_.erase(it);
  }
}

void SpectralFn::set(const MultiIndex& alpha, double value) {
  space_->check_index(alpha);
  if (value == 0.0)
    coeffs_.erase(alpha);
  else
    coeffs_[alpha] = value;
}

double SpectralFn::mean() const { return coeff(space_->zero_index()); }

double SpectralFn::norm2() const {
  double s = 0.0;
  for (const auto& [alpha, c] : coeffs_) s += c * c;
  return s;
}

double SpectralFn::norm() const { return std::sqrt(norm2()); }

double SpectralFn::max_eigenvalue() const {
  double top = 0.0;
  for (const auto& [alpha, c] : coeffs_) top = std::max(top, space_->eigenvalue(alpha));
  return top;
}

std::vector<int> SpectralFn::max_degrees() const {
  std::vector<int> top(space_->dim(), 0);
  for (const auto& [alpha, c] : coeffs_)
    for (std::size_t i = 0; i < top.size(); ++i) top[i] = std::max(top[i], alpha[i]);
  return top;
}

SpectralFn& SpectralFn::operator+=(const SpectralFn& other) {
  require_same_space(*this, other);
  for (const auto& [alpha, c] : other.coeffs_) add(alpha, c);
  return *this;
}

SpectralFn& SpectralFn::operator-=(const SpectralFn& other) {
  require_same_space(*this, other);
  for (const auto& [alpha, c] : other.coeffs_) add(alpha, -c);
  return *this;
}

SpectralFn& SpectralFn::operator*=(double s) {
  if (s == 0.0) {
    coeffs_.clear();
    return *this;
  }
  for (auto& [alpha, c] : coeffs_) c *= s;
  return *this;
}

void require_same_space(const SpectralFn& f, const SpectralFn& g) {
  if (f.space() == g.space()) return;
  if (!(f.product_space() == g.product_space())) throw SpaceMismatch("operands live on different product spaces");
}

double inner(const SpectralFn& f, const SpectralFn& g) {
  require_same_space(f, g);
  const auto& small = f.size() <= g.size() ? f.coeffs() : g.coeffs();
  const auto& large = f.size() <= g.size() ? g.coeffs() : f.coeffs();
  double s = 0.0;
  for (const auto& [alpha, c] : small) {
    const auto it = large.find(alpha);
    if (it != large.end()) s += c * it->second;
  }
  return s;
}

namespace {

/// Calls emit(γ, value) for every term of the expansion of (f_α Q_α)(g_β Q_β),
/// together with the eigenvalues Λ(α), Λ(β).
template <class Emit>
void for_each_product_term(const SpectralFn& f, const SpectralFn& g, Emit&& emit) {
  require_same_space(f, g);
  const ProductSpace& space = f.product_space();
  const std::size_t d = space.dim();

  struct Factor {
    std::size_t coord;
    std::span<const double> coeffs;
  };
  std::vector<Factor> factors;
  std::vector<std::size_t> pos;
  MultiIndex gamma_idx(std::vector<int>(d, 0));

  for (const auto& [alpha, fa] : f.coeffs()) {
    const double lam_a = space.eigenvalue(alpha);
    for (const auto& [beta, gb] : g.coeffs()) {
      const double lam_b = space.eigenvalue(beta);
      factors.clear();
      for (std::size_t i = 0; i < d; ++i) {
        const int m = alpha[i];
        const int n = beta[i];
        if (m + n > space.coord(i).max_degree())
          throw DegreeOverflow("product needs degree " + std::to_string(m + n) + " in coordinate " +
                               std::to_string(i) + " but max_degree is " +
                               std::to_string(space.coord(i).max_degree()));
        gamma_idx.degrees[i] = m + n;
        if (m != 0 && n != 0) factors.push_back({i, space.coord(i).linearize(m, n)});
      }
      const double base = fa * gb;
      if (factors.empty()) {
        emit(gamma_idx, base, lam_a, lam_b);
        continue;
      }
      // Odometer over the nonzero linearization coefficients of each shared coordinate.
      pos.assign(factors.size(), 0);
      for (;;) {
        double value = base;
        for (std::size_t k = 0; k < factors.size(); ++k) {
          const double c = factors[k].coeffs[pos[k]];
          value *= c;
          gamma_idx.degrees[factors[k].coord] = static_cast<int>(pos[k]);
        }
        if (value != 0.0) emit(gamma_idx, value, lam_a, lam_b);
        std::size_t k = 0;
        for (; k < factors.size(); ++k) {
          if (++pos[k] < factors[k].coeffs.size()) break;
          pos[k] = 0;
        }
        if (k == factors.size()) break;
      }
    }
  }
}

}  // namespace

SpectralFn multiply(const SpectralFn& f, const SpectralFn& g) {
  SpectralFn out(f.space());
  for_each_product_term(f, g, [&](const MultiIndex& idx, double v, double, double) { out.add(idx, v); });
  return out;
}

SpectralFn apply_L(const SpectralFn& f) {
  SpectralFn out(f.space());
  for (const auto& [alpha, c] : f.coeffs()) out.add(alpha, -f.product_space().eigenvalue(alpha) * c);
  return out;
}

SpectralFn apply_Linv(const SpectralFn& f) {
  SpectralFn out(f.space());
  for (const auto& [alpha, c] : f.coeffs()) {
    const double lam = f.product_space().eigenvalue(alpha);
    if (lam != 0.0) out.add(alpha, -c / lam);
  }
  return out;
}

SpectralFn gamma(const SpectralFn& f, const SpectralFn& g) {
  // Termwise: ½(L(Q_αQ_β) − Q_α LQ_β − Q_β LQ_α) = Σ_γ ½(Λ(α)+Λ(β)−Λ(γ)) c_γ Q_γ.
  SpectralFn out(f.space());
  const ProductSpace& space = f.product_space();
  for_each_product_term(f, g, [&](const MultiIndex& idx, double v, double lam_a, double lam_b) {
    const double factor = 0.5 * (lam_a + lam_b - space.eigenvalue(idx));
    if (factor != 0.0) out.add(idx, factor * v);
  });
  return out;
}

namespace {
bool same_eigenvalue(double lam, double target) {
  return std::abs(lam - target) <= kGroupTolerance * (1.0 + std::abs(target));
}
}  // namespace

SpectralFn project(const SpectralFn& f, double eigenvalue) {
  SpectralFn out(f.space());
  for (const auto& [alpha, c] : f.coeffs())
    if (same_eigenvalue(f.product_space().eigenvalue(alpha), eigenvalue)) out.add(alpha, c);
  return out;
}

double evaluate_at(const SpectralFn& f, std::span<const double> point) {
  const ProductSpace& space = f.product_space();
  if (point.size() != space.dim()) throw SpaceMismatch("point dimension does not match the space");
  const auto top = f.max_degrees();
  std::vector<std::vector<double>> values(space.dim());
  for (std::size_t i = 0; i < space.dim(); ++i) {
    values[i].resize(static_cast<std::size_t>(top[i]) + 1);
    space.coord(i).evaluate_all(point[i], values[i]);
  }
  double total = 0.0;
  for (const auto& [alpha, c] : f.coeffs()) {
    double term = c;
    for (std::size_t i = 0; i < alpha.size(); ++i)
      if (alpha[i] != 0) term *= values[i][static_cast<std::size_t>(alpha[i])];
    total += term;
  }
  return total;
}

Spectrum spectrum(const SpectralFn& f) {
  std::vector<std::pair<double, MultiIndex>> support;
  support.reserve(f.size());
  for (const auto& [alpha, c] : f.coeffs()) support.emplace_back(f.product_space().eigenvalue(alpha), alpha);
  std::stable_sort(support.begin(), support.end(),
                   [](const auto& x, const auto& y) { return x.first < y.first; });
  Spectrum groups;
  for (auto& [lam, alpha] : support) {
    if (groups.empty() || !same_eigenvalue(lam, groups.back().eigenvalue))
      groups.push_back({lam, {}});
    groups.back().members.push_back(std::move(alpha));
  }
  return groups;
}

namespace {
double group_mass(const SpectralFn& f, const SpectrumGroup& g) {
  double s = 0.0;
  for (const auto& alpha : g.members) {
    const double c = f.coeff(alpha);
    s += c * c;
  }
  return std::sqrt(s);
}

ChaosCheck check_support_above(const SpectralFn& product, double bound, double tol) {
  ChaosCheck out;
  out.bound = bound;
  out.product_norm = product.norm();
  if (product.is_zero()) return out;
  for (const auto& group : spectrum(product)) {
    if (group.eigenvalue <= bound || same_eigenvalue(group.eigenvalue, bound)) continue;
    const double mass = group_mass(product, group);
    const double rel = mass / out.product_norm;
    if (rel > tol) out.offending.push_back({group.eigenvalue, mass, rel});
  }
  out.chaotic = out.offending.empty();
  return out;
}

double require_eigenvalue(const SpectralFn& f, double tol, const char* what) {
  const auto lam = eigenfunction_eigenvalue(f, tol);
  if (!lam) throw PreconditionError(std::string(what) + ": argument is not an eigenfunction of L");
  return *lam;
}
}  // namespace

std::optional<double> eigenfunction_eigenvalue(const SpectralFn& f, double tol) {
  if (f.is_zero()) return std::nullopt;
  const auto groups = spectrum(f);
  std::size_t main = 0;
  double main_mass = -1.0;
  double total2 = 0.0;
  for (std::size_t k = 0; k < groups.size(); ++k) {
    const double m = group_mass(f, groups[k]);
    total2 += m * m;
    if (m > main_mass) {
      main_mass = m;
      main = k;
    }
  }
  const double rest = std::sqrt(std::max(0.0, total2 - main_mass * main_mass));
  if (rest > tol * std::sqrt(total2)) return std::nullopt;
  return groups[main].eigenvalue;
}

ChaosCheck is_chaotic(const SpectralFn& f, double tol) {
  const double lam = require_eigenvalue(f, tol, "is_chaotic");
  return check_support_above(multiply(f, f), 2.0 * lam, tol);
}

ChaosCheck is_jointly_chaotic(const SpectralFn& f, const SpectralFn& g, double tol) {
  require_same_space(f, g);
  if (f.is_zero() || g.is_zero()) return ChaosCheck{};
  const double lf = require_eigenvalue(f, tol, "is_jointly_chaotic");
  const double lg = require_eigenvalue(g, tol, "is_jointly_chaotic");
  return check_support_above(multiply(f, g), lf + lg, tol);
}

VectorChaosCheck is_chaotic_vector(std::span<const SpectralFn> fs, double tol) {
  VectorChaosCheck out;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    for (std::size_t j = i; j < fs.size(); ++j) {
      auto check = is_jointly_chaotic(fs[i], fs[j], tol);
      if (!check.chaotic) out.failures.push_back({i, j, std::move(check)});
    }
  }
  out.chaotic = out.failures.empty();
  return out;
}

}  // namespace chaoskit
