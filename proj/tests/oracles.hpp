#pragma once

// Reference computations that avoid the library's recurrences: polynomials in the
// monomial basis, raw moments of the invariant measures, Gram-Schmidt, and the
// generators applied by symbolic differentiation.

#include <cmath>
#include <random>
#include <vector>

#include "chaoskit/basis.hpp"
#include "chaoskit/spectral.hpp"

namespace oracle {

using Poly = std::vector<long double>;  // c[k] multiplies x^k

inline long double moment(const chaoskit::BasisKind& kind, int k) {
  using chaoskit::Family;
  switch (kind.family) {
    case Family::Hermite: {
      if (k % 2) return 0.0L;
      long double m = 1.0L;
      for (int j = k - 1; j > 0; j -= 2) m *= j;
      return m;
    }
    case Family::Laguerre: {
      long double m = 1.0L;
      for (int j = 0; j < k; ++j) m *= kind.alpha + 1.0L + j;
      return m;
    }
    case Family::Jacobi: {
      // x = 2u - 1 with u ~ Beta(b, a); E[u^j] = prod_{i<j} (b+i)/(a+b+i).
      std::vector<long double> mu(static_cast<std::size_t>(k) + 1, 1.0L);
      for (int j = 1; j <= k; ++j) mu[j] = mu[j - 1] * (kind.b + j - 1.0L) / (kind.a + kind.b + j - 1.0L);
      long double m = 0.0L, binom = 1.0L;
      for (int j = 0; j <= k; ++j) {
        m += binom * std::pow(2.0L, j) * mu[j] * ((k - j) % 2 ? -1.0L : 1.0L);
        binom = binom * (k - j) / (j + 1);
      }
      return m;
    }
  }
  return 0.0L;
}

inline long double integrate(const chaoskit::BasisKind& kind, const Poly& p) {
  long double s = 0.0L;
  for (std::size_t k = 0; k < p.size(); ++k) s += p[k] * moment(kind, static_cast<int>(k));
  return s;
}

inline Poly mul(const Poly& a, const Poly& b) {
  Poly c(a.size() + b.size() - 1, 0.0L);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  return c;
}

inline long double eval(const Poly& p, long double x) {
  long double v = 0.0L;
  for (std::size_t k = p.size(); k-- > 0;) v = v * x + p[k];
  return v;
}

/// Orthonormal polynomials with positive leading coefficient, by Gram-Schmidt on monomials.
inline std::vector<Poly> gram_schmidt(const chaoskit::BasisKind& kind, int max_degree) {
  std::vector<Poly> q;
  for (int d = 0; d <= max_degree; ++d) {
    Poly v(static_cast<std::size_t>(d) + 1, 0.0L);
    v[d] = 1.0L;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& e : q) {
        const long double c = integrate(kind, mul(v, e));
        for (std::size_t k = 0; k < e.size(); ++k) v[k] -= c * e[k];
      }
    }
    const long double nrm = std::sqrt(integrate(kind, mul(v, v)));
    for (auto& c : v) c /= nrm;
    q.push_back(v);
  }
  return q;
}

/// L applied to a polynomial: diffusion(x) p'' + drift(x) p' with the pinned coefficients.
inline Poly apply_generator(const chaoskit::BasisKind& kind, const Poly& p) {
  using chaoskit::Family;
  Poly d1(p.size(), 0.0L), d2(p.size(), 0.0L);
  for (std::size_t k = 1; k < p.size(); ++k) d1[k - 1] = k * p[k];
  for (std::size_t k = 2; k < p.size(); ++k) d2[k - 2] = k * (k - 1) * p[k];
  Poly sigma, drift;
  switch (kind.family) {
    case Family::Hermite:
      sigma = {1.0L};
      drift = {0.0L, -1.0L};
      break;
    case Family::Laguerre:
      sigma = {0.0L, 1.0L};
      drift = {kind.alpha + 1.0L, -1.0L};
      break;
    case Family::Jacobi:
      sigma = {1.0L, 0.0L, -1.0L};
      drift = {-(static_cast<long double>(kind.a) - kind.b), -(static_cast<long double>(kind.a) + kind.b)};
      break;
  }
  Poly a = mul(sigma, d2), b = mul(drift, d1);
  Poly out(std::max(a.size(), b.size()), 0.0L);
  for (std::size_t k = 0; k < a.size(); ++k) out[k] += a[k];
  for (std::size_t k = 0; k < b.size(); ++k) out[k] += b[k];
  return out;
}

/// Random function with `terms` basis functions of per-coordinate degree <= max_deg.
inline chaoskit::SpectralFn random_fn(const chaoskit::SpacePtr& space, std::mt19937_64& eng, int terms, int max_deg) {
  std::uniform_int_distribution<int> deg(0, max_deg);
  std::normal_distribution<double> coef(0.0, 1.0);
  chaoskit::SpectralFn f(space);
  for (int t = 0; t < terms; ++t) {
    chaoskit::MultiIndex alpha = space->zero_index();
    for (auto& a : alpha.degrees) a = deg(eng);
    f.add(alpha, coef(eng));
  }
  return f;
}

inline const std::vector<chaoskit::BasisKind>& families() {
  static const std::vector<chaoskit::BasisKind> k{chaoskit::BasisKind::hermite(), chaoskit::BasisKind::laguerre(0.0),
                                                  chaoskit::BasisKind::laguerre(1.5), chaoskit::BasisKind::jacobi(2.0, 2.0),
                                                  chaoskit::BasisKind::jacobi(1.0, 1.0),
                                                  chaoskit::BasisKind::jacobi(0.5, 3.0)};
  return k;
}

}  // namespace oracle
