#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "chaoskit/error.hpp"
#include "chaoskit/wiener.hpp"

using namespace chaoskit;

namespace {

SymTensor random_sym(int m, int p, std::mt19937_64& eng) {
  std::normal_distribution<double> nd;
  SymTensor t(m, p);
  RawTensor shape(m, p);
  for (std::size_t k = 0; k < shape.size(); ++k) {
    auto idx = shape.unflatten(k);
    if (std::is_sorted(idx.begin(), idx.end())) t.set(idx, nd(eng));
  }
  return t;
}

double factorial(int n) { return std::tgamma(n + 1.0); }

// Σ over every raw index of f(k, i) g(k, j), written as explicit nested loops over flat indices.
RawTensor brute_contract(const SymTensor& f, const SymTensor& g, int r) {
  const int m = f.dim(), p = f.order(), q = g.order();
  RawTensor out(m, p + q - 2 * r);
  RawTensor fi(m, p - r), gj(m, q - r), kk(m, r);
  const std::size_t nk = r == 0 ? 1 : kk.size();
  for (std::size_t a = 0; a < (p - r == 0 ? 1 : fi.size()); ++a) {
    for (std::size_t b = 0; b < (q - r == 0 ? 1 : gj.size()); ++b) {
      double s = 0.0;
      for (std::size_t c = 0; c < nk; ++c) {
        std::vector<int> k = r ? kk.unflatten(c) : std::vector<int>{};
        std::vector<int> i = p - r ? fi.unflatten(a) : std::vector<int>{};
        std::vector<int> j = q - r ? gj.unflatten(b) : std::vector<int>{};
        std::vector<int> fk = k, gk = k;
        fk.insert(fk.end(), i.begin(), i.end());
        gk.insert(gk.end(), j.begin(), j.end());
        s += f.get(fk) * g.get(gk);
      }
      std::vector<int> ij = p - r ? fi.unflatten(a) : std::vector<int>{};
      if (q - r) {
        auto j = gj.unflatten(b);
        ij.insert(ij.end(), j.begin(), j.end());
      }
      out[ij] = s;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("symmetrization") {
  RawTensor t(2, 2);
  const int i01[] = {0, 1}, i10[] = {1, 0};
  t[i01] = 1.0;
  auto s = symmetrize(t);
  CHECK(s.get({0, 1}) == 0.5);
  CHECK(s.get({1, 0}) == 0.5);
  CHECK(s.get({0, 0}) == 0.0);
  t[i10] = 3.0;
  CHECK(symmetrize(t).get({0, 1}) == 2.0);

  std::mt19937_64 eng(1);
  const auto f = random_sym(3, 3, eng);
  const auto again = symmetrize(f.to_raw());
  for (const auto& [idx, v] : f.entries()) CHECK(again.get(idx) == doctest::Approx(v));
  CHECK(SymTensor::multiplicity(std::vector<int>{0, 0, 1}) == 3.0);
  CHECK(SymTensor::multiplicity(std::vector<int>{0, 1, 2}) == 6.0);
  CHECK(f.norm2() == doctest::Approx(f.to_raw().inner(f.to_raw())));
}

TEST_CASE("contractions") {
  SymTensor e11(2, 2);
  e11.set({0, 0}, 1.0);
  auto c = contract(e11, e11, 1);
  const int i00[] = {0, 0}, i11[] = {1, 1}, i01[] = {0, 1};
  CHECK(c[i00] == 1.0);
  CHECK(c[i11] == 0.0);
  CHECK(c[i01] == 0.0);

  SymTensor e1(2, 1), e2(2, 1);
  e1.set({0}, 1.0);
  e2.set({1}, 1.0);
  CHECK(contract(e1, e2, 1).at_flat(0) == 0.0);

  // (e_1 ⊗̃ e_2) ⊗_1 itself = ¼(e_1⊗e_1 + e_2⊗e_2).
  SymTensor e12(2, 2);
  e12.set({0, 1}, 0.5);
  auto c12 = contract(e12, e12, 1);
  CHECK(c12[i00] == doctest::Approx(0.25));
  CHECK(c12[i11] == doctest::Approx(0.25));
  CHECK(c12[i01] == doctest::Approx(0.0));

  std::mt19937_64 eng(2);
  for (int m = 1; m <= 3; ++m)
    for (int p = 1; p <= 3; ++p)
      for (int q = 1; q <= 3; ++q) {
        const auto f = random_sym(m, p, eng);
        const auto g = random_sym(m, q, eng);
        for (int r = 0; r <= std::min(p, q); ++r) {
          const auto fast = contract(f, g, r);
          const auto slow = brute_contract(f, g, r);
          REQUIRE(fast.size() == slow.size());
          for (std::size_t k = 0; k < fast.size(); ++k)
            CHECK(fast.at_flat(k) == doctest::Approx(slow.at_flat(k)).epsilon(1e-12));
        }
      }
  CHECK(contract(e11, e11, 2).at_flat(0) == doctest::Approx(e11.inner(e11)));
  CHECK_THROWS_AS(contract(e1, e11, 2), DomainError);
}

TEST_CASE("multiple integrals") {
  auto space = wiener_space(2, 4);
  SymTensor e1(2, 1);
  e1.set({0}, 1.0);
  const auto i1 = multiple_integral(e1, space);
  CHECK((i1 - SpectralFn::coordinate(space, 0, 1)).norm() == 0.0);
  SymTensor e11(2, 2);
  e11.set({0, 0}, 1.0);
  const auto i2 = multiple_integral(e11, space);
  CHECK((i2 - SpectralFn::coordinate(space, 0, 2, std::sqrt(2.0))).norm() <= 1e-15);
  const double pt[] = {1.7, -0.3};
  CHECK(evaluate_at(i2, pt) == doctest::Approx(1.7 * 1.7 - 1.0));
  SymTensor e12(2, 2);
  e12.set({0, 1}, 0.5);
  // I_2(e_1 ⊗̃ e_2) = X_1 X_2.
  CHECK(evaluate_at(multiple_integral(e12, space), pt) == doctest::Approx(1.7 * -0.3));
  CHECK_THROWS_AS(multiple_integral(e1, ProductSpace::uniform(BasisKind::laguerre(0), 3, 2)), DomainError);
}

TEST_CASE("isometry") {
  std::mt19937_64 eng(3);
  for (int m = 1; m <= 4; ++m)
    for (int p = 1; p <= 4; ++p) {
      auto space = wiener_space(m, p);
      for (int trial = 0; trial < 3; ++trial) {
        const auto f = random_sym(m, p, eng);
        const auto g = random_sym(m, p, eng);
        const double lhs = inner(multiple_integral(f, space), multiple_integral(g, space));
        CHECK(lhs == doctest::Approx(factorial(p) * f.inner(g)).epsilon(1e-9).scale(1.0));
        if (p > 1) {
          const auto h = random_sym(m, p - 1, eng);
          CHECK(std::abs(inner(multiple_integral(f, space), multiple_integral(h, space))) <= 1e-12);
        }
      }
    }
}

TEST_CASE("top chaos of a square is the multiple integral of the symmetrized tensor square") {
  std::mt19937_64 eng(4);
  for (int m = 1; m <= 3; ++m)
    for (int p = 1; p <= 3; ++p) {
      auto space = wiener_space(m, 2 * p);
      const auto f = random_sym(m, p, eng);
      const auto i = multiple_integral(f, space);
      const auto sq = multiply(i, i);
      const auto top = project(sq, 2.0 * p);
      const auto expected = multiple_integral(symmetrize(contract(f, f, 0)), space);
      CHECK((top - expected).norm() <= 1e-10 * (1.0 + expected.norm()));
      for (const auto& grp : spectrum(sq)) CHECK(grp.eigenvalue <= 2.0 * p + 1e-12);
      CHECK(is_chaotic(i).chaotic);
    }
}

TEST_CASE("product formula") {
  auto space = wiener_space(2, 2);
  SymTensor e1(2, 1), e2(2, 1);
  e1.set({0}, 1.0);
  e2.set({1}, 1.0);
  auto r = product_formula_check(e1, e2, space);
  CHECK(r.lhs == doctest::Approx(0.0).scale(1.0));
  CHECK(r.rhs == doctest::Approx(0.0).scale(1.0));
  r = product_formula_check(e1, e1, space);
  CHECK(r.lhs == doctest::Approx(2.0));
  CHECK(r.rhs == doctest::Approx(2.0));

  std::mt19937_64 eng(5);
  std::uniform_int_distribution<int> num(-4, 4), den(1, 4);
  for (int p = 1; p <= 3; ++p)
    for (int m = 1; m <= 4; ++m) {
      auto sp = wiener_space(m, 2 * p);
      for (int trial = 0; trial < 4; ++trial) {
        SymTensor f(m, p), g(m, p);
        RawTensor shape(m, p);
        for (std::size_t k = 0; k < shape.size(); ++k) {
          auto idx = shape.unflatten(k);
          if (!std::is_sorted(idx.begin(), idx.end())) continue;
          f.set(idx, static_cast<double>(num(eng)) / den(eng));
          g.set(idx, static_cast<double>(num(eng)) / den(eng));
        }
        const auto c = product_formula_check(f, g, sp);
        CHECK(std::abs(c.lhs - c.rhs) <= 1e-10 * (1.0 + std::abs(c.lhs)));
      }
    }
}

TEST_CASE("self-paired contractions differ from the identity unless f = g") {
  std::mt19937_64 eng(6);
  for (int p = 2; p <= 3; ++p) {
    auto sp = wiener_space(3, 2 * p);
    const auto f = random_sym(3, p, eng);
    const auto g = random_sym(3, p, eng);
    const auto c = product_formula_check(f, g, sp);
    const double fg = f.inner(g);
    const double literal = 2 * std::pow(factorial(p), 2) * fg * fg + self_contraction_sum(f, g);
    CHECK(std::abs(literal - c.lhs) > 1e-3 * (1.0 + std::abs(c.lhs)));
    const auto cf = product_formula_check(f, f, sp);
    const double ff = f.norm2();
    CHECK(2 * std::pow(factorial(p), 2) * ff * ff + self_contraction_sum(f, f) ==
          doctest::Approx(cf.lhs).epsilon(1e-10));
  }
}
