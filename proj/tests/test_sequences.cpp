#include <doctest.h>

#include <cmath>

#include "chaoskit/error.hpp"
#include "chaoskit/moments.hpp"
#include "chaoskit/sequences.hpp"

using namespace chaoskit;

TEST_CASE("spread closed forms (hermite, p = 2)") {
  for (int n = 1; n <= 12; ++n) {
    const auto f = spread(BasisKind::hermite(), 2, n);
    CHECK(f.norm2() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(moment4(f) - (3.0 + 12.0 / n)) <= 1e-9);
    CHECK(std::abs(var_gamma(f, f) - 8.0 / n) <= 1e-9);
    CHECK(eigenfunction_eigenvalue(f).value() == 2.0);
  }
  for (int n = 1; n <= 6; ++n) CHECK(moment4(spread(BasisKind::hermite(), 1, n)) == doctest::Approx(3.0));
}

TEST_CASE("fourth moment expansion across families") {
  for (const auto& kind : {BasisKind::hermite(), BasisKind::laguerre(0.0), BasisKind::jacobi(2, 2)}) {
    CAPTURE(kind.label());
    for (int p = 1; p <= 3; ++p) {
      const double m4g = moment4(spread(kind, p, 1));
      for (int n = 1; n <= 12; ++n) {
        const auto f = spread(kind, p, n);
        CHECK(moment4(f) - 3.0 == doctest::Approx((m4g - 3.0) / n).epsilon(1e-10).scale(1.0));
      }
    }
  }
}

TEST_CASE("spread components are chaotic for hermite and laguerre") {
  for (const auto& kind : {BasisKind::hermite(), BasisKind::laguerre(0.0)})
    for (int p = 1; p <= 3; ++p)
      for (int n : {1, 3}) CHECK(is_chaotic(spread(kind, p, n)).chaotic);
  CHECK_FALSE(is_chaotic(spread(BasisKind::jacobi(2, 2), 1, 2)).chaotic);
}

TEST_CASE("pair_mixed covariances") {
  for (int n : {1, 3, 8}) {
    auto z = pair_mixed(2, 2, 0.0, n);
    CHECK(inner(z.first, z.second) == 0.0);
    CHECK(z.shared == 0);
    auto one = pair_mixed(2, 2, 1.0, n);
    CHECK((one.first - one.second).norm() <= 1e-15);
    CHECK(one.rho_realized == doctest::Approx(1.0));
    auto neg = pair_mixed(2, 2, -1.0, n);
    CHECK((neg.first + neg.second).norm() <= 1e-15);
    auto mixed = pair_mixed(1, 2, 0.5, n);
    CHECK(inner(mixed.first, mixed.second) == 0.0);
    CHECK(mixed.rho_realized == 0.0);
    CHECK(mixed.rho_adjusted);
  }
  auto h = pair_mixed(2, 2, 0.5, 8);
  CHECK(h.shared == 4);
  CHECK(h.rho_realized == doctest::Approx(0.5));
  CHECK_FALSE(h.rho_adjusted);
  CHECK(h.first.norm2() == doctest::Approx(1.0));
  CHECK(h.second.norm2() == doctest::Approx(1.0));
  auto odd = pair_mixed(2, 2, 0.5, 3);
  CHECK(odd.shared == 2);
  CHECK(odd.rho_realized == doctest::Approx(2.0 / 3));
  CHECK(odd.rho_adjusted);
  CHECK_THROWS_AS(pair_mixed(2, 2, 1.5, 3), DomainError);
}

TEST_CASE("pair_mixed mixed moments approach Isserlis") {
  const double m4g = moment4(spread(BasisKind::hermite(), 2, 1));
  double prev = INFINITY;
  for (int n : {2, 4, 8, 16, 32, 64}) {
    auto pr = pair_mixed(2, 2, 0.5, n);
    const double rho = pr.rho_realized;
    const double m22 = mixed22(pr.first, pr.second);
    CHECK(m22 == doctest::Approx(1.0 + 2 * rho * rho + std::abs(rho) * (m4g - 3.0) / n).epsilon(1e-12));
    Eigen::MatrixXd c(2, 2);
    c << 1, rho, rho, 1;
    const double err = std::abs(m22 - gaussian_mixed(GaussianTarget(c), 0, 1));
    CHECK(err < prev);
    prev = err;
    const std::vector<SpectralFn> v{pr.first, pr.second};
    CHECK(is_chaotic_vector(v).chaotic);
  }
}

TEST_CASE("make_sequence") {
  CHECK(make_sequence(SpreadSpec{BasisKind::hermite(), 2, 0.5}, 3)[0].norm2() == doctest::Approx(0.25));
  CHECK(make_sequence(PairMixedSpec{2, 2, 0.5, BasisKind::hermite()}, 4).size() == 2);
  CHECK_THROWS_AS(spread(BasisKind::hermite(), 0, 3), DomainError);
}
