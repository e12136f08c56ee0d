#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "chaoskit/moments.hpp"
#include "chaoskit/spectral.hpp"

namespace chaoskit {

/// i.i.d. draws from the invariant measure of a product space, row-major.
class SampleBatch {
 public:
  SampleBatch(SpacePtr space, std::size_t n_samples, std::uint64_t seed);

  const SpacePtr& space() const { return space_; }
  std::size_t n_samples() const { return n_samples_; }
  std::size_t dim() const { return space_->dim(); }
  std::uint64_t seed() const { return seed_; }

  std::span<const double> row(std::size_t i) const { return {points_.data() + i * dim(), dim()}; }
  std::vector<double> column(std::size_t j) const;
  std::span<const double> data() const { return points_; }

 private:
  friend SampleBatch sample(SpacePtr space, std::size_t n, std::uint64_t seed);

  SpacePtr space_;
  std::size_t n_samples_;
  std::uint64_t seed_;
  std::vector<double> points_;
};

/// Row r is drawn from its own generator seeded by (seed, r), so the batch is
/// identical for any thread count. Coordinates: N(0,1), Gamma(α+1,1), or the
/// affine image on [−1,1] of Beta(b, a) for Jacobi(a, b).
SampleBatch sample(SpacePtr space, std::size_t n, std::uint64_t seed);

/// Pointwise values of F at every row.
std::vector<double> evaluate(const SpectralFn& f, const SampleBatch& batch);

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / √n
};

/// Mean and standard error of values^power.
Estimate estimate_moment(std::span<const double> values, int power);

struct CfGap {
  double gap = 0.0;     // |empirical CF − exp(−t'Ct/2)|
  double std_error = 0.0;  // √((Var cos + Var sin) / n)
  std::complex<double> empirical;
  double target = 1.0;
};

CfGap cf_gap(std::span<const SpectralFn> fs, const GaussianTarget& c, std::span<const double> t,
             const SampleBatch& batch);

/// Same, reusing per-component values already computed by evaluate().
CfGap cf_gap_from_values(std::span<const std::vector<double>> values, const GaussianTarget& c,
                         std::span<const double> t);

/// Distribution function of a coordinate's invariant measure.
double measure_cdf(const BasisKind& kind, double x);

struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
};

/// One-sample Kolmogorov–Smirnov test of draws against measure_cdf(kind, ·).
KsResult ks_test(std::vector<double> draws, const BasisKind& kind);

}  // namespace chaoskit
