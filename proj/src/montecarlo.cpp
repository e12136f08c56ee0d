#include "chaoskit/montecarlo.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "chaoskit/error.hpp"
#include "chaoskit/parallel.hpp"

namespace chaoskit {

namespace {

constexpr std::size_t kRowsPerTask = 1024;

std::mt19937_64 row_engine(std::uint64_t seed, std::uint64_t row) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(row), static_cast<std::uint32_t>(row >> 32)};
  return std::mt19937_64(seq);
}

double draw(const BasisKind& kind, std::mt19937_64& eng) {
  switch (kind.family) {
    case Family::Hermite:
      return std::normal_distribution<double>(0.0, 1.0)(eng);
    case Family::Laguerre:
      return std::gamma_distribution<double>(kind.alpha + 1.0, 1.0)(eng);
    case Family::Jacobi: {
      // Density ∝ (1−x)^{a−1}(1+x)^{b−1}: (1+x)/2 ~ Beta(b, a).
      const double g1 = std::gamma_distribution<double>(kind.b, 1.0)(eng);
      const double g2 = std::gamma_distribution<double>(kind.a, 1.0)(eng);
      return 2.0 * g1 / (g1 + g2) - 1.0;
    }
  }
  return 0.0;
}

template <class Fn>
void for_row_blocks(std::size_t n, Fn&& fn) {
  const std::size_t blocks = (n + kRowsPerTask - 1) / kRowsPerTask;
  parallel_for(blocks, [&](std::size_t b) {
    const std::size_t begin = b * kRowsPerTask;
    fn(begin, std::min(n, begin + kRowsPerTask));
  });
}

}  // namespace

SampleBatch::SampleBatch(SpacePtr space, std::size_t n_samples, std::uint64_t seed)
    : space_(std::move(space)), n_samples_(n_samples), seed_(seed) {
  if (!space_) throw DomainError("SampleBatch needs a space");
  points_.assign(n_samples_ * space_->dim(), 0.0);
}

std::vector<double> SampleBatch::column(std::size_t j) const {
  if (j >= dim()) throw DomainError("column index out of range");
  std::vector<double> out(n_samples_);
  for (std::size_t i = 0; i < n_samples_; ++i) out[i] = points_[i * dim() + j];
  return out;
}

SampleBatch sample(SpacePtr space, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw DomainError("sample: need at least one sample");
  SampleBatch batch(std::move(space), n, seed);
  const std::size_t d = batch.dim();
  for_row_blocks(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      auto eng = row_engine(seed, r);
      for (std::size_t j = 0; j < d; ++j) batch.points_[r * d + j] = draw(batch.space_->coord(j).kind(), eng);
    }
  });
  return batch;
}

std::vector<double> evaluate(const SpectralFn& f, const SampleBatch& batch) {
  if (!(*batch.space() == f.product_space())) throw SpaceMismatch("evaluate: batch and function spaces differ");
  const ProductSpace& space = f.product_space();
  const std::size_t d = space.dim();
  const auto top = f.max_degrees();

  struct Term {
    double coeff;
    std::vector<std::pair<std::size_t, std::size_t>> factors;  // (coordinate, degree)
  };
  std::vector<Term> terms;
  terms.reserve(f.size());
  for (const auto& [alpha, c] : f.coeffs()) {
    Term t{c, {}};
    for (std::size_t i = 0; i < d; ++i)
      if (alpha[i] != 0) t.factors.emplace_back(i, static_cast<std::size_t>(alpha[i]));
    terms.push_back(std::move(t));
  }
  std::vector<std::size_t> used;
  for (std::size_t i = 0; i < d; ++i)
    if (top[i] > 0) used.push_back(i);

  std::vector<double> out(batch.n_samples());
  for_row_blocks(batch.n_samples(), [&](std::size_t begin, std::size_t end) {
    std::vector<std::vector<double>> q(d);
    for (const std::size_t i : used) q[i].resize(static_cast<std::size_t>(top[i]) + 1);
    for (std::size_t r = begin; r < end; ++r) {
      const auto x = batch.row(r);
      for (const std::size_t i : used) space.coord(i).evaluate_all(x[i], q[i]);
      double total = 0.0;
      for (const auto& t : terms) {
        double v = t.coeff;
        for (const auto& [i, k] : t.factors) v *= q[i][k];
        total += v;
      }
      out[r] = total;
    }
  });
  return out;
}

Estimate estimate_moment(std::span<const double> values, int power) {
  if (values.empty()) throw DomainError("estimate_moment: no values");
  const double n = static_cast<double>(values.size());
  double s = 0.0;
  double s2 = 0.0;
  for (const double v : values) {
    const double y = std::pow(v, power);
    s += y;
    s2 += y * y;
  }
  Estimate e;
  e.mean = s / n;
  const double var = values.size() > 1 ? std::max(0.0, (s2 - n * e.mean * e.mean) / (n - 1.0)) : 0.0;
  e.std_error = std::sqrt(var / n);
  return e;
}

CfGap cf_gap_from_values(std::span<const std::vector<double>> values, const GaussianTarget& c,
                         std::span<const double> t) {
  if (t.size() != values.size() || t.size() != c.dim()) throw DomainError("cf_gap: dimension mismatch");
  if (values.empty() || values[0].empty()) throw DomainError("cf_gap: no samples");
  const std::size_t n = values[0].size();
  for (const auto& v : values)
    if (v.size() != n) throw DomainError("cf_gap: components have different sample counts");

  double sc = 0.0, ss = 0.0, sc2 = 0.0, ss2 = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    double theta = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) theta += t[i] * values[i][r];
    const double co = std::cos(theta);
    const double si = std::sin(theta);
    sc += co;
    ss += si;
    sc2 += co * co;
    ss2 += si * si;
  }
  const double nn = static_cast<double>(n);
  CfGap out;
  out.empirical = {sc / nn, ss / nn};
  double quad = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = 0; j < t.size(); ++j) quad += t[i] * c(i, j) * t[j];
  out.target = std::exp(-0.5 * quad);
  out.gap = std::abs(out.empirical - std::complex<double>(out.target, 0.0));
  const double var_c = std::max(0.0, sc2 / nn - out.empirical.real() * out.empirical.real());
  const double var_s = std::max(0.0, ss2 / nn - out.empirical.imag() * out.empirical.imag());
  out.std_error = std::sqrt((var_c + var_s) / nn);
  return out;
}

CfGap cf_gap(std::span<const SpectralFn> fs, const GaussianTarget& c, std::span<const double> t,
             const SampleBatch& batch) {
  if (t.size() != fs.size()) throw DomainError("cf_gap: t must have one entry per component");
  std::vector<std::vector<double>> values;
  values.reserve(fs.size());
  for (const auto& f : fs) values.push_back(evaluate(f, batch));
  return cf_gap_from_values(values, c, t);
}

double measure_cdf(const BasisKind& kind, double x) {
  switch (kind.family) {
    case Family::Hermite:
      return 0.5 * std::erfc(-x / std::sqrt(2.0));
    case Family::Laguerre:
      return x <= 0.0 ? 0.0 : boost::math::gamma_p(kind.alpha + 1.0, x);
    case Family::Jacobi: {
      if (x <= -1.0) return 0.0;
      if (x >= 1.0) return 1.0;
      return boost::math::ibeta(kind.b, kind.a, 0.5 * (x + 1.0));
    }
  }
  return 0.0;
}

KsResult ks_test(std::vector<double> draws, const BasisKind& kind) {
  if (draws.empty()) throw DomainError("ks_test: no draws");
  std::sort(draws.begin(), draws.end());
  const double n = static_cast<double>(draws.size());
  double d = 0.0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const double cdf = measure_cdf(kind, draws[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - cdf, cdf - static_cast<double>(i) / n});
  }
  // Asymptotic Kolmogorov distribution with Stephens' small-sample correction.
  const double sn = std::sqrt(n);
  const double lam = (sn + 0.12 + 0.11 / sn) * d;
  double p = 0.0;
  if (lam < 0.2) {
    p = 1.0;
  } else {
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
      const double term = sign * std::exp(-2.0 * k * k * lam * lam);
      p += term;
      if (std::abs(term) < 1e-16) break;
      sign = -sign;
    }
    p = std::clamp(2.0 * p, 0.0, 1.0);
  }
  return {d, p};
}

}  // namespace chaoskit
