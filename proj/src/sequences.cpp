#include "chaoskit/sequences.hpp"

#include <algorithm>
#include <cmath>

#include "chaoskit/error.hpp"

namespace chaoskit {

SpectralFn spread(const BasisKind& kind, int p, int n, int min_max_degree) {
  if (p < 1) throw DomainError("spread: p must be >= 1");
  if (n < 1) throw DomainError("spread: n must be >= 1");
  const auto space = ProductSpace::uniform(kind, std::max(2 * p, min_max_degree), static_cast<std::size_t>(n));
  SpectralFn f(space);
  const double c = 1.0 / std::sqrt(static_cast<double>(n));
  for (int k = 0; k < n; ++k) {
    MultiIndex alpha = space->zero_index();
    alpha.degrees[static_cast<std::size_t>(k)] = p;
    f.add(alpha, c);
  }
  return f;
}

PairSequence pair_mixed(int p1, int p2, double rho, int n, const BasisKind& kind) {
  if (p1 < 1 || p2 < 1) throw DomainError("pair_mixed: orders must be >= 1");
  if (n < 1) throw DomainError("pair_mixed: n must be >= 1");
  if (!(std::abs(rho) <= 1.0)) throw DomainError("pair_mixed: |rho| must not exceed 1");

  // Shift guards against ρ·n landing a rounding error above an integer.
  const int shared = std::clamp(static_cast<int>(std::ceil(std::abs(rho) * n - 1e-9)), 0, n);
  const int coords = 2 * n - shared;
  const auto space =
      ProductSpace::uniform(kind, 2 * std::max(p1, p2), static_cast<std::size_t>(coords));
  const double c = 1.0 / std::sqrt(static_cast<double>(n));
  const double sign = rho < 0.0 ? -1.0 : 1.0;

  auto term = [&](int coord, int p) {
    MultiIndex alpha = space->zero_index();
    alpha.degrees[static_cast<std::size_t>(coord)] = p;
    return alpha;
  };

  SpectralFn first(space);
  SpectralFn second(space);
  for (int k = 0; k < n; ++k) first.add(term(k, p1), c);
  for (int k = 0; k < shared; ++k) second.add(term(k, p2), sign * c);
  for (int k = n; k < coords; ++k) second.add(term(k, p2), c);

  PairSequence out{std::move(first), std::move(second)};
  out.rho_requested = rho;
  out.shared = shared;
  out.rho_realized = inner(out.first, out.second);
  out.rho_adjusted = std::abs(out.rho_realized - rho) > 1e-12;
  return out;
}

std::vector<SpectralFn> make_sequence(const SequenceSpec& spec, int n) {
  return std::visit(
      [n](const auto& s) -> std::vector<SpectralFn> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SpreadSpec>) {
          return {s.scale * spread(s.kind, s.p, n)};
        } else {
          auto pair = pair_mixed(s.p1, s.p2, s.rho, n, s.kind);
          return {std::move(pair.first), std::move(pair.second)};
        }
      },
      spec);
}

}  // namespace chaoskit
