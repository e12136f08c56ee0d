#pragma once

#include <variant>

#include "chaoskit/spectral.hpp"

namespace chaoskit {

/// F_n = scale · n^{−1/2} Σ_{k=1..n} Q_p(X_k) on n fresh coordinates of `kind`.
struct SpreadSpec {
  BasisKind kind;
  int p = 1;
  double scale = 1.0;
};

/// Two spread-type components on shared + fresh coordinates of `kind`; see pair_mixed.
struct PairMixedSpec {
  int p1 = 1;
  int p2 = 1;
  double rho = 0.0;
  BasisKind kind;
};

using SequenceSpec = std::variant<SpreadSpec, PairMixedSpec>;

/// Coordinates carry max_degree = max(2p, min_max_degree), enough headroom for F², Γ(F,F).
SpectralFn spread(const BasisKind& kind, int p, int n, int min_max_degree = 0);

struct PairSequence {
  SpectralFn first;
  SpectralFn second;
  double rho_requested = 0.0;
  double rho_realized = 0.0;  // exact ∫F_1F_2 dμ
  int shared = 0;             // coordinates used by both components
  /// Set when the realized covariance differs from the request (different orders, or
  /// ρ·n not an integer).
  bool rho_adjusted = false;
};

/// F_1 = n^{−1/2} Σ_{k<n} Q_{p1}(X_k);
/// F_2 = n^{−1/2} (sign(ρ) Σ_{k<s} Q_{p2}(X_k) + Σ_{fresh} Q_{p2}(X_k)) with s = ⌈|ρ|n⌉ shared
/// coordinates and n−s fresh ones. Covariance is s/n·sign(ρ) when p1 = p2, 0 otherwise.
PairSequence pair_mixed(int p1, int p2, double rho, int n, const BasisKind& kind = BasisKind::hermite());

/// Components of the n-th element: one for SpreadSpec, two for PairMixedSpec.
std::vector<SpectralFn> make_sequence(const SequenceSpec& spec, int n);

}  // namespace chaoskit
