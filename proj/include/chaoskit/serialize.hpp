#pragma once

#include <json.hpp>

#include "chaoskit/spectral.hpp"

namespace chaoskit {

/// {"kind": "jacobi", "params": [a, b], "max_degree": n}
nlohmann::json basis_to_json(const Basis& basis);
BasisPtr basis_from_json(const nlohmann::json& j);

/// Array of basis objects, one per coordinate.
nlohmann::json space_to_json(const ProductSpace& space);
SpacePtr space_from_json(const nlohmann::json& j);

/// {"space": [...], "coeffs": [[[degrees...], value], ...]}.
/// Doubles are written in shortest round-trip form, so parsing the output
/// reproduces every finite coefficient bit for bit.
nlohmann::json to_json(const SpectralFn& f);
SpectralFn spectral_fn_from_json(const nlohmann::json& j);

}  // namespace chaoskit
