#include "chaoskit/serialize.hpp"

#include <cmath>

#include "chaoskit/error.hpp"

namespace chaoskit {

using nlohmann::json;

json basis_to_json(const Basis& basis) {
  return json{{"kind", basis.kind().family_name()},
              {"params", basis.kind().params()},
              {"max_degree", basis.max_degree()}};
}

BasisPtr basis_from_json(const json& j) {
  try {
    const auto params = j.value("params", std::vector<double>{});
    const auto kind = BasisKind::from_name(j.at("kind").get<std::string>(), params);
    return make_basis(kind, j.at("max_degree").get<int>());
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed basis description: ") + e.what());
  }
}

json space_to_json(const ProductSpace& space) {
  json arr = json::array();
  for (const auto& c : space.coords()) arr.push_back(basis_to_json(*c));
  return arr;
}

SpacePtr space_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw DomainError("space must be a non-empty array of bases");
  // Coordinates with identical descriptions share one Basis (and its caches).
  std::vector<BasisPtr> coords;
  std::vector<std::pair<json, BasisPtr>> seen;
  for (const auto& item : j) {
    BasisPtr found;
    for (const auto& [desc, ptr] : seen)
      if (desc == item) found = ptr;
    if (!found) {
      found = basis_from_json(item);
      seen.emplace_back(item, found);
    }
    coords.push_back(found);
  }
  return std::make_shared<const ProductSpace>(std::move(coords));
}

json to_json(const SpectralFn& f) {
  json coeffs = json::array();
  for (const auto& [alpha, c] : f.coeffs()) {
    if (!std::isfinite(c)) throw DomainError("cannot serialize a non-finite coefficient");
    coeffs.push_back(json::array({alpha.degrees, c}));
  }
  return json{{"space", space_to_json(f.product_space())}, {"coeffs", std::move(coeffs)}};
}

SpectralFn spectral_fn_from_json(const json& j) {
  try {
    SpectralFn f(space_from_json(j.at("space")));
    for (const auto& entry : j.at("coeffs")) {
      if (!entry.is_array() || entry.size() != 2) throw DomainError("coefficient entries are [degrees, value]");
      f.add(MultiIndex(entry[0].get<std::vector<int>>()), entry[1].get<double>());
    }
    return f;
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed SpectralFn: ") + e.what());
  }
}

}  // namespace chaoskit
