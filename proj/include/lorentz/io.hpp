#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "lorentz/causal_space.hpp"
#include "lorentz/disintegration.hpp"
#include "lorentz/transport.hpp"

namespace lorentz {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

// FNV-1a, 64 bit.
std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t h);

// Spaces backed by a ModelSpacetime are written model-tagged (coords and
// weights only); all others carry explicit leq/tau matrices.
Json space_to_json(const FiniteCausalSpace& space);
FiniteCausalSpace space_from_json(const Json& j);
// Hash of coordinates, weights and the model tag or matrices.
std::string space_hash(const FiniteCausalSpace& space);

Json measure_to_json(const WeightedMeasure& mu);
WeightedMeasure measure_from_json(const Json& j);

Json coupling_to_json(const Coupling& c);
Coupling coupling_from_json(const Json& j);

Json achronal_to_json(const AchronalSet& V);
AchronalSet achronal_from_json(const Json& j);

Json rays_to_json(const RayDecomposition& rays);
RayDecomposition rays_from_json(const Json& j);

Json load_json(const std::string& path);
void save_json(const Json& j, const std::string& path);

void save_space(const FiniteCausalSpace& space, const std::string& path);
FiniteCausalSpace load_space(const std::string& path);
void save_coupling(const Coupling& c, const std::string& path);
Coupling load_coupling(const std::string& path);
void save_rays(const RayDecomposition& r, const std::string& path);
RayDecomposition load_rays(const std::string& path);

FiniteCausalSpace io_roundtrip(const FiniteCausalSpace& space, const std::string& path);
Coupling io_roundtrip(const Coupling& c, const std::string& path);
RayDecomposition io_roundtrip(const RayDecomposition& r, const std::string& path);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace lorentz
