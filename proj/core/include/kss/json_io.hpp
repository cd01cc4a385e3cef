#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "kss/conditional.hpp"
#include "kss/moments.hpp"
#include "kss/sampler.hpp"
#include "kss/spectrum.hpp"
#include "kss/zerocount.hpp"

namespace kss {

using Json = nlohmann::json;

/// {"terms": [{"p": 2, "w": 1.0}, ...]}. Structural problems raise
/// ConfigError naming the field path (prefixed by `where`); invariant
/// violations raise DomainError from the spectrum itself.
MixedSpectrum spectrum_from_json(const Json& j, const std::string& where = "spectrum");
Json to_json(const MixedSpectrum& spectrum);

/// {"N": 4, "K": 4, "spectra": [...]}.
SystemSpec system_spec_from_json(const Json& j, const std::string& where = "system");
Json to_json(const SystemSpec& spec);

/// {"N": .., "seed": .., "equations": [[{"alpha": [..], "c": ..}, ...], ...]}.
PolynomialSystem polynomial_system_from_json(const Json& j);
Json to_json(const PolynomialSystem& system);

Json to_json(const MomentReport& report);
Json to_json(const KacRiceReport& report);
Json to_json(const ZeroCountResult& result, bool with_roots = false);
Json to_json(const EmpiricalMoments& moments);

/// 64-bit FNV-1a of the compact dump, as 16 hex digits.
std::string config_hash(const Json& config);

}  // namespace kss
