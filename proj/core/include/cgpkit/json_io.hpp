#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "cgpkit/analysis.hpp"
#include "cgpkit/cgp.hpp"
#include "cgpkit/kernels.hpp"

namespace cgpkit {

using Json = nlohmann::json;

/// {"family", "params": {name: value}, "noise_var"}; natural-space values.
/// Errors are ConfigError carrying the JSON pointer of the offending field,
/// prefixed with `where`.
Json to_json(const KernelSpec& spec);
KernelSpec kernel_from_json(const Json& j, const std::string& where = "");

/// {"family": "Zero"} or {"family": "Linear", "slope", "intercept"}.
Json to_json(const MeanSpec& mean);
MeanSpec mean_from_json(const Json& j, const std::string& where = "");

Json to_json(const Inputs& X);
Inputs inputs_from_json(const Json& j, const std::string& where = "");
Json to_json_vector(const Vector& v);
Vector vector_from_json(const Json& j, const std::string& where = "");

/// Checkpoint {"test_X", "mean", "covariance" (row-major, flat), "k"} plus the
/// prior so the state resumes exactly.
Json snapshot_to_json(const CgpState& state);
CgpState snapshot_from_json(const Json& j);

Json to_json(const McEstimate& e);
Json to_json(const ExcessMseReport& r);
Json to_json(const InfoReport& r);

/// Typed field access with ConfigError on absence or wrong type.
double get_number(const Json& j, const std::string& key, const std::string& where);
std::size_t get_count(const Json& j, const std::string& key, const std::string& where);

/// 16 hex digits of FNV-1a over the canonical dump.
std::string config_hash(const Json& j);

}  // namespace cgpkit
