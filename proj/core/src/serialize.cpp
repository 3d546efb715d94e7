#include <algorithm>
#include <cmath>
#include <cstdio>

#include "cgpkit/errors.hpp"
#include "cgpkit/json_io.hpp"

namespace cgpkit {

namespace {

const Json& field(const Json& j, const std::string& key, const std::string& where) {
  if (!j.is_object()) throw ConfigError("expected an object", where.empty() ? "/" : where);
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError("missing field '" + key + "'", where + "/" + key);
  return *it;
}

}  // namespace

double get_number(const Json& j, const std::string& key, const std::string& where) {
  const Json& v = field(j, key, where);
  if (!v.is_number()) throw ConfigError("'" + key + "' must be a number", where + "/" + key);
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError("'" + key + "' must be finite", where + "/" + key);
  return d;
}

std::size_t get_count(const Json& j, const std::string& key, const std::string& where) {
  const Json& v = field(j, key, where);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError("'" + key + "' must be a non-negative integer", where + "/" + key);
  }
  return v.get<std::size_t>();
}

Json to_json(const KernelSpec& spec) {
  Json params = Json::object();
  for (std::size_t i = 0; i < spec.params.names.size(); ++i) {
    params[spec.params.names[i]] = std::exp(spec.params.values[static_cast<Index>(i)]);
  }
  return {{"family", std::string(to_string(spec.family))},
          {"params", params},
          {"noise_var", spec.params.noise_var()}};
}

KernelSpec kernel_from_json(const Json& j, const std::string& where) {
  const Json& fam = field(j, "family", where);
  if (!fam.is_string()) throw ConfigError("'family' must be a string", where + "/family");
  KernelFamily family;
  try {
    family = kernel_family_from_string(fam.get<std::string>());
  } catch (const Error& e) {
    throw ConfigError(e.what(), where + "/family");
  }
  const Json& params = field(j, "params", where);
  const std::string ppath = where + "/params";
  const auto& names = kernel_param_names(family);
  if (!params.is_object()) throw ConfigError("'params' must be an object", ppath);
  for (const auto& [key, _] : params.items()) {
    if (std::find(names.begin(), names.end(), key) == names.end()) {
      throw ConfigError("unknown parameter '" + key + "'", ppath + "/" + key);
    }
  }
  KernelSpec spec;
  spec.family = family;
  spec.params.names = names;
  spec.params.values.resize(static_cast<Index>(names.size()));
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double v = get_number(params, names[i], ppath);
    if (v <= 0.0) throw ConfigError("'" + names[i] + "' must be positive", ppath + "/" + names[i]);
    spec.params.values[static_cast<Index>(i)] = std::log(v);
  }
  const double noise = get_number(j, "noise_var", where);
  if (noise <= 0.0) throw ConfigError("'noise_var' must be positive", where + "/noise_var");
  spec.params.noise_logvar = std::log(noise);
  return spec;
}

Json to_json(const MeanSpec& mean) {
  if (mean.family == MeanFamily::Zero) return {{"family", "Zero"}};
  return {{"family", "Linear"}, {"slope", mean.slope}, {"intercept", mean.intercept}};
}

MeanSpec mean_from_json(const Json& j, const std::string& where) {
  const Json& fam = field(j, "family", where);
  if (fam == "Zero") return {};
  if (fam == "Linear") {
    return {MeanFamily::Linear, get_number(j, "slope", where), get_number(j, "intercept", where)};
  }
  throw ConfigError("mean family must be \"Zero\" or \"Linear\"", where + "/family");
}

Json to_json(const Inputs& X) {
  Json rows = Json::array();
  for (Index i = 0; i < X.rows(); ++i) {
    Json r = Json::array();
    for (Index c = 0; c < X.cols(); ++c) r.push_back(X(i, c));
    rows.push_back(std::move(r));
  }
  return rows;
}

Inputs inputs_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError("expected a non-empty array of rows", where);
  const std::size_t cols = j[0].is_array() ? j[0].size() : 1;
  Inputs X(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = where + "/" + std::to_string(i);
    const Json& row = j[i];
    if (row.is_number()) {
      if (cols != 1) throw ConfigError("ragged input rows", p);
      X(static_cast<Index>(i), 0) = row.get<double>();
      continue;
    }
    if (!row.is_array() || row.size() != cols) throw ConfigError("ragged input rows", p);
    for (std::size_t c = 0; c < cols; ++c) {
      if (!row[c].is_number()) throw ConfigError("expected a number", p + "/" + std::to_string(c));
      X(static_cast<Index>(i), static_cast<Index>(c)) = row[c].get<double>();
    }
  }
  return X;
}

Json to_json_vector(const Vector& v) { return Json(std::vector<double>(v.begin(), v.end())); }

Vector vector_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError("expected an array of numbers", where);
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError("expected a number", where + "/" + std::to_string(i));
    v[static_cast<Index>(i)] = j[i].get<double>();
  }
  return v;
}

namespace {

Json flat(const Matrix& m) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m.size()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index c = 0; c < m.cols(); ++c) out.push_back(m(i, c));
  }
  return out;
}

Matrix unflat(const Json& j, Index n, const std::string& where) {
  const Vector v = vector_from_json(j, where);
  if (v.size() != n * n) throw ConfigError("covariance must have dim^2 entries", where);
  Matrix m(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < n; ++c) m(i, c) = v[i * n + c];
  }
  return m;
}

}  // namespace

Json snapshot_to_json(const CgpState& state) {
  return {{"test_X", to_json(state.test_inputs())},
          {"mean", to_json_vector(state.current().mean)},
          {"covariance", flat(state.current().cov.matrix())},
          {"k", state.segments_seen()},
          {"prior_mean", to_json_vector(state.prior().mean)},
          {"prior_covariance", flat(state.prior().cov.matrix())}};
}

CgpState snapshot_from_json(const Json& j) {
  Inputs X = inputs_from_json(field(j, "test_X", ""), "/test_X");
  const Index n = X.rows();
  Vector mean = vector_from_json(field(j, "mean", ""), "/mean");
  Vector prior_mean = vector_from_json(field(j, "prior_mean", ""), "/prior_mean");
  if (mean.size() != n || prior_mean.size() != n) {
    throw ConfigError("mean length differs from the number of test inputs", "/mean");
  }
  Matrix cov = unflat(field(j, "covariance", ""), n, "/covariance");
  Matrix prior_cov = unflat(field(j, "prior_covariance", ""), n, "/prior_covariance");
  return CgpState::resume({std::move(prior_mean), PsdMatrix(prior_cov)}, std::move(X),
                          {std::move(mean), PsdMatrix(cov)}, get_count(j, "k", ""));
}

Json to_json(const McEstimate& e) {
  return {{"mean", e.mean}, {"std_error", e.std_error}, {"draws", e.draws}};
}

Json to_json(const ExcessMseReport& r) {
  Json j = {{"closed_form", r.closed_form},
            {"alpha1", to_json_vector(r.alpha1)},
            {"alpha2", to_json_vector(r.alpha2)},
            {"gp_coeffs", to_json(r.gp_coeffs)},
            {"cgp_coeffs", to_json(r.cgp_coeffs)},
            {"prior_var", r.prior_var},
            {"posterior_var", r.posterior_var},
            {"posterior_var_seg1", r.posterior_var_seg1}};
  j["monte_carlo"] = r.monte_carlo ? to_json(*r.monte_carlo) : Json(nullptr);
  return j;
}

Json to_json(const InfoReport& r) {
  return {{"mi_full", r.mi_full},
          {"mi_segments", r.mi_segments},
          {"gap", r.gap},
          {"verdict", std::string(to_string(r.verdict))}};
}

std::string config_hash(const Json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace cgpkit
