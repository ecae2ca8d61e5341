// SPDX-License-Identifier: Apache-2.0

#include "gsgd/config.hpp"

#include <cmath>
#include <fstream>

#include "gsgd/rng.hpp"

namespace gsgd::harness {

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  json config;
  try {
    in >> config;
  } catch (const json::parse_error& e) {
    throw ConfigError("config: parse error in " + path + ": " + e.what());
  }
  if (!config.is_object()) throw ConfigError("config: top level must be an object");
  return config;
}

void check_allowed_keys(const json& obj, const std::string& context,
                        const std::set<std::string>& allowed) {
  for (const auto& item : obj.items()) {
    if (!allowed.contains(item.key()))
      throw ConfigError("config: unknown key '" + item.key() + "' in " + context);
  }
}

namespace {
double number_in_range(const json& v, const std::string& context, const std::string& key,
                       double lo, double hi) {
  if (!v.is_number())
    throw ConfigError("config: " + context + "." + key + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x) || x < lo || x > hi)
    throw ConfigError("config: " + context + "." + key + " = " + std::to_string(x) +
                      " out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return x;
}
}  // namespace

double get_number(const json& obj, const std::string& context, const std::string& key, double lo,
                  double hi) {
  if (!obj.contains(key)) throw ConfigError("config: missing key '" + key + "' in " + context);
  return number_in_range(obj.at(key), context, key, lo, hi);
}

double get_number_or(const json& obj, const std::string& context, const std::string& key,
                     double lo, double hi, double fallback) {
  if (!obj.contains(key)) return fallback;
  return number_in_range(obj.at(key), context, key, lo, hi);
}

std::uint64_t get_count(const json& obj, const std::string& context, const std::string& key,
                        std::uint64_t lo, std::uint64_t hi) {
  if (!obj.contains(key)) throw ConfigError("config: missing key '" + key + "' in " + context);
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.is_number_float())
    throw ConfigError("config: " + context + "." + key + " must be an integer");
  const auto x = v.get<std::int64_t>();
  if (x < 0 || static_cast<std::uint64_t>(x) < lo || static_cast<std::uint64_t>(x) > hi)
    throw ConfigError("config: " + context + "." + key + " out of range [" + std::to_string(lo) +
                      ", " + std::to_string(hi) + "]");
  return static_cast<std::uint64_t>(x);
}

std::uint64_t get_count_or(const json& obj, const std::string& context, const std::string& key,
                           std::uint64_t lo, std::uint64_t hi, std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  return get_count(obj, context, key, lo, hi);
}

std::string get_string(const json& obj, const std::string& context, const std::string& key) {
  if (!obj.contains(key)) throw ConfigError("config: missing key '" + key + "' in " + context);
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError("config: " + context + "." + key + " must be a string");
  return v.get<std::string>();
}

namespace {

WeightVector w_star_from_json(const json& spec, std::size_t dim) {
  if (!spec.contains("w_star")) return WeightVector(dim, 0.0);
  const json& v = spec.at("w_star");
  if (v.is_string()) {
    if (v.get<std::string>() == "zero") return WeightVector(dim, 0.0);
    throw ConfigError("config: problem.w_star string form must be \"zero\"");
  }
  if (!v.is_array() || v.size() != dim)
    throw ConfigError("config: problem.w_star must be \"zero\" or an array of length dim");
  WeightVector w(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    if (!v[i].is_number()) throw ConfigError("config: problem.w_star entries must be numbers");
    w[i] = v[i].get<double>();
    if (!std::isfinite(w[i])) throw ConfigError("config: problem.w_star entries must be finite");
  }
  return w;
}

problems::ScalarOfW scalar_fn_from_json(const json& spec, const std::string& context,
                                        const WeightVector& w_star) {
  check_allowed_keys(spec, context, {"kind", "value", "scale"});
  const std::string kind = get_string(spec, context, "kind");
  if (kind == "const") {
    const double value = get_number(spec, context, "value", -1e12, 1e12);
    return [value](const WeightVector&) { return value; };
  }
  if (kind == "dist-to-wstar") {
    const double scale = get_number_or(spec, context, "scale", 0.0, 1e12, 1.0);
    return [scale, w_star](const WeightVector& w) { return scale * distance(w, w_star); };
  }
  throw ConfigError("config: " + context + ".kind must be \"const\" or \"dist-to-wstar\"");
}

}  // namespace

problems::ProblemInstance problem_from_json(const json& spec) {
  if (!spec.is_object()) throw ConfigError("config: problem must be an object");
  check_allowed_keys(spec, "problem",
                     {"kind", "dim", "feature_radius", "label_noise_std", "w_star", "eps",
                      "delta", "smoothness"});
  const std::string kind = get_string(spec, "problem", "kind");
  const auto dim = static_cast<std::size_t>(get_count(spec, "problem", "dim", 1, 1000000));
  WeightVector w_star = w_star_from_json(spec, dim);

  if (kind == "noisy-least-squares" || kind == "realizable-least-squares") {
    const double radius = get_number_or(spec, "problem", "feature_radius", 1e-12, 1e12, 1.0);
    double sigma_y = 0.0;
    if (kind == "noisy-least-squares")
      sigma_y = get_number_or(spec, "problem", "label_noise_std", 0.0, 1e12, 1.0);
    else if (spec.contains("label_noise_std"))
      throw ConfigError("config: realizable-least-squares has no label_noise_std");
    return problems::ProblemInstance::noisy_least_squares(dim, radius, sigma_y,
                                                          std::move(w_star));
  }
  if (kind == "gaussian-error-model") {
    if (!spec.contains("eps") || !spec.contains("delta"))
      throw ConfigError("config: gaussian-error-model needs eps and delta blocks");
    auto eps = scalar_fn_from_json(spec.at("eps"), "problem.eps", w_star);
    auto delta = scalar_fn_from_json(spec.at("delta"), "problem.delta", w_star);
    const double L = get_number_or(spec, "problem", "smoothness", 1e-12, 1e12, 1.0);
    return problems::ProblemInstance::gaussian_error_model(dim, std::move(eps), std::move(delta),
                                                           std::move(w_star), L);
  }
  throw ConfigError("config: unknown problem.kind '" + kind + "'");
}

oracle::NoiseModel noise_from_json(const json& spec) {
  if (!spec.is_object()) throw ConfigError("config: noise must be an object");
  check_allowed_keys(spec, "noise", {"mode", "sigma", "zeta", "mu"});
  const std::string mode = get_string(spec, "noise", "mode");
  if (mode == "exact") {
    if (spec.contains("sigma") || spec.contains("zeta") || spec.contains("mu"))
      throw ConfigError("config: exact noise takes no sigma/zeta/mu");
    return oracle::NoiseModel::exact();
  }
  if (mode != "log-multiplicative")
    throw ConfigError("config: noise.mode must be \"exact\" or \"log-multiplicative\"");
  const double sigma = get_number(spec, "noise", "sigma", 0.0, 1e6);
  oracle::ZetaDist zeta = oracle::ZetaDist::StandardGaussian;
  if (spec.contains("zeta")) {
    const std::string z = get_string(spec, "noise", "zeta");
    if (z == "standard-gaussian")
      zeta = oracle::ZetaDist::StandardGaussian;
    else if (z == "rademacher")
      zeta = oracle::ZetaDist::Rademacher;
    else
      throw ConfigError("config: noise.zeta must be \"standard-gaussian\" or \"rademacher\"");
  }
  problems::ScalarOfW mu;
  if (spec.contains("mu")) {
    const json& m = spec.at("mu");
    check_allowed_keys(m, "noise.mu", {"kind", "value"});
    const std::string kind = get_string(m, "noise.mu", "kind");
    if (kind == "zero") {
      // default
    } else if (kind == "const") {
      const double value = get_number(m, "noise.mu", "value", -100.0, 100.0);
      mu = [value](const WeightVector&) { return value; };
    } else if (kind == "norm-scaled") {
      const double value = get_number(m, "noise.mu", "value", -100.0, 100.0);
      mu = [value](const WeightVector& w) { return value * norm(w); };
    } else {
      throw ConfigError("config: noise.mu.kind must be zero, const or norm-scaled");
    }
  }
  return oracle::NoiseModel::log_multiplicative(sigma, zeta, std::move(mu));
}

std::uint64_t config_digest(const json& config) {
  return numerics::hash_name(config.dump());
}

}  // namespace gsgd::harness
