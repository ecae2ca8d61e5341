// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <set>
#include <string>

#include <json.hpp>

#include "gsgd/oracle.hpp"
#include "gsgd/problems.hpp"

namespace gsgd::harness {

using nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

json load_config(const std::string& path);

// Rejects keys outside `allowed`; every schema object is closed.
void check_allowed_keys(const json& obj, const std::string& context,
                        const std::set<std::string>& allowed);

double get_number(const json& obj, const std::string& context, const std::string& key,
                  double lo, double hi);
double get_number_or(const json& obj, const std::string& context, const std::string& key,
                     double lo, double hi, double fallback);
std::uint64_t get_count(const json& obj, const std::string& context, const std::string& key,
                        std::uint64_t lo, std::uint64_t hi);
std::uint64_t get_count_or(const json& obj, const std::string& context, const std::string& key,
                           std::uint64_t lo, std::uint64_t hi, std::uint64_t fallback);
std::string get_string(const json& obj, const std::string& context, const std::string& key);

problems::ProblemInstance problem_from_json(const json& spec);
oracle::NoiseModel noise_from_json(const json& spec);

// FNV-1a over the canonical (sorted-key) serialization.
std::uint64_t config_digest(const json& config);

}  // namespace gsgd::harness
