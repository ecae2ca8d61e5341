// SPDX-License-Identifier: Apache-2.0

#include "gsgd/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gsgd::numerics {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace

std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += kGolden);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t mix64(std::uint64_t x) {
  std::uint64_t state = x;
  return splitmix64_next(state);
}

std::uint64_t hash_name(std::string_view name) {
  std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV offset basis
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001B3ULL;  // FNV prime
  }
  return h;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  std::uint64_t chain = mix64(seed) ^ mix64(stream_id ^ kGolden);
  for (auto& word : s_) word = splitmix64_next(chain);
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = kGolden;  // xoshiro forbids all-zero state
}

std::uint64_t RngStream::next_u64() {
  // xoshiro256++
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_double_open() {
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

double RngStream::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = next_double_open();
  const double u2 = next_double();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

double RngStream::gaussian(double mean, double std) { return mean + std * gaussian(); }

void RngStream::fill_gaussian(double* dst, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = gaussian();
}

int RngStream::rademacher() { return (next_u64() & 1ULL) ? 1 : -1; }

RngStream RngStream::substream(std::uint64_t index) const {
  return RngStream(seed_, mix64(stream_id_ ^ mix64(index + 1)));
}

RngStream RngStream::substream(std::string_view name) const {
  return RngStream(seed_, mix64(stream_id_ ^ hash_name(name)));
}

double sample_gaussian(RngStream& rng, double mean, double std) {
  if (std < 0.0) throw std::invalid_argument("sample_gaussian: std must be >= 0");
  return rng.gaussian(mean, std);
}

std::vector<double> sample_gaussian_vector(RngStream& rng, std::size_t d, double cov_scale) {
  if (cov_scale < 0.0) throw std::invalid_argument("sample_gaussian_vector: cov_scale must be >= 0");
  const double std = std::sqrt(cov_scale);
  std::vector<double> v(d);
  for (auto& x : v) x = rng.gaussian(0.0, std);
  return v;
}

}  // namespace gsgd::numerics
