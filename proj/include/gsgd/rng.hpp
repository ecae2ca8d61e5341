// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace gsgd::numerics {

// 64-bit mix from the splitmix64 generator (Vigna). Used both as the RNG
// seeding chain and as the stable stream-id combiner.
std::uint64_t splitmix64_next(std::uint64_t& state);
std::uint64_t mix64(std::uint64_t x);

// FNV-1a over bytes; stable hash for named substreams.
std::uint64_t hash_name(std::string_view name);

// Seeded, platform-stable random stream. The core generator is
// xoshiro256++ (Blackman & Vigna) whose four state words are filled from a
// splitmix64 chain keyed by (seed, stream_id). Identical (seed, stream_id)
// reproduces the identical u64 sequence everywhere; distinct stream_ids
// give statistically independent streams.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64();
  double next_double();       // uniform on [0, 1), 53-bit
  double next_double_open();  // uniform on (0, 1]
  double uniform(double lo, double hi);

  double gaussian();  // standard normal, Box-Muller with cached spare
  double gaussian(double mean, double std);
  void fill_gaussian(double* dst, std::size_t n);
  int rademacher();  // +1 or -1, equiprobable

  // Child stream derived by index or by stable name hash. Derivation mixes
  // into the stream id only, so children of equal (seed, id, key) coincide.
  RngStream substream(std::uint64_t index) const;
  RngStream substream(std::string_view name) const;

 private:
  std::uint64_t s_[4];
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Draw from N(mean, std^2); std == 0 returns mean exactly.
double sample_gaussian(RngStream& rng, double mean, double std);

// Draw from N(0, cov_scale * I_d); cov_scale is the per-coordinate variance.
std::vector<double> sample_gaussian_vector(RngStream& rng, std::size_t d, double cov_scale);

}  // namespace gsgd::numerics
