#pragma once

#include <cstdint>
#include <random>

namespace sweepsim {

/// A reproducible random stream. (seed, stream_id) fully determines every
/// draw; distinct stream ids give independent engines seeded through a
/// SplitMix64 expansion. Owned by one simulation at a time.
class RngStream {
 public:
  using engine_type = std::mt19937_64;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  engine_type& engine() { return engine_; }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }
  /// Exponential waiting time with the given rate (rate > 0).
  double exponential(double rate);
  std::int64_t poisson(double mean);
  double normal() { return normal_(engine_); }
  bool bernoulli(double p) { return uniform() < p; }
  /// Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n);

  /// A child stream for a nested computation, deterministic in (seed, stream_id, tag).
  RngStream split(std::uint64_t tag) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  engine_type engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace sweepsim
