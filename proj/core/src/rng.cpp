#include "sweepsim/rng.h"

#include <array>
#include <cmath>
#include <stdexcept>

namespace sweepsim {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

RngStream::engine_type make_engine(std::uint64_t seed, std::uint64_t stream_id) {
  std::uint64_t state = seed;
  std::uint64_t mixed = splitmix64(state) ^ (stream_id * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
  std::array<std::uint32_t, 8> words{};
  for (std::size_t i = 0; i < words.size(); i += 2) {
    const std::uint64_t v = splitmix64(mixed);
    words[i] = static_cast<std::uint32_t>(v);
    words[i + 1] = static_cast<std::uint32_t>(v >> 32);
  }
  std::seed_seq seq(words.begin(), words.end());
  return RngStream::engine_type(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(make_engine(seed, stream_id)) {}

double RngStream::exponential(double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("exponential rate must be > 0");
  return -std::log(uniform()) / rate;
}

std::int64_t RngStream::poisson(double mean) {
  if (mean < 0.0) throw std::invalid_argument("poisson mean must be >= 0");
  if (mean == 0.0) return 0;
  std::poisson_distribution<std::int64_t> dist(mean);
  return dist(engine_);
}

std::uint64_t RngStream::index(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("index range must be non-empty");
  std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
  return dist(engine_);
}

RngStream RngStream::split(std::uint64_t tag) const {
  std::uint64_t state = seed_ ^ (tag * 0x9e3779b97f4a7c15ULL);
  return RngStream(splitmix64(state), stream_id_);
}

}  // namespace sweepsim
