#pragma once

#include <array>
#include <cstdint>

namespace bwmr {

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Seed of replicate `rep` under master seed `seed`:
//   mix64(seed ^ mix64(rep + 0x9E3779B97F4A7C15)).
std::uint64_t replicate_seed(std::uint64_t seed, std::uint64_t rep);

// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key);

// Counter-based stream: key = seed, counter = (block index, stream id).
// Distinct stream ids under one seed give independent sequences, so a
// generator can hand out substreams without consuming draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {}

  Rng substream(std::uint64_t id) const { return Rng(mix64(seed_ ^ mix64(stream_ + 1)), id); }

  std::uint64_t next_u64();

  double uniform();                 // [0, 1)
  double uniform_open();            // (0, 1)
  double uniform(double lo, double hi);
  double normal();                  // Box-Muller, second value cached
  double normal(double mean, double sd) { return mean + sd * normal(); }
  double laplace(double rate);      // density (rate/2) exp(-rate |x|)
  bool bernoulli(double p) { return uniform() < p; }
  int binomial2(double p);          // Binomial(2, p)

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::uint64_t buf_[2] = {0, 0};
  int avail_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace bwmr
