#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace sst {

// Derives an independent seed for a named random stream from a master seed,
// so toggling one subsystem never shifts another's draws.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream);

// Deterministic generator. Wraps mt19937_64 (whose output sequence is fixed
// by the standard) with hand-written distributions, because the standard
// library's distributions differ between implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1].
  double uniform_open_closed() { return 1.0 - uniform(); }

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);

  // Uniform integer in [lo, hi].
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  bool bernoulli(double p) { return uniform() < p; }

  double exponential(double mean);

  // Index drawn with probability proportional to weights[i]. Requires a
  // positive total weight.
  std::size_t weighted_index(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
};

}  // namespace sst
