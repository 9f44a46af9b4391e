#pragma once

#include <cstdint>
#include <random>

namespace secdf {

// mt19937_64 with portable uniform draws built from the top 53 bits, so
// streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Substream for Monte Carlo run `run` of an experiment seeded with `seed`.
  static Rng for_run(std::uint64_t seed, std::uint64_t run) { return Rng(seed ^ run); }

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  // Integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace secdf
