#pragma once

#include <cstdint>
#include <random>

namespace wcd {

/// Seedable random stream used for every stochastic path in the library.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The uniform and normal transforms are implemented here rather
/// than with <random> distributions so that draws are bitwise identical
/// across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Stream for trial `trial` of an experiment seeded with `seed`.
  static Rng for_trial(std::uint64_t seed, std::uint64_t trial);
  /// Stream for a named sub-task (problem data, initial ensemble, ...).
  static Rng for_purpose(std::uint64_t seed, std::uint64_t tag);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via the Marsaglia polar method.
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Seed of the per-trial solver stream; Rng::for_trial(seed, t) == Rng(trial_seed(seed, t)).
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial);

// Fixed tags for Rng::for_purpose. Changing these changes every generated problem.
namespace stream {
inline constexpr std::uint64_t kProblemData = 0x9d2c5680a1b3e7f1ULL;
inline constexpr std::uint64_t kInitialEnsemble = 0x3c6ef372fe94f82bULL;
inline constexpr std::uint64_t kTrial = 0xa54ff53a5f1d36f1ULL;
inline constexpr std::uint64_t kVerify = 0x510e527fade682d1ULL;
}  // namespace stream

}  // namespace wcd
