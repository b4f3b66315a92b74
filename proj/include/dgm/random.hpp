#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace dgm {

/// SplitMix64 finalizer; used to derive independent stream seeds from a master seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Deterministic random stream. Conversions to doubles and bounded integers
/// are done here rather than through <random> distributions, whose output
/// is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform_open() { return open_unit(engine_()); }
  /// Maps 64 random bits to (k + 1/2) * 2^-52 with k the top 52 bits. Every
  /// result is exactly representable, so the extremes stay strictly inside (0, 1).
  static double open_unit(std::uint64_t bits);
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n). n > 0.
  std::uint64_t below(std::uint64_t n);

  std::string state() const;
  void set_state(const std::string& text);

 private:
  std::mt19937_64 engine_;
};

}  // namespace dgm
