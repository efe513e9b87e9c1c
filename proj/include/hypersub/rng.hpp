#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace hypersub {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

// Philox4x32-10 (Salmon et al., SC'11).
PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key);

// Two 53-bit uniforms in (0,1) mapped through Box-Muller.
std::array<double, 2> box_muller(const PhiloxCounter& words);

// Counter-based generator. Every draw is addressed by (a, b, c) within a
// stream, so results never depend on the order in which they are requested.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint32_t stream);

  PhiloxCounter block(std::uint32_t a, std::uint32_t b, std::uint32_t c) const;
  // Fills `out` with standard normals for cell (a, b).
  void normals(std::uint32_t a, std::uint32_t b, std::span<double> out) const;

  std::uint64_t seed() const { return seed_; }
  std::uint32_t stream() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint32_t stream_;
  PhiloxKey key_;
};

// Sequential facade for non-hot-path sampling (test points, grids).
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint32_t stream = 0) : rng_(seed, stream) {}

  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();

 private:
  CounterRng rng_;
  std::uint64_t index_ = 0;
  std::array<double, 2> cached_{};
  bool has_cached_ = false;
};

}  // namespace hypersub
