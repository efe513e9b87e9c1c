#include "hypersub/rng.hpp"

#include <cmath>
#include <numbers>

namespace hypersub {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(p);
  hi = static_cast<std::uint32_t>(p >> 32);
}

inline double to_unit(std::uint32_t a, std::uint32_t b) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(a >> 5) << 26) | (b >> 6);
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

PhiloxCounter philox4x32(PhiloxCounter c, PhiloxKey k) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kW0;
      k[1] += kW1;
    }
    std::uint32_t lo0, hi0, lo1, hi1;
    mulhilo(kM0, c[0], lo0, hi0);
    mulhilo(kM1, c[2], lo1, hi1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
  return c;
}

std::array<double, 2> box_muller(const PhiloxCounter& w) {
  const double u1 = to_unit(w[0], w[1]);
  const double u2 = to_unit(w[2], w[3]);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(theta), r * std::sin(theta)};
}

CounterRng::CounterRng(std::uint64_t seed, std::uint32_t stream)
    : seed_(seed),
      stream_(stream),
      key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

PhiloxCounter CounterRng::block(std::uint32_t a, std::uint32_t b, std::uint32_t c) const {
  return philox4x32({a, b, c, stream_}, key_);
}

void CounterRng::normals(std::uint32_t a, std::uint32_t b, std::span<double> out) const {
  std::size_t i = 0;
  for (std::uint32_t c = 0; i < out.size(); ++c) {
    const auto z = box_muller(block(a, b, c));
    out[i++] = z[0];
    if (i < out.size()) out[i++] = z[1];
  }
}

double RngStream::uniform() {
  const auto w = rng_.block(static_cast<std::uint32_t>(index_), static_cast<std::uint32_t>(index_ >> 32), 0xFFFFFFFFu);
  ++index_;
  return to_unit(w[0], w[1]);
}

double RngStream::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_[1];
  }
  cached_ = box_muller(rng_.block(static_cast<std::uint32_t>(index_), static_cast<std::uint32_t>(index_ >> 32), 0xFFFFFFFEu));
  ++index_;
  has_cached_ = true;
  return cached_[0];
}

}  // namespace hypersub
