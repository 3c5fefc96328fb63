#include "hdsgd/sampler.hpp"

#include <cmath>
#include <numbers>

namespace hdsgd {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

// 53 random bits -> (0,1], never zero so log is safe.
inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t x = (static_cast<std::uint64_t>(hi) << 32) | lo;
  return (static_cast<double>(x >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, c[0], hi0, lo0);
    mulhilo(kM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kW0;
    k[1] += kW1;
  }
  return c;
}

Sampler::Sampler(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

std::array<double, 2> Sampler::uniform_pair_at(std::uint64_t i) const {
  const auto r = philox4x32({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32),
                             static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                            {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
  return {to_unit(r[0], r[1]), to_unit(r[2], r[3])};
}

std::array<double, 2> Sampler::normal_pair_at(std::uint64_t i) const {
  const auto u = uniform_pair_at(i);
  const double rad = std::sqrt(-2.0 * std::log(u[0]));
  const double th = 2.0 * std::numbers::pi * u[1];
  return {rad * std::cos(th), rad * std::sin(th)};
}

double Sampler::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const auto z = normal_pair_at(block_++);
  spare_ = z[1];
  has_spare_ = true;
  return z[0];
}

double Sampler::uniform() {
  // Uniforms consume whole blocks; the second value is discarded.
  has_spare_ = false;
  const double u = uniform_pair_at(block_++)[0];
  return u >= 1.0 ? 0x1.fffffffffffffp-1 : u;
}

void Sampler::fill_normal(std::span<double> out) {
  std::size_t i = 0;
  if (has_spare_ && !out.empty()) {
    out[i++] = spare_;
    has_spare_ = false;
  }
  for (; i + 1 < out.size(); i += 2) {
    const auto z = normal_pair_at(block_++);
    out[i] = z[0];
    out[i + 1] = z[1];
  }
  if (i < out.size()) out[i] = normal();
}

}  // namespace hdsgd
