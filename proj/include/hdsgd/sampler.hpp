#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace hdsgd {

// Philox4x32-10 block: counter (4 words) under key (2 words).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

// Named streams so independent draws of one run never overlap.
enum class Stream : std::uint32_t {
  sgd = 1,
  hsgd = 2,
  spectrum = 3,
  init_x0 = 4,
  init_xstar = 5,
  monte_carlo = 6,
  test = 7,
};

// Counter-based normal sampler: the i-th pair of normals depends only on
// (seed, stream, i). Two normals per Philox block via Box-Muller.
class Sampler {
 public:
  Sampler(std::uint64_t seed, std::uint64_t stream);
  Sampler(std::uint64_t seed, Stream stream) : Sampler(seed, static_cast<std::uint64_t>(stream)) {}

  double normal();
  double uniform();  // in (0,1)
  void fill_normal(std::span<double> out);

  // Pure access: the pair of normals at block index i.
  std::array<double, 2> normal_pair_at(std::uint64_t i) const;
  std::array<double, 2> uniform_pair_at(std::uint64_t i) const;

  std::uint64_t position() const { return block_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace hdsgd
