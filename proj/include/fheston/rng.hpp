#pragma once

// Counter-based random streams.
//
// Every random number drawn by the engine is a pure function of
// (global seed, path id, driver id, draw index), so a path produces the same
// increments no matter which worker simulates it or in which order.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace fheston {

// Philox4x32 with 10 rounds.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter generate(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeylA;
        key[1] += kWeylB;
      }
      ctr = single_round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMulA = 0xD2511F53u;
  static constexpr std::uint32_t kMulB = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeylA = 0x9E3779B9u;
  static constexpr std::uint32_t kWeylB = 0xBB67AE85u;

  static constexpr Counter single_round(const Counter& c, const Key& k) noexcept {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMulA) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMulB) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

// Identifies which Gaussian driver a stream feeds.
enum class DriverId : std::uint32_t {
  FgnNoise = 0,   // standard normals coloured by the fGn Cholesky factor
  WienerV = 1,    // V, the process behind the Volterra representation of B^H
  WienerVTilde = 2,
};

// Mixes a 64-bit value (splitmix64 finaliser). Used to derive sub-seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Derives an independent experiment seed from a base seed and two labels.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                    std::uint64_t b) noexcept {
  return mix64(mix64(seed ^ mix64(a)) ^ mix64(b + 0x632BE59BD9B4E019ull));
}

// Sequential stream of uniforms/normals for one (seed, path, driver) triple.
class PathStream {
 public:
  PathStream(std::uint64_t seed, std::uint64_t path_id, DriverId driver) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        ctr_{0u, static_cast<std::uint32_t>(driver), static_cast<std::uint32_t>(path_id),
             static_cast<std::uint32_t>(path_id >> 32)} {}

  // Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() noexcept {
    if (pos_ == 4) refill();
    const std::uint64_t hi = block_[pos_];
    const std::uint64_t lo = block_[pos_ + 1];
    pos_ += 2;
    const std::uint64_t bits = ((hi << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the sine branch is cached.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
  }

  void fill_normal(std::span<double> out, double scale = 1.0) noexcept {
    for (double& x : out) x = scale * normal();
  }

 private:
  void refill() noexcept {
    block_ = Philox4x32::generate(ctr_, key_);
    ++ctr_[0];
    pos_ = 0;
  }

  Philox4x32::Key key_;
  Philox4x32::Counter ctr_;
  Philox4x32::Counter block_{};
  int pos_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fheston
