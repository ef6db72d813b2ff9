#ifndef CFBVA_RNG_HPP
#define CFBVA_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace cfbva {

// Philox4x32-10 counter-based generator. Each (counter, key) pair maps to four
// independent 32-bit words, so any path can be regenerated without replaying
// the others.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      ctr = single_round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static Counter single_round(const Counter& c, const Key& k) noexcept {
    const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
    return {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
            static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
  }
};

// Uniform in the open interval (0, 1) from two 32-bit words. 52 bits keep
// the half-step offset exact at the top end.
inline double open_uniform(std::uint32_t hi, std::uint32_t lo) noexcept {
  const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 12;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
}

// Random stream for one (path, channel) pair. The step index is the counter.
class PathStream {
 public:
  PathStream(std::uint64_t seed, std::uint64_t path, std::uint32_t channel) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        path_lo_(static_cast<std::uint32_t>(path)),
        path_hi_(static_cast<std::uint32_t>(path >> 32)),
        channel_(channel) {}

  std::pair<double, double> uniforms(std::uint32_t step) const noexcept {
    const auto w = Philox4x32::generate({step, channel_, path_lo_, path_hi_}, key_);
    return {open_uniform(w[0], w[1]), open_uniform(w[2], w[3])};
  }

  // Box-Muller pair.
  std::pair<double, double> normals(std::uint32_t step) const noexcept {
    const auto [u1, u2] = uniforms(step);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

  double normal(std::uint32_t step) const noexcept { return normals(step).first; }

 private:
  Philox4x32::Key key_;
  std::uint32_t path_lo_;
  std::uint32_t path_hi_;
  std::uint32_t channel_;
};

}  // namespace cfbva

#endif
