#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace crtrial {

__extension__ typedef unsigned __int128 uint128_t;

// Philox4x64-10 counter-based generator (Salmon et al., SC'11). Each
// (seed, stream) pair names an independent substream, so the numbers a
// replicate sees do not depend on which thread runs it or in what order.
class Philox4x64 {
 public:
  using result_type = std::uint64_t;
  using Counter = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  Philox4x64(std::uint64_t seed, std::uint64_t stream) : key_{seed, stream} {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (pos_ == 4) {
      increment();
      buffer_ = block(counter_, key_);
      pos_ = 0;
    }
    return buffer_[pos_++];
  }

  // Uniform on (0, 1]; safe to take the logarithm of.
  double uniform_open0() { return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53; }
  // Uniform on [0, 1).
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Inverse transform: -log(U) / rate.
  double exponential(double rate) { return -std::log(uniform_open0()) / rate; }

  // Uniform integer in [0, bound) by Lemire's multiply-and-reject method.
  std::uint64_t below(std::uint64_t bound) {
    uint128_t m = static_cast<uint128_t>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<uint128_t>((*this)()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // The raw 10-round bijection.
  static Counter block(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const auto p0 = static_cast<uint128_t>(kMul0) * ctr[0];
      const auto p1 = static_cast<uint128_t>(kMul1) * ctr[2];
      const auto hi0 = static_cast<std::uint64_t>(p0 >> 64), lo0 = static_cast<std::uint64_t>(p0);
      const auto hi1 = static_cast<std::uint64_t>(p1 >> 64), lo1 = static_cast<std::uint64_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  static constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
  static constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
  static constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

  void increment() {
    for (auto& word : counter_) {
      if (++word != 0) break;
    }
  }

  Key key_;
  Counter counter_{0, 0, 0, 0};
  Counter buffer_{};
  int pos_ = 4;
};

}  // namespace crtrial
