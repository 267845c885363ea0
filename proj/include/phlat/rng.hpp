#pragma once

#include <cstdint>

namespace phlat {

/// PCG64 (pcg_setseq_128_xsl_rr_64): 128-bit LCG state, XSL-RR output.
/// Matches the reference pcg64 constants, so a (seed, stream) pair is a
/// stable cross-platform contract.  Disorder sweeps give realization r the
/// stream id r, which makes every realization reproducible in isolation.
class pcg64 {
 public:
  using u128 = unsigned __int128;

  pcg64(std::uint64_t seed, std::uint64_t stream = 0) {
    inc_ = ((u128(stream) << 1u) | 1u);
    state_ = 0u;
    step();
    state_ += u128(seed);
    step();
  }

  std::uint64_t next() {
    step();  // 128-bit PCG variants emit from the advanced state
    const auto xored = std::uint64_t((state_ >> 64) ^ state_);
    const auto rot = unsigned(state_ >> 122);
    return (xored >> rot) | (xored << ((-rot) & 63u));
  }

  /// Uniform double in [0, 1) with 53 significant bits.
  double uniform01() { return double(next() >> 11) * 0x1.0p-53; }

  /// Uniform double in [-width, width].
  double symmetric(double width) { return width * (2.0 * uniform01() - 1.0); }

 private:
  void step() { state_ = state_ * mult() + inc_; }

  static constexpr u128 mult() {
    return (u128(0x2360ed051fc65da4ull) << 64) | 0x4385df649fccf645ull;
  }

  u128 state_ = 0;
  u128 inc_ = 0;
};

}  // namespace phlat
