#pragma once

#include <array>
#include <cstdint>

namespace rsb {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Stateless:
/// the output is a pure function of (counter, key).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr std::uint32_t kMul0 = 0xD2511F53U;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57U;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9U;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85U;

  static constexpr Counter round(const Counter& c, const Key& k) noexcept {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }

  static constexpr Counter generate(Counter c, Key k) noexcept {
    c = round(c, k);
    for (int r = 1; r < 10; ++r) {
      k[0] += kWeyl0;
      k[1] += kWeyl1;
      c = round(c, k);
    }
    return c;
  }
};

/// Random stream domains. The domain tag occupies the top 16 bits of the
/// 64-bit stream id, the replica index the low 48.
enum class StreamDomain : std::uint64_t {
  FieldPhases = 0,
  PairSampling = 1,
  Validation = 2,
};

constexpr std::uint64_t stream_id(StreamDomain domain, std::uint64_t replica) noexcept {
  return (static_cast<std::uint64_t>(domain) << 48) | (replica & 0xFFFFFFFFFFFFULL);
}

/// Maps the top 52 bits of a 64-bit word to [0,1). Matches the SIMD path,
/// which builds the same value as a [1,2) double minus one.
constexpr double unit_from_bits(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 12) * (1.0 / 4503599627370496.0);  // 2^-52
}

/// Two uniforms in [0,1) from one Philox block at counter (index, stream)
/// under key seed.
inline std::array<double, 2> philox_uniform_pair(std::uint64_t seed, std::uint64_t stream,
                                                 std::uint64_t index) noexcept {
  const Philox4x32::Counter ctr = {static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                                   static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  const Philox4x32::Key key = {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  const auto out = Philox4x32::generate(ctr, key);
  const std::uint64_t a = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
  const std::uint64_t b = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
  return {unit_from_bits(a), unit_from_bits(b)};
}

/// Sequential view over a counter-based stream, for code that wants draws one at a time.
class PhiloxStream {
 public:
  PhiloxStream(std::uint64_t seed, std::uint64_t stream) noexcept : seed_(seed), stream_(stream) {}

  double uniform() noexcept {
    if (slot_ == 2) {
      buf_ = philox_uniform_pair(seed_, stream_, block_++);
      slot_ = 0;
    }
    return buf_[slot_++];
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<double, 2> buf_{};
  int slot_ = 2;
};

}  // namespace rsb
