#pragma once

// Counter-based random streams.
//
// Every stream is named by a (seed, index, channel) triple: `seed` is the
// experiment seed, `index` the sample index inside an ensemble and
// `channel` a small integer separating independent sub-streams of one
// sample (one per lattice row, per purpose, ...).  The generator is
// Philox4x32-10 keyed by the seed, so two streams with different names
// never overlap and results do not depend on how work is distributed.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

namespace kpz {

struct StreamId {
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  std::uint32_t channel = 0;

  friend bool operator==(const StreamId&, const StreamId&) = default;
};

namespace detail {

inline void philox_round(std::array<std::uint32_t, 4>& ctr,
                         const std::array<std::uint32_t, 2>& key) {
  constexpr std::uint64_t kMul0 = 0xD2511F53u;
  constexpr std::uint64_t kMul1 = 0xCD9E8D57u;
  const std::uint64_t p0 = kMul0 * ctr[0];
  const std::uint64_t p1 = kMul1 * ctr[2];
  const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const auto lo0 = static_cast<std::uint32_t>(p0);
  const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const auto lo1 = static_cast<std::uint32_t>(p1);
  ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

}  // namespace detail

/// Philox4x32-10 block function.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    detail::philox_round(ctr, key);
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

/// Sequential view of one named stream.  Satisfies
/// UniformRandomBitGenerator with 64-bit output.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(StreamId id) : id_(id) {}
  Stream(std::uint64_t seed, std::uint64_t index, std::uint32_t channel)
      : Stream(StreamId{seed, index, channel}) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (cursor_ == 2) refill();
    return buffer_[cursor_++];
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on the open interval (0, 1); safe as a logarithm argument.
  double uniform_open() {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    boost::random::normal_distribution<double> dist;
    return dist(*this);
  }

  double exponential() {
    boost::random::exponential_distribution<double> dist;
    return dist(*this);
  }

  const StreamId& id() const { return id_; }
  std::uint64_t blocks_used() const { return block_; }

 private:
  void refill() {
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(block_), id_.channel,
        static_cast<std::uint32_t>(id_.index), static_cast<std::uint32_t>(id_.index >> 32)};
    const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(id_.seed),
                                              static_cast<std::uint32_t>(id_.seed >> 32)};
    const auto out = philox4x32(ctr, key);
    buffer_[0] = (std::uint64_t{out[0]} << 32) | out[1];
    buffer_[1] = (std::uint64_t{out[2]} << 32) | out[3];
    ++block_;
    cursor_ = 0;
  }

  StreamId id_;
  std::uint64_t block_ = 0;
  std::array<result_type, 2> buffer_{};
  int cursor_ = 2;
};

/// Channel layout shared by the simulation modules.  Row-indexed
/// purposes are packed as `purpose * kRowStride + row`.
namespace channel {
inline constexpr std::uint32_t kRowStride = 1u << 20;
inline constexpr std::uint32_t kWeights = 0;
inline constexpr std::uint32_t kBrownian = 1;
inline constexpr std::uint32_t kRefine = 2;
inline constexpr std::uint32_t kPairs = 3;
inline constexpr std::uint32_t kBridge = 4;
inline constexpr std::uint32_t kBootstrap = 5;
inline constexpr std::uint32_t kMisc = 6;

inline constexpr std::uint32_t row(std::uint32_t purpose, std::size_t r) {
  return purpose * kRowStride + static_cast<std::uint32_t>(r);
}
}  // namespace channel

}  // namespace kpz
