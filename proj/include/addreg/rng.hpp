#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace addreg {

//! Philox4x32-10 counter-based generator. A stream is fully determined by
//! its 64-bit key; the counter walks through 2^128 blocks of four words.
class Philox4x32
{
public:
  using result_type = std::uint32_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox4x32(std::uint64_t key) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept
  {
    return std::numeric_limits<std::uint32_t>::max();
  }

  result_type operator()() noexcept;

  //! Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept;
  //! Uniform double in [lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  //! The raw bijection, exposed for known-answer tests.
  static Block bijection(Block counter, Key key) noexcept;

private:
  Key key_;
  Block counter_{};
  Block buffer_{};
  int used_ = 4;
};

enum class StreamPurpose : std::uint32_t
{
  covariates = 1,
  noise = 2,
  auxiliary = 3
};

//! Key for the stream of (seed, experiment slot, replication, purpose).
//! Distinct tuples map to distinct keys through a 64-bit mixer.
std::uint64_t
stream_key(std::uint64_t seed,
           std::uint64_t slot,
           std::uint64_t replication,
           StreamPurpose purpose) noexcept;

inline Philox4x32
make_stream(std::uint64_t seed,
            std::uint64_t slot,
            std::uint64_t replication,
            StreamPurpose purpose) noexcept
{
  return Philox4x32(stream_key(seed, slot, replication, purpose));
}

} // namespace addreg
