#include "addreg/rng.hpp"

namespace addreg {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void
mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept
{
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

// splitmix64 finalizer
inline std::uint64_t
mix(std::uint64_t z) noexcept
{
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

} // namespace

Philox4x32::Philox4x32(std::uint64_t key) noexcept
  : key_{ static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32) }
{
}

Philox4x32::Block
Philox4x32::bijection(Block c, Key k) noexcept
{
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = { hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0 };
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return c;
}

Philox4x32::result_type
Philox4x32::operator()() noexcept
{
  if (used_ == 4) {
    buffer_ = bijection(counter_, key_);
    for (auto& w : counter_)
      if (++w != 0)
        break;
    used_ = 0;
  }
  return buffer_[used_++];
}

double
Philox4x32::uniform() noexcept
{
  const std::uint64_t hi = (*this)();
  const std::uint64_t lo = (*this)();
  const std::uint64_t bits = ((hi << 32) | lo) >> 11;
  return static_cast<double>(bits) * 0x1.0p-53;
}

std::uint64_t
stream_key(std::uint64_t seed,
           std::uint64_t slot,
           std::uint64_t replication,
           StreamPurpose purpose) noexcept
{
  std::uint64_t z = mix(seed);
  z = mix(z ^ slot);
  z = mix(z ^ replication);
  return mix(z ^ static_cast<std::uint64_t>(purpose));
}

} // namespace addreg
