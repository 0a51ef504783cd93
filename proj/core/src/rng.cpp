#include "mflab/rng.hpp"

#include <cmath>
#include <numbers>

namespace mflab {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double u64_to_open01(std::uint64_t v) {
  return (static_cast<double>(v >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c,
                                        std::array<std::uint32_t, 2> k) {
  for (int r = 0; r < 10; ++r) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, c[0], hi0, lo0);
    mulhilo(kM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kW0;
    k[1] += kW1;
  }
  return c;
}

std::uint64_t derive_key(std::uint64_t seed,
                         std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(seed ^ 0x6A09E667F3BCC909ull);
  for (auto p : path) h = splitmix64(h ^ splitmix64(p + 0x3C6EF372FE94F82Bull));
  return h;
}

Stream::Stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path)
    : key_(derive_key(seed, path)) {}

std::array<std::uint32_t, 4> Stream::block(std::uint64_t counter) const {
  std::array<std::uint32_t, 4> c = {static_cast<std::uint32_t>(counter),
                                    static_cast<std::uint32_t>(counter >> 32),
                                    0u, 0u};
  std::array<std::uint32_t, 2> k = {static_cast<std::uint32_t>(key_),
                                    static_cast<std::uint32_t>(key_ >> 32)};
  return philox4x32(c, k);
}

std::uint32_t Stream::next32() {
  if (left_ == 0) {
    buf_ = block(counter_++);
    left_ = 4;
  }
  return buf_[4 - left_--];
}

std::uint64_t Stream::bits64() {
  std::uint64_t hi = next32();
  return (hi << 32) | next32();
}

double Stream::uniform() { return u64_to_open01(bits64()); }

double Stream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform(), u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

std::array<double, 2> normal_pair(const std::array<std::uint32_t, 4>& b) {
  double u1 = u64_to_open01((static_cast<std::uint64_t>(b[0]) << 32) | b[1]);
  double u2 = u64_to_open01((static_cast<std::uint64_t>(b[2]) << 32) | b[3]);
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(a), r * std::sin(a)};
}

}  // namespace mflab
