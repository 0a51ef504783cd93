#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

namespace mflab {

// Philox4x32-10 (Salmon et al., SC'11). Counter based, so any draw can be
// addressed directly by (key, counter) and results do not depend on the
// order in which threads consume streams.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

// Mixes a seed with a path of stream ids into a 64-bit key.
std::uint64_t derive_key(std::uint64_t seed,
                         std::initializer_list<std::uint64_t> path);

class Stream {
 public:
  Stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path = {});

  // One Philox block for an explicit 64-bit counter value.
  std::array<std::uint32_t, 4> block(std::uint64_t counter) const;

  // Sequential interface over consecutive counters.
  double uniform();         // in (0, 1)
  double normal();          // standard normal by Box-Muller
  std::uint64_t bits64();

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int left_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
  std::uint32_t next32();
};

// Maps 32 random bits to (0,1), never returning 0 or 1.
inline double u32_to_open01(std::uint32_t v) {
  return (static_cast<double>(v) + 0.5) * (1.0 / 4294967296.0);
}

// Two standard normals from one Philox block, using all four words for
// 53-bit-ish uniforms.
std::array<double, 2> normal_pair(const std::array<std::uint32_t, 4>& b);

}  // namespace mflab
