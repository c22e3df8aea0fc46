#pragma once

#include <cstdint>
#include <string_view>

#include "detaps/bytes.hpp"
#include "detaps/hash.hpp"

namespace detaps {

// HMAC-SHA256 DRBG. Seeded instances are fully deterministic, which is
// what makes setup, transcripts and reports reproducible.
class Rng {
 public:
  explicit Rng(ByteView seed);
  static Rng from_seed(std::uint64_t seed);
  // Seeded from the operating system.
  static Rng fresh();

  void fill(std::span<std::uint8_t> out);
  Bytes bytes(std::size_t n);
  std::uint64_t u64();
  // Uniform in [0, bound).
  std::uint64_t below(std::uint64_t bound);

  // Independent child stream; does not advance this generator.
  Rng fork(std::string_view label) const;

 private:
  void update(ByteView provided);

  Digest key_{};
  Digest v_{};
};

}  // namespace detaps
