#include "detaps/rng.hpp"

#include <openssl/rand.h>

#include "detaps/errors.hpp"

namespace detaps {

Rng::Rng(ByteView seed) {
  key_.fill(0x00);
  v_.fill(0x01);
  update(seed);
}

Rng Rng::from_seed(std::uint64_t seed) {
  Writer w;
  w.raw(as_bytes("detaps-rng")).u64(seed);
  return Rng(w.bytes());
}

Rng Rng::fresh() {
  std::array<std::uint8_t, 48> seed{};
  if (RAND_bytes(seed.data(), static_cast<int>(seed.size())) != 1)
    throw Error(Errc::ConfigError, "system randomness unavailable");
  return Rng(seed);
}

void Rng::update(ByteView provided) {
  Bytes buf(v_.begin(), v_.end());
  buf.push_back(0x00);
  buf.insert(buf.end(), provided.begin(), provided.end());
  key_ = hmac_sha256(key_, buf);
  v_ = hmac_sha256(key_, v_);
  if (provided.empty()) return;
  buf.assign(v_.begin(), v_.end());
  buf.push_back(0x01);
  buf.insert(buf.end(), provided.begin(), provided.end());
  key_ = hmac_sha256(key_, buf);
  v_ = hmac_sha256(key_, v_);
}

void Rng::fill(std::span<std::uint8_t> out) {
  std::size_t off = 0;
  while (off < out.size()) {
    v_ = hmac_sha256(key_, v_);
    const auto n = std::min(out.size() - off, v_.size());
    std::copy_n(v_.begin(), n, out.begin() + static_cast<std::ptrdiff_t>(off));
    off += n;
  }
  update({});
}

Bytes Rng::bytes(std::size_t n) {
  Bytes out(n);
  fill(out);
  return out;
}

std::uint64_t Rng::u64() {
  std::array<std::uint8_t, 8> b{};
  fill(b);
  std::uint64_t v = 0;
  for (auto x : b) v = v << 8 | x;
  return v;
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw Error(Errc::OutOfRange, "empty range");
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  for (;;) {
    auto v = u64();
    if (v < limit) return v % bound;
  }
}

Rng Rng::fork(std::string_view label) const {
  Bytes buf(v_.begin(), v_.end());
  buf.insert(buf.end(), label.begin(), label.end());
  auto seed = hmac_sha256(key_, buf);
  return Rng(seed);
}

}  // namespace detaps
