#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace detaps {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

inline Bytes to_bytes(std::string_view s) {
  auto v = as_bytes(s);
  return {v.begin(), v.end()};
}

std::string to_hex(ByteView data);
Bytes from_hex(std::string_view hex);

// Appends canonical encodings: fixed-width big-endian integers and
// sequences prefixed with a 4-byte big-endian count.
class Writer {
 public:
  Writer& u8(std::uint8_t v);
  Writer& u32(std::uint32_t v);
  Writer& u64(std::uint64_t v);
  Writer& raw(ByteView data);
  // 4-byte length prefix followed by the data.
  Writer& var(ByteView data);
  Writer& str(std::string_view s) { return var(as_bytes(s)); }

  template <typename T>
  Writer& put(const T& value) {
    value.write(*this);
    return *this;
  }

  template <typename T>
  Writer& seq(const std::vector<T>& values) {
    u32(static_cast<std::uint32_t>(values.size()));
    for (const auto& v : values) v.write(*this);
    return *this;
  }

  const Bytes& bytes() const& { return buf_; }
  Bytes bytes() && { return std::move(buf_); }
  std::size_t size() const { return buf_.size(); }

 private:
  Bytes buf_;
};

// Consumes what Writer produces. Every read throws Error(DecodeError) on
// truncation; `finish()` rejects trailing bytes.
class Reader {
 public:
  explicit Reader(ByteView data) : data_(data) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  ByteView raw(std::size_t n);
  Bytes var();
  // Reads a count prefix and rejects values above `max`.
  std::uint32_t count(std::uint32_t max);

  template <typename T>
  T get() {
    return T::read(*this);
  }

  template <typename T>
  std::vector<T> seq(std::uint32_t max) {
    const auto n = count(max);
    std::vector<T> out;
    out.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) out.push_back(T::read(*this));
    return out;
  }

  std::size_t remaining() const { return data_.size() - pos_; }
  void finish() const;

 private:
  ByteView data_;
  std::size_t pos_ = 0;
};

// Decodes a whole buffer as one T, rejecting trailing data.
template <typename T>
T decode_all(ByteView data) {
  Reader r(data);
  T out = T::read(r);
  r.finish();
  return out;
}

template <typename T>
Bytes encode(const T& value) {
  Writer w;
  value.write(w);
  return std::move(w).bytes();
}

}  // namespace detaps
