#pragma once

// BLS12-381 group arithmetic. G1/G2 are written additively, GT
// multiplicatively. Every type has a fixed-width canonical encoding:
//   Scalar 32 bytes big-endian, G1 48 bytes compressed,
//   G2 96 bytes compressed, GT 576 bytes (12 big-endian Fp limbs).

#include <array>
#include <cstdint>
#include <string_view>

#include <blst.h>

#include "detaps/bytes.hpp"

namespace detaps {

class Rng;
class Writer;
class Reader;

namespace group {

class Scalar {
 public:
  static constexpr std::size_t kBytes = 32;

  Scalar() : v_{} {}
  static Scalar from_u64(std::uint64_t v);
  static Scalar zero() { return Scalar(); }
  static Scalar one() { return from_u64(1); }
  // Reduces an arbitrary-length big-endian integer modulo q.
  static Scalar reduce(ByteView be_bytes);
  static Scalar random(Rng& rng);
  static Scalar random_nonzero(Rng& rng);

  Scalar operator+(const Scalar& o) const;
  Scalar operator-(const Scalar& o) const;
  Scalar operator*(const Scalar& o) const;
  Scalar operator-() const;
  Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
  Scalar& operator-=(const Scalar& o) { return *this = *this - o; }
  Scalar& operator*=(const Scalar& o) { return *this = *this * o; }
  // Throws Error(OutOfRange) for zero.
  Scalar inverse() const;
  Scalar pow(std::uint64_t e) const;

  bool is_zero() const;
  bool operator==(const Scalar& o) const;

  std::array<std::uint8_t, kBytes> to_bytes() const;
  // Rejects values >= q.
  static Scalar from_bytes(ByteView b);

  void write(Writer& w) const;
  static Scalar read(Reader& r);

  const blst_fr& raw() const { return v_; }
  // Little-endian canonical form for blst's multiplication routines.
  blst_scalar to_blst_scalar() const;

 private:
  blst_fr v_;
};

class G1 {
 public:
  static constexpr std::size_t kBytes = 48;

  G1();  // identity
  static G1 generator();
  static G1 identity() { return G1(); }
  static G1 hash(std::string_view dst, ByteView msg);

  G1 operator+(const G1& o) const;
  G1 operator-(const G1& o) const;
  G1 operator-() const;
  G1 operator*(const Scalar& s) const;
  G1& operator+=(const G1& o) { return *this = *this + o; }
  G1& operator-=(const G1& o) { return *this = *this - o; }

  bool is_identity() const;
  bool operator==(const G1& o) const;

  std::array<std::uint8_t, kBytes> to_bytes() const;
  static G1 from_bytes(ByteView b);

  void write(Writer& w) const;
  static G1 read(Reader& r);

  blst_p1_affine affine() const;
  const blst_p1& raw() const { return p_; }

 private:
  blst_p1 p_;
};

inline G1 operator*(const Scalar& s, const G1& p) { return p * s; }

class G2 {
 public:
  static constexpr std::size_t kBytes = 96;

  G2();
  static G2 generator();
  static G2 identity() { return G2(); }
  static G2 hash(std::string_view dst, ByteView msg);

  G2 operator+(const G2& o) const;
  G2 operator-(const G2& o) const;
  G2 operator-() const;
  G2 operator*(const Scalar& s) const;
  G2& operator+=(const G2& o) { return *this = *this + o; }

  bool is_identity() const;
  bool operator==(const G2& o) const;

  std::array<std::uint8_t, kBytes> to_bytes() const;
  static G2 from_bytes(ByteView b);

  void write(Writer& w) const;
  static G2 read(Reader& r);

  blst_p2_affine affine() const;

 private:
  blst_p2 p_;
};

inline G2 operator*(const Scalar& s, const G2& p) { return p * s; }

class GT {
 public:
  static constexpr std::size_t kBytes = 576;

  GT();  // one
  static GT one() { return GT(); }

  GT operator*(const GT& o) const;
  GT& operator*=(const GT& o) { return *this = *this * o; }
  GT inverse() const;
  GT pow(const Scalar& e) const;

  bool is_one() const;
  bool operator==(const GT& o) const;

  std::array<std::uint8_t, kBytes> to_bytes() const;
  static GT from_bytes(ByteView b);

  void write(Writer& w) const;
  static GT read(Reader& r);

 private:
  friend GT pairing(const G1&, const G2&);
  friend GT multi_pairing(std::span<const G1>, std::span<const G2>);
  blst_fp12 f_;
};

GT pairing(const G1& p, const G2& q);
// prod_i e(p[i], q[i]) with a single final exponentiation.
GT multi_pairing(std::span<const G1> p, std::span<const G2> q);

// Domain-separated hash into Z_q: HMAC-SHA256 keyed by the tag, expanded to
// 64 bytes and reduced. Tags must be nonempty.
Scalar hash_to_scalar(std::string_view domain_tag, ByteView data);

}  // namespace group
}  // namespace detaps
