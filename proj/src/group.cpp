#include "detaps/group.hpp"

#include <cstring>
#include <vector>

#include "detaps/errors.hpp"
#include "detaps/hash.hpp"
#include "detaps/rng.hpp"

namespace detaps::group {

// ---- Scalar ---------------------------------------------------------------

Scalar Scalar::from_u64(std::uint64_t v) {
  const std::uint64_t limbs[4] = {v, 0, 0, 0};
  Scalar s;
  blst_fr_from_uint64(&s.v_, limbs);
  return s;
}

Scalar Scalar::reduce(ByteView be) {
  blst_scalar tmp;
  blst_scalar_from_be_bytes(&tmp, be.data(), be.size());
  Scalar s;
  blst_fr_from_scalar(&s.v_, &tmp);
  return s;
}

Scalar Scalar::random(Rng& rng) {
  std::array<std::uint8_t, 64> wide{};
  rng.fill(wide);
  return reduce(wide);
}

Scalar Scalar::random_nonzero(Rng& rng) {
  for (;;) {
    auto s = random(rng);
    if (!s.is_zero()) return s;
  }
}

Scalar Scalar::operator+(const Scalar& o) const {
  Scalar r;
  blst_fr_add(&r.v_, &v_, &o.v_);
  return r;
}

Scalar Scalar::operator-(const Scalar& o) const {
  Scalar r;
  blst_fr_sub(&r.v_, &v_, &o.v_);
  return r;
}

Scalar Scalar::operator*(const Scalar& o) const {
  Scalar r;
  blst_fr_mul(&r.v_, &v_, &o.v_);
  return r;
}

Scalar Scalar::operator-() const {
  Scalar r;
  blst_fr_cneg(&r.v_, &v_, true);
  return r;
}

Scalar Scalar::inverse() const {
  if (is_zero()) throw Error(Errc::OutOfRange, "inverse of zero");
  Scalar r;
  blst_fr_inverse(&r.v_, &v_);
  return r;
}

Scalar Scalar::pow(std::uint64_t e) const {
  Scalar result = one(), base = *this;
  while (e != 0) {
    if (e & 1) result *= base;
    base *= base;
    e >>= 1;
  }
  return result;
}

bool Scalar::is_zero() const {
  blst_fr z{};
  return std::memcmp(&v_, &z, sizeof(z)) == 0;
}

bool Scalar::operator==(const Scalar& o) const {
  return std::memcmp(&v_, &o.v_, sizeof(v_)) == 0;
}

blst_scalar Scalar::to_blst_scalar() const {
  blst_scalar s;
  blst_scalar_from_fr(&s, &v_);
  return s;
}

std::array<std::uint8_t, Scalar::kBytes> Scalar::to_bytes() const {
  auto s = to_blst_scalar();
  std::array<std::uint8_t, kBytes> out{};
  blst_bendian_from_scalar(out.data(), &s);
  return out;
}

Scalar Scalar::from_bytes(ByteView b) {
  if (b.size() != kBytes) throw Error(Errc::DecodeError, "scalar must be 32 bytes");
  blst_scalar s;
  blst_scalar_from_bendian(&s, b.data());
  if (!blst_scalar_fr_check(&s)) throw Error(Errc::DecodeError, "scalar not reduced");
  Scalar r;
  blst_fr_from_scalar(&r.v_, &s);
  return r;
}

void Scalar::write(Writer& w) const { w.raw(to_bytes()); }
Scalar Scalar::read(Reader& r) { return from_bytes(r.raw(kBytes)); }

// ---- G1 -------------------------------------------------------------------

G1::G1() : p_{} {}

G1 G1::generator() {
  G1 g;
  g.p_ = *blst_p1_generator();
  return g;
}

G1 G1::hash(std::string_view dst, ByteView msg) {
  G1 out;
  blst_hash_to_g1(&out.p_, msg.data(), msg.size(),
                  reinterpret_cast<const byte*>(dst.data()), dst.size(), nullptr, 0);
  return out;
}

G1 G1::operator+(const G1& o) const {
  G1 r;
  blst_p1_add_or_double(&r.p_, &p_, &o.p_);
  return r;
}

G1 G1::operator-() const {
  G1 r = *this;
  blst_p1_cneg(&r.p_, true);
  return r;
}

G1 G1::operator-(const G1& o) const { return *this + (-o); }

G1 G1::operator*(const Scalar& s) const {
  auto k = s.to_blst_scalar();
  G1 r;
  blst_p1_mult(&r.p_, &p_, k.b, 255);
  return r;
}

bool G1::is_identity() const { return blst_p1_is_inf(&p_); }
bool G1::operator==(const G1& o) const { return blst_p1_is_equal(&p_, &o.p_); }

std::array<std::uint8_t, G1::kBytes> G1::to_bytes() const {
  std::array<std::uint8_t, kBytes> out{};
  blst_p1_compress(out.data(), &p_);
  return out;
}

G1 G1::from_bytes(ByteView b) {
  if (b.size() != kBytes) throw Error(Errc::DecodeError, "G1 element must be 48 bytes");
  blst_p1_affine a;
  if (blst_p1_uncompress(&a, b.data()) != BLST_SUCCESS)
    throw Error(Errc::DecodeError, "invalid G1 encoding");
  if (!blst_p1_affine_in_g1(&a)) throw Error(Errc::DecodeError, "point not in G1");
  G1 r;
  blst_p1_from_affine(&r.p_, &a);
  auto again = r.to_bytes();
  if (!std::equal(again.begin(), again.end(), b.begin()))
    throw Error(Errc::DecodeError, "non-canonical G1 encoding");
  return r;
}

void G1::write(Writer& w) const { w.raw(to_bytes()); }
G1 G1::read(Reader& r) { return from_bytes(r.raw(kBytes)); }

blst_p1_affine G1::affine() const {
  blst_p1_affine a;
  blst_p1_to_affine(&a, &p_);
  return a;
}

// ---- G2 -------------------------------------------------------------------

G2::G2() : p_{} {}

G2 G2::generator() {
  G2 g;
  g.p_ = *blst_p2_generator();
  return g;
}

G2 G2::hash(std::string_view dst, ByteView msg) {
  G2 out;
  blst_hash_to_g2(&out.p_, msg.data(), msg.size(),
                  reinterpret_cast<const byte*>(dst.data()), dst.size(), nullptr, 0);
  return out;
}

G2 G2::operator+(const G2& o) const {
  G2 r;
  blst_p2_add_or_double(&r.p_, &p_, &o.p_);
  return r;
}

G2 G2::operator-() const {
  G2 r = *this;
  blst_p2_cneg(&r.p_, true);
  return r;
}

G2 G2::operator-(const G2& o) const { return *this + (-o); }

G2 G2::operator*(const Scalar& s) const {
  auto k = s.to_blst_scalar();
  G2 r;
  blst_p2_mult(&r.p_, &p_, k.b, 255);
  return r;
}

bool G2::is_identity() const { return blst_p2_is_inf(&p_); }
bool G2::operator==(const G2& o) const { return blst_p2_is_equal(&p_, &o.p_); }

std::array<std::uint8_t, G2::kBytes> G2::to_bytes() const {
  std::array<std::uint8_t, kBytes> out{};
  blst_p2_compress(out.data(), &p_);
  return out;
}

G2 G2::from_bytes(ByteView b) {
  if (b.size() != kBytes) throw Error(Errc::DecodeError, "G2 element must be 96 bytes");
  blst_p2_affine a;
  if (blst_p2_uncompress(&a, b.data()) != BLST_SUCCESS)
    throw Error(Errc::DecodeError, "invalid G2 encoding");
  if (!blst_p2_affine_in_g2(&a)) throw Error(Errc::DecodeError, "point not in G2");
  G2 r;
  blst_p2_from_affine(&r.p_, &a);
  auto again = r.to_bytes();
  if (!std::equal(again.begin(), again.end(), b.begin()))
    throw Error(Errc::DecodeError, "non-canonical G2 encoding");
  return r;
}

void G2::write(Writer& w) const { w.raw(to_bytes()); }
G2 G2::read(Reader& r) { return from_bytes(r.raw(kBytes)); }

blst_p2_affine G2::affine() const {
  blst_p2_affine a;
  blst_p2_to_affine(&a, &p_);
  return a;
}

// ---- GT -------------------------------------------------------------------

GT::GT() : f_(*blst_fp12_one()) {}

GT GT::operator*(const GT& o) const {
  GT r;
  blst_fp12_mul(&r.f_, &f_, &o.f_);
  return r;
}

GT GT::inverse() const {
  GT r;
  blst_fp12_inverse(&r.f_, &f_);
  return r;
}

GT GT::pow(const Scalar& e) const {
  auto k = e.to_blst_scalar();
  GT acc;
  for (int bit = 255; bit >= 0; --bit) {
    blst_fp12_sqr(&acc.f_, &acc.f_);
    if ((k.b[bit / 8] >> (bit % 8)) & 1) blst_fp12_mul(&acc.f_, &acc.f_, &f_);
  }
  return acc;
}

bool GT::is_one() const { return blst_fp12_is_one(&f_); }
bool GT::operator==(const GT& o) const { return blst_fp12_is_equal(&f_, &o.f_); }

namespace {

template <typename Fn>
void for_each_fp(const blst_fp12& f, Fn fn) {
  for (const auto& f6 : f.fp6)
    for (const auto& f2 : f6.fp2)
      for (const auto& fp : f2.fp) fn(fp);
}

}  // namespace

std::array<std::uint8_t, GT::kBytes> GT::to_bytes() const {
  std::array<std::uint8_t, kBytes> out{};
  std::size_t off = 0;
  for_each_fp(f_, [&](const blst_fp& fp) {
    blst_bendian_from_fp(out.data() + off, &fp);
    off += 48;
  });
  return out;
}

GT GT::from_bytes(ByteView b) {
  if (b.size() != kBytes) throw Error(Errc::DecodeError, "GT element must be 576 bytes");
  GT r;
  std::size_t off = 0;
  for (auto& f6 : r.f_.fp6)
    for (auto& f2 : f6.fp2)
      for (auto& fp : f2.fp) {
        blst_fp_from_bendian(&fp, b.data() + off);
        off += 48;
      }
  auto again = r.to_bytes();
  if (!std::equal(again.begin(), again.end(), b.begin()))
    throw Error(Errc::DecodeError, "non-canonical GT encoding");
  if (!blst_fp12_in_group(&r.f_)) throw Error(Errc::DecodeError, "element not in GT");
  return r;
}

void GT::write(Writer& w) const { w.raw(to_bytes()); }
GT GT::read(Reader& r) { return from_bytes(r.raw(kBytes)); }

GT pairing(const G1& p, const G2& q) {
  GT r;
  if (p.is_identity() || q.is_identity()) return r;
  auto pa = p.affine();
  auto qa = q.affine();
  blst_miller_loop(&r.f_, &qa, &pa);
  blst_final_exp(&r.f_, &r.f_);
  return r;
}

GT multi_pairing(std::span<const G1> p, std::span<const G2> q) {
  if (p.size() != q.size()) throw Error(Errc::OutOfRange, "pairing operand count mismatch");
  std::vector<blst_p1_affine> pa;
  std::vector<blst_p2_affine> qa;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i].is_identity() || q[i].is_identity()) continue;
    pa.push_back(p[i].affine());
    qa.push_back(q[i].affine());
  }
  GT r;
  if (pa.empty()) return r;
  std::vector<const blst_p1_affine*> pp;
  std::vector<const blst_p2_affine*> qp;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    pp.push_back(&pa[i]);
    qp.push_back(&qa[i]);
  }
  blst_miller_loop_n(&r.f_, qp.data(), pp.data(), pa.size());
  blst_final_exp(&r.f_, &r.f_);
  return r;
}

Scalar hash_to_scalar(std::string_view domain_tag, ByteView data) {
  if (domain_tag.empty()) throw Error(Errc::OutOfRange, "empty domain tag");
  auto wide = hmac_expand(as_bytes(domain_tag), data, 64);
  return Scalar::reduce(wide);
}

}  // namespace detaps::group
