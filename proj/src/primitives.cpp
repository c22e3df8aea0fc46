#include "detaps/primitives.hpp"

#include "detaps/errors.hpp"
#include "detaps/hash.hpp"
#include "detaps/rng.hpp"

namespace detaps::prim {

namespace {

constexpr std::string_view kPedersenDst = "DETAPS-V1-PEDERSEN-H";
constexpr std::string_view kSigTag = "DETAPS-SCHNORR";
constexpr std::string_view kNonceTag = "DETAPS-SCHNORR-NONCE";
constexpr std::string_view kKdfTag = "DETAPS-PKE-KDF";

Scalar schnorr_challenge(const G1& commitment, const G1& pk, ByteView msg) {
  Writer w;
  w.put(commitment).put(pk).raw(msg);
  return group::hash_to_scalar(kSigTag, w.bytes());
}

struct DemKeys {
  Bytes key;
  Bytes nonce;
};

DemKeys derive_dem(const G1& ephemeral, const G1& shared) {
  Writer w;
  w.put(ephemeral).put(shared);
  auto okm = hmac_expand(as_bytes(kKdfTag), w.bytes(), 32 + kAeadNonceBytes);
  return {Bytes(okm.begin(), okm.begin() + 32), Bytes(okm.begin() + 32, okm.end())};
}

}  // namespace

const G1& pedersen_h() {
  static const G1 h = G1::hash(kPedersenDst, as_bytes("h"));
  return h;
}

Scalar commit_message_scalar(ByteView x) { return group::hash_to_scalar("DETAPS-COM-MSG", x); }

Commitment com_commit(ByteView x, const Scalar& r) {
  return {G1::generator() * commit_message_scalar(x) + pedersen_h() * r};
}

bool com_verify(ByteView x, const Scalar& r, const Commitment& com) {
  return com_commit(x, r) == com;
}

KeyPair keygen(SchemeId scheme, Rng& rng) {
  KeyPair kp;
  kp.scheme = scheme;
  kp.secret = Scalar::random_nonzero(rng);
  kp.pub = G1::generator() * kp.secret;
  return kp;
}

KeyPair keygen(SchemeId scheme, ByteView seed) {
  if (seed.empty()) {
    auto rng = Rng::fresh();
    return keygen(scheme, rng);
  }
  Writer w;
  w.u8(static_cast<std::uint8_t>(scheme)).raw(seed);
  Rng rng(w.bytes());
  return keygen(scheme, rng);
}

SchnorrSig sig_sign(const Scalar& sk, ByteView msg) {
  Writer nw;
  nw.put(sk).raw(msg);
  auto k = group::hash_to_scalar(kNonceTag, nw.bytes());
  if (k.is_zero()) k = Scalar::one();
  const G1 pk = G1::generator() * sk;
  const G1 commitment = G1::generator() * k;
  auto c = schnorr_challenge(commitment, pk, msg);
  return {c, k + c * sk};
}

bool sig_verify(const G1& pk, ByteView msg, const SchnorrSig& sig) {
  const G1 commitment = G1::generator() * sig.response - pk * sig.challenge;
  return schnorr_challenge(commitment, pk, msg) == sig.challenge;
}

bool sig_verify(const G1& pk, ByteView msg, ByteView sig_bytes) {
  try {
    return sig_verify(pk, msg, decode_all<SchnorrSig>(sig_bytes));
  } catch (const Error&) {
    return false;
  }
}

void HybridCiphertext::write(Writer& w) const {
  w.put(ephemeral).var(body).raw(tag);
}

HybridCiphertext HybridCiphertext::read(Reader& r) {
  HybridCiphertext ct;
  ct.ephemeral = r.get<G1>();
  ct.body = r.var();
  auto t = r.raw(ct.tag.size());
  std::copy(t.begin(), t.end(), ct.tag.begin());
  return ct;
}

HybridCiphertext pke_encrypt(const G1& pk, ByteView plaintext, Rng& rng) {
  return pke_encrypt_with(pk, plaintext, Scalar::random_nonzero(rng));
}

HybridCiphertext pke_encrypt_with(const G1& pk, ByteView plaintext, const Scalar& k) {
  if (k.is_zero()) throw Error(Errc::OutOfRange, "zero ephemeral");
  HybridCiphertext ct;
  ct.ephemeral = G1::generator() * k;
  const auto dem = derive_dem(ct.ephemeral, pk * k);
  const auto eph = ct.ephemeral.to_bytes();
  auto sealed = aead_seal(dem.key, dem.nonce, eph, plaintext);
  std::copy(sealed.end() - kAeadTagBytes, sealed.end(), ct.tag.begin());
  sealed.resize(sealed.size() - kAeadTagBytes);
  ct.body = std::move(sealed);
  return ct;
}

Bytes pke_decrypt(const Scalar& sk, const HybridCiphertext& ct) {
  const auto dem = derive_dem(ct.ephemeral, ct.ephemeral * sk);
  Bytes sealed = ct.body;
  sealed.insert(sealed.end(), ct.tag.begin(), ct.tag.end());
  const auto eph = ct.ephemeral.to_bytes();
  return aead_open(dem.key, dem.nonce, eph, sealed);
}

}  // namespace detaps::prim
