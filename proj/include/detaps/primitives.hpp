#pragma once

// Building blocks: Pedersen commitments over G1, Schnorr signatures, and
// hybrid public-key encryption (ElGamal KEM + AES-256-GCM).

#include <array>
#include <cstdint>

#include "detaps/bytes.hpp"
#include "detaps/group.hpp"

namespace detaps {
class Rng;
}

namespace detaps::prim {

using group::G1;
using group::Scalar;

// Second Pedersen generator; nobody knows its discrete log w.r.t. G1::generator().
const G1& pedersen_h();

struct Commitment {
  G1 point;

  bool operator==(const Commitment&) const = default;
  void write(Writer& w) const { w.put(point); }
  static Commitment read(Reader& r) { return {r.get<G1>()}; }
};

// The committed byte string enters the exponent through hash_to_scalar.
Scalar commit_message_scalar(ByteView x);
Commitment com_commit(ByteView x, const Scalar& r);
bool com_verify(ByteView x, const Scalar& r, const Commitment& com);

enum class SchemeId : std::uint8_t { Sig = 1, Pke = 2 };

struct KeyPair {
  SchemeId scheme = SchemeId::Sig;
  G1 pub;
  Scalar secret;
};

// Empty seed draws fresh system randomness; a nonempty seed is deterministic.
KeyPair keygen(SchemeId scheme, ByteView seed);
KeyPair keygen(SchemeId scheme, Rng& rng);

struct SchnorrSig {
  static constexpr std::size_t kBytes = 64;
  Scalar challenge;
  Scalar response;

  bool operator==(const SchnorrSig&) const = default;
  void write(Writer& w) const { w.put(challenge).put(response); }
  static SchnorrSig read(Reader& r) {
    auto c = r.get<Scalar>();
    return {c, r.get<Scalar>()};
  }
};

// Deterministic nonce derived from (sk, msg).
SchnorrSig sig_sign(const Scalar& sk, ByteView msg);
bool sig_verify(const G1& pk, ByteView msg, const SchnorrSig& sig);
// Same as above but over an encoded signature; malformed input yields false.
bool sig_verify(const G1& pk, ByteView msg, ByteView sig_bytes);

struct HybridCiphertext {
  static constexpr std::size_t kOverhead = G1::kBytes + 4 + 16;

  G1 ephemeral;
  Bytes body;
  std::array<std::uint8_t, 16> tag{};

  bool operator==(const HybridCiphertext&) const = default;
  void write(Writer& w) const;
  static HybridCiphertext read(Reader& r);
};

HybridCiphertext pke_encrypt(const G1& pk, ByteView plaintext, Rng& rng);
// Same with a caller-chosen ephemeral secret (nonzero).
HybridCiphertext pke_encrypt_with(const G1& pk, ByteView plaintext, const Scalar& ephemeral);
// Throws Error(AuthFailure) on a wrong key or a modified ciphertext.
Bytes pke_decrypt(const Scalar& sk, const HybridCiphertext& ct);

}  // namespace detaps::prim
