#pragma once

// Combiner proof pi. One Fiat-Shamir challenge (tag "FS-COMBINE") covers
//   - an Okamoto proof of an opening of com_pk,
//   - a batched Schnorr proof of the discrete logs behind the public
//     randomness of the DTPKE ciphertext (Feldman coefficients, meta
//     ephemeral, one-time key),
//   - an OR-proof that (c1, c2) = (g2^t, (v g2_i)^t) for some gid slot i,
//     which keeps the gid itself out of the signature.
// The clauses "N fits in n3 slots" and "the sealed ATS signature verifies"
// are checked by the enclave before proving and covered by its attestation
// signature over statement and transcript.

#include <cstdint>
#include <vector>

#include "detaps/ats.hpp"
#include "detaps/bytes.hpp"
#include "detaps/dtpke.hpp"
#include "detaps/group.hpp"
#include "detaps/hash.hpp"
#include "detaps/primitives.hpp"

namespace detaps {
class Rng;
}

namespace detaps::nizk {

using group::G1;
using group::G2;
using group::Scalar;

struct CombineStatement {
  std::uint32_t t_bound = 0;       // n3; bounds |N|
  prim::Commitment com_pk;
  Digest ek_digest{};
  G2 mpk;                           // KASE v
  std::vector<G2> gid_bases;        // g2_i for slots 1..capacity
  Bytes m;
  Digest sigma_bar_digest{};
  std::vector<G1> enc_points;       // dtpke::randomness_points(sigma_bar)
  G2 c1;
  G2 c2;
  Digest entries_digest{};
  G1 attestation_pub;

  void write(Writer& w) const;
  static CombineStatement read(Reader& r);
};

struct CombineWitness {
  ats::PublicKey pk;
  Scalar r_pk;
  ats::Signature sig_m;
  std::vector<dtpke::Pid> members;
  std::vector<Scalar> enc_secrets;  // aligned with statement.enc_points
  std::uint32_t gid_slot = 0;       // 1-based
  Scalar index_randomness;
};

struct CombineProof {
  Scalar challenge;
  Scalar open_x;                     // Okamoto responses
  Scalar open_r;
  std::vector<Scalar> enc_responses;
  std::vector<Scalar> or_challenges;  // one per gid slot, summing to challenge
  std::vector<Scalar> or_responses;
  prim::SchnorrSig attestation;

  bool operator==(const CombineProof&) const = default;
  void write(Writer& w) const;
  static CombineProof read(Reader& r);
};

Bytes ats_key_bytes(const ats::PublicKey& pk);
Digest entries_digest(const std::vector<group::GT>& entries);

// Throws WitnessMismatch when any clause fails for the witness. Nonces are
// drawn from rng, so a fixed rng state gives identical proof bytes.
CombineProof prove_combine(const CombineStatement& st, const CombineWitness& wit,
                           const Scalar& attestation_sk, Rng& rng);

bool verify_combine(const CombineStatement& st, const CombineProof& proof);

// Interactive view: commitment-phase messages plus the proof's responses.
struct Transcript {
  G1 open;
  std::vector<G1> enc;
  std::vector<G2> or1;
  std::vector<G2> or2;
  CombineProof proof;

  Bytes bytes() const;
};

Transcript transcript_of(const CombineStatement& st, const CombineProof& proof);

// Checks the sigma equations of a transcript against its own challenge
// (no Fiat-Shamir recomputation, no attestation).
bool check_equations(const CombineStatement& st, const Transcript& tr);

// Honest-verifier simulator: picks the challenge first, then responses.
Transcript simulate(const CombineStatement& st, const Scalar& challenge, Rng& rng);

}  // namespace detaps::nizk
