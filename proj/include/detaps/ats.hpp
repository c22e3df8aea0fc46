#pragma once

// Accountable threshold signature: quorum-annotated multi-Schnorr. Each
// signer signs (m, canonical(S)); the combined signature is the ordered list
// of the t inner signatures, so Trace is a verified read-out of S.

#include <cstdint>
#include <optional>
#include <vector>

#include "detaps/bytes.hpp"
#include "detaps/group.hpp"
#include "detaps/parallel.hpp"
#include "detaps/primitives.hpp"

namespace detaps {
class Rng;
}

namespace detaps::ats {

using group::G1;
using group::Scalar;
using prim::SchnorrSig;

// Sorted, duplicate-free, 1-based signer indices.
using Quorum = std::vector<std::uint32_t>;

// Sorts and checks for duplicates and zero indices.
Quorum make_quorum(std::vector<std::uint32_t> indices);
// 4-byte count followed by the sorted 4-byte indices.
Bytes canonical_quorum(const Quorum& q);
void write_quorum(Writer& w, const Quorum& q);
Quorum read_quorum(Reader& r, std::uint32_t max);

struct PublicKey {
  std::vector<G1> keys;  // keys[i-1] verifies signer i
  std::uint32_t t = 0;
  std::uint32_t n = 0;

  bool operator==(const PublicKey&) const = default;
  void write(Writer& w) const;
  static PublicKey read(Reader& r);
};

struct SignerKey {
  std::uint32_t index = 0;
  std::uint32_t t = 0;
  Scalar secret;
};

struct Share {
  std::uint32_t signer = 0;
  Quorum quorum;
  SchnorrSig inner;

  bool operator==(const Share&) const = default;
  void write(Writer& w) const;
  static Share read(Reader& r);
};

struct Signature {
  Quorum quorum;
  std::vector<SchnorrSig> sigs;  // ordered like quorum

  bool operator==(const Signature&) const = default;
  void write(Writer& w) const;
  static Signature read(Reader& r);
  // Encoded length for a quorum of size t.
  static std::size_t encoded_size(std::uint32_t t);
};

struct KeyMaterial {
  PublicKey pk;
  std::vector<SignerKey> signers;
};

// Throws Error(BadThreshold) unless 1 <= t <= n.
KeyMaterial keygen(std::uint32_t n, std::uint32_t t, Rng& rng);

// Message each signer actually signs.
Bytes signing_payload(ByteView m, const Quorum& quorum);

Share sign(const SignerKey& sk, ByteView m, const Quorum& quorum);

// Per-share check against the matching key; one flag per share.
std::vector<std::uint8_t> verify_shares(const PublicKey& pk, ByteView m,
                                        const std::vector<Share>& shares,
                                        Exec exec = Exec::Parallel);

// Verifies every share first; the lowest-index bad share is reported via
// ShareInvalidError.
Signature combine(const PublicKey& pk, ByteView m, const Quorum& quorum,
                  const std::vector<Share>& shares, Exec exec = Exec::Parallel);

bool verify(const PublicKey& pk, ByteView m, const Signature& sig);
std::optional<Quorum> trace(const PublicKey& pk, ByteView m, const Signature& sig);

}  // namespace detaps::ats
