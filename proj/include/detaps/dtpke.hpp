#pragma once

// Dynamic threshold public-key encryption.
//
// Encryption shares a fresh secret s with a polynomial f of fixed degree
// t'_max - 1 and Feldman commitments C_k = g^{a_k}. A member with evaluation
// point x = H(pid) receives Y = upk^{f(x)} in one of n3 shuffled slots,
// together with a DLEQ proof that log_g X = log_upk Y, X = prod C_k^{x^k}.
// Unused slots are random. The t'_max - t' "filler" evaluations that make
// any t' member shares sufficient are sealed to the combine key together
// with (N, t'), so the public ciphertext layout depends on (n3, t'_max) only.
// A notary decrypts its slot to S = G^{f(x)} and proves it with a second
// DLEQ; Combine interpolates G^{s} in the exponent and opens the AEAD body.

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "detaps/bytes.hpp"
#include "detaps/group.hpp"
#include "detaps/parallel.hpp"
#include "detaps/primitives.hpp"

namespace detaps {
class Rng;
}

namespace detaps::dtpke {

using group::G1;
using group::Scalar;
using prim::SchnorrSig;

// Per-epoch pseudo-identity of a notary.
struct Pid {
  static constexpr std::size_t kBytes = 40;
  std::array<std::uint8_t, 32> token{};
  std::uint64_t epoch = 0;

  auto operator<=>(const Pid&) const = default;
  void write(Writer& w) const;
  static Pid read(Reader& r);
};

// Base for decrypted shares; independent of G1::generator().
const G1& secret_base();
// Evaluation point of a member share.
Scalar eval_point(const Pid& pid);

struct EncryptionKey {
  std::uint32_t n3 = 0;     // slots per ciphertext (maximum notary count)
  std::uint32_t t_max = 0;  // largest supported threshold
  G1 combine_pub;           // meta block is sealed to this key
  G1 cert_pub;              // authority key certifying (pid, upk)

  bool operator==(const EncryptionKey&) const = default;
  void write(Writer& w) const;
  static EncryptionKey read(Reader& r);
};

struct DecryptionParams {
  std::uint32_t n3 = 0;

  void write(Writer& w) const { w.u32(n3); }
  static DecryptionParams read(Reader& r) { return {r.u32()}; }
};

struct VerificationKey {
  G1 cert_pub;

  void write(Writer& w) const { w.put(cert_pub); }
  static VerificationKey read(Reader& r) { return {r.get<G1>()}; }
};

struct CombineKey {
  Scalar secret;
  VerificationKey vk;

  void write(Writer& w) const { w.put(secret).put(vk); }
  static CombineKey read(Reader& r) {
    auto s = r.get<Scalar>();
    return {s, r.get<VerificationKey>()};
  }
};

struct MasterKey {
  std::array<std::uint8_t, 32> join_seed{};
  Scalar cert_secret;
  std::uint64_t next_epoch = 0;
};

struct Authority {
  MasterKey mk;
  EncryptionKey ek;
  DecryptionParams dk;
  VerificationKey vk;
  CombineKey ck;
};

// (upk, authority certificate over (pid, upk)).
struct UserVerificationKey {
  G1 upk;
  SchnorrSig cert;

  bool operator==(const UserVerificationKey&) const = default;
  void write(Writer& w) const { w.put(upk).put(cert); }
  static UserVerificationKey read(Reader& r) {
    auto upk = r.get<G1>();
    return {upk, r.get<SchnorrSig>()};
  }
};

// Public directory entry of a joined notary.
struct NotaryPublic {
  Pid pid;
  UserVerificationKey uvk;

  bool operator==(const NotaryPublic&) const = default;
  void write(Writer& w) const { w.put(pid).put(uvk); }
  static NotaryPublic read(Reader& r) {
    auto pid = r.get<Pid>();
    return {pid, r.get<UserVerificationKey>()};
  }
};

struct NotaryKeys {
  Pid pid;
  Scalar usk;
  G1 upk;
  UserVerificationKey uvk;

  NotaryPublic public_part() const { return {pid, uvk}; }
};

// Throws Error(BadBound) unless 1 <= t_max <= n3.
Authority setup(std::uint32_t n3, std::uint32_t t_max, Rng& rng);
// Each call issues a fresh pseudo-identity (the epoch counter advances).
NotaryKeys join(MasterKey& mk, std::string_view id);

bool certificate_valid(const VerificationKey& vk, const NotaryPublic& member);

struct Slot {
  static constexpr std::size_t kBytes = G1::kBytes + 16 + 2 * Scalar::kBytes;
  G1 enc_share;
  std::array<std::uint8_t, 16> tag{};
  Scalar proof_c;
  Scalar proof_z;

  bool operator==(const Slot&) const = default;
  void write(Writer& w) const;
  static Slot read(Reader& r);
};

struct Ciphertext {
  std::vector<G1> commitments;  // t_max entries
  std::vector<Slot> slots;      // n3 entries
  prim::HybridCiphertext meta;  // sealed to combine_pub
  G1 one_time_pub;
  Bytes body;                   // AEAD ciphertext including tag
  SchnorrSig binding;           // one-time signature over all fields above

  bool operator==(const Ciphertext&) const = default;
  void write(Writer& w) const;
  static Ciphertext read(Reader& r);
  // Everything the one-time signature covers.
  Bytes signed_part() const;
};

inline constexpr std::uint32_t kNoSlot = 0xffffffffu;

struct DecryptionShare {
  Pid pid;
  std::uint32_t slot = kNoSlot;
  G1 share_point;
  Scalar proof_c;
  Scalar proof_z;

  bool operator==(const DecryptionShare&) const = default;
  void write(Writer& w) const;
  static DecryptionShare read(Reader& r);
};

// Discrete logs (base g) of the ciphertext's public randomness, in the order
// of randomness_points(): Feldman coefficients, meta ephemeral, one-time key.
struct EncryptionSecrets {
  std::vector<Scalar> coeffs;
  Scalar meta_ephemeral;
  Scalar one_time;

  std::vector<Scalar> flatten() const;
};

std::vector<G1> randomness_points(const Ciphertext& c);

// Throws ThresholdTooLarge if t' > |N|, t' < 1 or t' > t_max; TooManyPids if
// |N| > n3; UnknownPid if a member is not certified by the authority.
Ciphertext encrypt(const EncryptionKey& ek, const std::vector<NotaryPublic>& members,
                   std::uint32_t threshold, ByteView plaintext, Rng& rng,
                   EncryptionSecrets* secrets = nullptr);

bool validate(const EncryptionKey& ek, const std::vector<NotaryPublic>& members,
              std::uint32_t threshold, const Ciphertext& c);

// For a non-member the share carries kNoSlot and never verifies.
DecryptionShare share_decrypt(const DecryptionParams& dk, const Pid& pid, const Scalar& usk,
                              const Ciphertext& c);

bool share_verify(const VerificationKey& vk, const Pid& pid, const UserVerificationKey& uvk,
                  const Ciphertext& c, const DecryptionShare& share);

struct SealedMeta {
  std::uint32_t threshold = 0;
  std::vector<Pid> members;
};

// Opens the meta block with the combine key. Returns nullopt on failure.
std::optional<SealedMeta> open_meta(const CombineKey& ck, const Ciphertext& c);

// Verifies every share (one flag per share) against the member directory.
std::vector<std::uint8_t> verify_shares(const VerificationKey& vk,
                                        const std::vector<NotaryPublic>& members,
                                        const Ciphertext& c,
                                        const std::vector<DecryptionShare>& shares,
                                        Exec exec = Exec::Parallel);

// Recovers the plaintext from >= t' valid member shares; invalid or
// non-member shares are dropped, then the lowest pids are used.
// Throws InsufficientShares, AuthFailure, or ValidationFailed.
Bytes combine(const CombineKey& ck, const std::vector<NotaryPublic>& members,
              std::uint32_t threshold, const Ciphertext& c,
              const std::vector<DecryptionShare>& shares, Exec exec = Exec::Parallel);

// Serialized ciphertext length for a plaintext of the given size.
std::size_t ciphertext_size(std::uint32_t n3, std::uint32_t t_max, std::size_t plaintext_len);

}  // namespace detaps::dtpke
