#pragma once

// Public side of the scheme: system parameters and public key, the signer
// and notary algorithms, signature wire types and Verify. Everything that
// needs sealed keys lives behind EnclaveHandle (enclave.hpp).

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "detaps/ats.hpp"
#include "detaps/bytes.hpp"
#include "detaps/dtpke.hpp"
#include "detaps/kase.hpp"
#include "detaps/nizk.hpp"
#include "detaps/parallel.hpp"
#include "detaps/primitives.hpp"

namespace detaps {
class Rng;
}

namespace detaps::scheme {

using dtpke::Pid;
using group::G1;
using group::G2;
using group::GT;
using group::Scalar;

struct SystemParams {
  std::uint32_t n = 10;   // signers
  std::uint32_t n1 = 5;   // combiners
  std::uint32_t n2 = 5;   // tracers
  std::uint32_t n3 = 10;  // notaries; also index entries and DTPKE slots
  std::uint32_t t = 5;
  std::uint32_t kase_capacity = 4;
  std::uint32_t retention_epochs = 8;
  std::vector<std::string> groups{"default"};
};

// Group identifier for one signing period: HASH(GID, epoch).
struct Gid {
  std::array<std::uint8_t, 32> value{};

  auto operator<=>(const Gid&) const = default;
  void write(Writer& w) const { w.raw(value); }
  static Gid read(Reader& r);
};

// Public gid -> KASE slot assignment, as recorded on chain.
struct GidSlot {
  Gid gid;
  std::uint32_t slot = 0;

  bool operator==(const GidSlot&) const = default;
  void write(Writer& w) const { w.put(gid).u32(slot); }
  static GidSlot read(Reader& r) {
    auto g = r.get<Gid>();
    return {g, r.u32()};
  }
};
using GidRegistry = std::vector<GidSlot>;

struct PublicKey {
  std::uint32_t n = 0, n1 = 0, n2 = 0, n3 = 0;
  prim::Commitment com_pk;
  dtpke::EncryptionKey ek;
  dtpke::DecryptionParams dk;
  dtpke::VerificationKey vk;
  std::vector<G1> combiner_sig;   // pk^s_j
  std::vector<G1> combiner_enc;   // pk^e_j
  std::vector<G1> combiner_att;   // enclave attestation keys
  std::vector<G1> tracer_enc;
  std::vector<G1> tracer_att;
  kase::Params kase;
  kase::MasterPublic mpk;
  std::vector<dtpke::NotaryPublic> notaries;
  std::vector<std::string> groups;

  void write(Writer& w) const;
  static PublicKey read(Reader& r);

  const dtpke::NotaryPublic* find_notary(const Pid& pid) const;
};

// Throws UnknownGroup if the name was not registered at setup.
Gid derive_gid(const PublicKey& pk, std::string_view group_name, std::uint64_t epoch);

// sigma-hat_i: PKE ciphertext of (m, sigma_i, N, gid) under a combiner enclave key.
struct EncryptedShare {
  prim::HybridCiphertext ct;

  bool operator==(const EncryptedShare&) const = default;
  void write(Writer& w) const { w.put(ct); }
  static EncryptedShare read(Reader& r) { return {r.get<prim::HybridCiphertext>()}; }
};

struct SharePayload {
  Bytes m;
  ats::Share share;
  std::vector<Pid> members;
  Gid gid;
};

// Quorum padded to n entries and N padded to n3, so the length depends on |m| only.
Bytes encode_share_payload(const SharePayload& p, std::uint32_t n, std::uint32_t n3);
SharePayload decode_share_payload(ByteView b, std::uint32_t n, std::uint32_t n3);
SharePayload open_share(const Scalar& enclave_sk, const EncryptedShare& s, std::uint32_t n,
                        std::uint32_t n3);
// Batch form; entries that fail to decrypt or decode are left empty.
std::vector<std::optional<SharePayload>> open_shares(const Scalar& enclave_sk,
                                                     const std::vector<EncryptedShare>& shares,
                                                     std::uint32_t n, std::uint32_t n3,
                                                     Exec exec = Exec::Parallel);

// Throws NotInQuorum / WrongQuorumSize (from the ATS), UnknownNotary if N
// names a pid outside the directory, TooManyPids if |N| > n3.
EncryptedShare sign(const PublicKey& pk, const ats::SignerKey& sk, ByteView m,
                    const ats::Quorum& quorum, const std::vector<Pid>& members, const Gid& gid,
                    const G1& combiner_enc_pub, Rng& rng);

struct SignRequest {
  Bytes m;
  ats::Quorum quorum;
  std::vector<Pid> members;
  Gid gid;
};

// One share per request; rngs are forked per index so the result does not
// depend on the execution policy.
std::vector<EncryptedShare> sign_batch(const PublicKey& pk, const ats::SignerKey& sk,
                                       const std::vector<SignRequest>& requests,
                                       const G1& combiner_enc_pub, const Rng& rng,
                                       Exec exec = Exec::Parallel);

// Everything in sigma except eta.
struct SignatureBody {
  std::uint32_t combiner = 0;
  dtpke::Ciphertext sigma_bar;
  G2 c1;
  G2 c2;
  std::vector<GT> entries;
  nizk::CombineProof pi;

  bool operator==(const SignatureBody&) const = default;
  void write(Writer& w) const;
  static SignatureBody read(Reader& r);
};

struct Signature {
  SignatureBody body;
  prim::SchnorrSig eta;

  bool operator==(const Signature&) const = default;
  void write(Writer& w) const { w.put(body).put(eta); }
  static Signature read(Reader& r) {
    auto b = r.get<SignatureBody>();
    return {b, r.get<prim::SchnorrSig>()};
  }
};

// Length of a plaintext sigma^m after padding to the t = n size.
std::size_t padded_ats_size(std::uint32_t n);
Bytes pad_ats_signature(const ats::Signature& s, std::uint32_t n);
ats::Signature unpad_ats_signature(ByteView b);

Bytes eta_message(ByteView m, const SignatureBody& body);
nizk::CombineStatement make_statement(const PublicKey& pk, ByteView m, const SignatureBody& body);
Digest signature_digest(ByteView m, const Signature& sigma);

bool verify_eta(const PublicKey& pk, ByteView m, const Signature& sigma);
// Never throws.
bool verify(const PublicKey& pk, ByteView m, const Signature& sigma);

// Notary side.
struct NotaryState {
  dtpke::NotaryKeys keys;
  kase::AggregateKey k_a;
};

kase::Trapdoor notary_trapdoor(const NotaryState& notary);

// Tx^Response payload: the target signature digest and the sealed share.
struct NotaryResponse {
  Digest sigma_digest{};
  prim::HybridCiphertext ct;

  bool operator==(const NotaryResponse&) const = default;
  void write(Writer& w) const { w.raw(sigma_digest).put(ct); }
  static NotaryResponse read(Reader& r);
};

struct ResponsePlain {
  dtpke::NotaryPublic member;
  dtpke::DecryptionShare share;

  void write(Writer& w) const { w.put(member).put(share); }
  static ResponsePlain read(Reader& r) {
    auto m = r.get<dtpke::NotaryPublic>();
    return {m, r.get<dtpke::DecryptionShare>()};
  }
};

// Trace step 4-6 for one search hit. Throws SigInvalid if eta fails and
// NoMatch if the notary holds no slot in sigma-bar.
NotaryResponse notary_respond(const PublicKey& pk, const NotaryState& notary, ByteView m,
                              const Signature& sigma, const G1& tracer_enc_pub, Rng& rng);

}  // namespace detaps::scheme
