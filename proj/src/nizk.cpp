#include "detaps/nizk.hpp"

#include "detaps/errors.hpp"
#include "detaps/rng.hpp"

namespace detaps::nizk {

namespace {

constexpr std::string_view kFsTag = "FS-COMBINE";
constexpr std::string_view kAttestTag = "DETAPS-ATTEST";
constexpr std::uint32_t kMaxItems = 1u << 12;

using Commitments = Transcript;

G2 gid_base(const CombineStatement& st, std::size_t i) { return st.mpk + st.gid_bases[i]; }

Scalar fs_challenge(const CombineStatement& st, const Commitments& a) {
  Writer w;
  st.write(w);
  w.put(a.open).seq(a.enc).seq(a.or1).seq(a.or2);
  return group::hash_to_scalar(kFsTag, w.bytes());
}

Bytes attestation_message(const CombineStatement& st, const CombineProof& p) {
  Writer w;
  w.str(kAttestTag);
  st.write(w);
  w.put(p.challenge).put(p.open_x).put(p.open_r);
  w.seq(p.enc_responses).seq(p.or_challenges).seq(p.or_responses);
  return std::move(w).bytes();
}

bool shapes_ok(const CombineStatement& st, const CombineProof& p) {
  return !st.gid_bases.empty() && p.enc_responses.size() == st.enc_points.size() &&
         p.or_challenges.size() == st.gid_bases.size() &&
         p.or_responses.size() == st.gid_bases.size();
}

// Recomputes the commitment-phase messages from responses and challenges.
Commitments reconstruct(const CombineStatement& st, const CombineProof& p) {
  Commitments a;
  a.open = G1::generator() * p.open_x + prim::pedersen_h() * p.open_r - st.com_pk.point * p.challenge;
  for (std::size_t i = 0; i < st.enc_points.size(); ++i)
    a.enc.push_back(G1::generator() * p.enc_responses[i] - st.enc_points[i] * p.challenge);
  for (std::size_t i = 0; i < st.gid_bases.size(); ++i) {
    a.or1.push_back(G2::generator() * p.or_responses[i] - st.c1 * p.or_challenges[i]);
    a.or2.push_back(gid_base(st, i) * p.or_responses[i] - st.c2 * p.or_challenges[i]);
  }
  return a;
}

Scalar sum(const std::vector<Scalar>& xs) {
  Scalar acc = Scalar::zero();
  for (const auto& x : xs) acc += x;
  return acc;
}

void mismatch(const char* what) { throw Error(Errc::WitnessMismatch, what); }

}  // namespace

void CombineStatement::write(Writer& w) const {
  w.u32(t_bound).put(com_pk).raw(ek_digest).put(mpk).seq(gid_bases).var(m).raw(sigma_bar_digest);
  w.seq(enc_points).put(c1).put(c2).raw(entries_digest).put(attestation_pub);
}

CombineStatement CombineStatement::read(Reader& r) {
  CombineStatement st;
  auto digest = [&r](Digest& d) {
    auto b = r.raw(d.size());
    std::copy(b.begin(), b.end(), d.begin());
  };
  st.t_bound = r.u32();
  st.com_pk = r.get<prim::Commitment>();
  digest(st.ek_digest);
  st.mpk = r.get<G2>();
  st.gid_bases = r.seq<G2>(kMaxItems);
  st.m = r.var();
  digest(st.sigma_bar_digest);
  st.enc_points = r.seq<G1>(kMaxItems);
  st.c1 = r.get<G2>();
  st.c2 = r.get<G2>();
  digest(st.entries_digest);
  st.attestation_pub = r.get<G1>();
  return st;
}

void CombineProof::write(Writer& w) const {
  w.put(challenge).put(open_x).put(open_r);
  w.seq(enc_responses).seq(or_challenges).seq(or_responses).put(attestation);
}

CombineProof CombineProof::read(Reader& r) {
  CombineProof p;
  p.challenge = r.get<Scalar>();
  p.open_x = r.get<Scalar>();
  p.open_r = r.get<Scalar>();
  p.enc_responses = r.seq<Scalar>(kMaxItems);
  p.or_challenges = r.seq<Scalar>(kMaxItems);
  p.or_responses = r.seq<Scalar>(kMaxItems);
  p.attestation = r.get<prim::SchnorrSig>();
  return p;
}

Bytes ats_key_bytes(const ats::PublicKey& pk) { return encode(pk); }

Digest entries_digest(const std::vector<group::GT>& entries) {
  Writer w;
  w.seq(entries);
  return tagged_digest("DETAPS-ENTRIES", w.bytes());
}

CombineProof prove_combine(const CombineStatement& st, const CombineWitness& wit,
                           const Scalar& attestation_sk, Rng& rng) {
  const auto pk_bytes = ats_key_bytes(wit.pk);
  if (!prim::com_verify(pk_bytes, wit.r_pk, st.com_pk)) mismatch("com_pk opening");
  if (!ats::verify(wit.pk, st.m, wit.sig_m)) mismatch("sealed signature");
  if (wit.members.size() > st.t_bound) mismatch("notary set exceeds bound");
  if (wit.enc_secrets.size() != st.enc_points.size()) mismatch("encryption randomness count");
  for (std::size_t i = 0; i < st.enc_points.size(); ++i)
    if (!(G1::generator() * wit.enc_secrets[i] == st.enc_points[i]))
      mismatch("encryption randomness");
  if (wit.gid_slot < 1 || wit.gid_slot > st.gid_bases.size()) mismatch("gid slot");
  const std::size_t real = wit.gid_slot - 1;
  if (!(G2::generator() * wit.index_randomness == st.c1) ||
      !(gid_base(st, real) * wit.index_randomness == st.c2))
    mismatch("index randomness");
  if (!(G1::generator() * attestation_sk == st.attestation_pub)) mismatch("attestation key");

  const auto x = prim::commit_message_scalar(pk_bytes);
  const auto a = Scalar::random(rng), b = Scalar::random(rng);
  Commitments com;
  com.open = G1::generator() * a + prim::pedersen_h() * b;
  std::vector<Scalar> enc_nonces;
  for (std::size_t i = 0; i < st.enc_points.size(); ++i) {
    enc_nonces.push_back(Scalar::random(rng));
    com.enc.push_back(G1::generator() * enc_nonces.back());
  }

  const std::size_t slots = st.gid_bases.size();
  CombineProof p;
  p.or_challenges.resize(slots);
  p.or_responses.resize(slots);
  const auto w = Scalar::random(rng);
  for (std::size_t i = 0; i < slots; ++i) {
    if (i == real) {
      com.or1.push_back(G2::generator() * w);
      com.or2.push_back(gid_base(st, i) * w);
      continue;
    }
    p.or_challenges[i] = Scalar::random(rng);
    p.or_responses[i] = Scalar::random(rng);
    com.or1.push_back(G2::generator() * p.or_responses[i] - st.c1 * p.or_challenges[i]);
    com.or2.push_back(gid_base(st, i) * p.or_responses[i] - st.c2 * p.or_challenges[i]);
  }

  p.challenge = fs_challenge(st, com);
  p.open_x = a + p.challenge * x;
  p.open_r = b + p.challenge * wit.r_pk;
  for (std::size_t i = 0; i < st.enc_points.size(); ++i)
    p.enc_responses.push_back(enc_nonces[i] + p.challenge * wit.enc_secrets[i]);
  p.or_challenges[real] = Scalar::zero();
  p.or_challenges[real] = p.challenge - sum(p.or_challenges);
  p.or_responses[real] = w + p.or_challenges[real] * wit.index_randomness;
  p.attestation = prim::sig_sign(attestation_sk, attestation_message(st, p));
  return p;
}

Bytes Transcript::bytes() const {
  Writer w;
  w.put(open).seq(enc).seq(or1).seq(or2).put(proof);
  return std::move(w).bytes();
}

Transcript transcript_of(const CombineStatement& st, const CombineProof& proof) {
  if (!shapes_ok(st, proof)) throw Error(Errc::DecodeError, "proof shape");
  auto tr = reconstruct(st, proof);
  tr.proof = proof;
  return tr;
}

bool check_equations(const CombineStatement& st, const Transcript& tr) {
  const auto& p = tr.proof;
  if (!shapes_ok(st, p) || tr.enc.size() != st.enc_points.size() ||
      tr.or1.size() != st.gid_bases.size() || tr.or2.size() != st.gid_bases.size())
    return false;
  if (!(sum(p.or_challenges) == p.challenge)) return false;
  if (!(G1::generator() * p.open_x + prim::pedersen_h() * p.open_r ==
        tr.open + st.com_pk.point * p.challenge))
    return false;
  for (std::size_t i = 0; i < tr.enc.size(); ++i)
    if (!(G1::generator() * p.enc_responses[i] == tr.enc[i] + st.enc_points[i] * p.challenge))
      return false;
  for (std::size_t i = 0; i < tr.or1.size(); ++i) {
    if (!(G2::generator() * p.or_responses[i] == tr.or1[i] + st.c1 * p.or_challenges[i]))
      return false;
    if (!(gid_base(st, i) * p.or_responses[i] == tr.or2[i] + st.c2 * p.or_challenges[i]))
      return false;
  }
  return true;
}

bool verify_combine(const CombineStatement& st, const CombineProof& proof) {
  if (!shapes_ok(st, proof) || !(sum(proof.or_challenges) == proof.challenge)) return false;
  // The attestation is the cheap check and already binds the statement.
  if (!prim::sig_verify(st.attestation_pub, attestation_message(st, proof), proof.attestation))
    return false;
  return fs_challenge(st, reconstruct(st, proof)) == proof.challenge;
}

Transcript simulate(const CombineStatement& st, const Scalar& challenge, Rng& rng) {
  CombineProof p;
  p.challenge = challenge;
  p.open_x = Scalar::random(rng);
  p.open_r = Scalar::random(rng);
  for (std::size_t i = 0; i < st.enc_points.size(); ++i) p.enc_responses.push_back(Scalar::random(rng));
  for (std::size_t i = 0; i < st.gid_bases.size(); ++i) {
    p.or_challenges.push_back(i + 1 < st.gid_bases.size() ? Scalar::random(rng) : Scalar::zero());
    p.or_responses.push_back(Scalar::random(rng));
  }
  p.or_challenges.back() = challenge - sum(p.or_challenges);
  return transcript_of(st, p);
}

}  // namespace detaps::nizk
