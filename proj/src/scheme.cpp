#include "detaps/scheme.hpp"

#include <algorithm>
#include <exception>

#include "detaps/errors.hpp"
#include "detaps/hash.hpp"
#include "detaps/rng.hpp"

namespace detaps::scheme {

namespace {

constexpr std::uint32_t kMaxParties = 1u << 16;

void read_digest(Reader& r, Digest& d) {
  auto b = r.raw(d.size());
  std::copy(b.begin(), b.end(), d.begin());
}

}  // namespace

Gid Gid::read(Reader& r) {
  Gid g;
  auto b = r.raw(g.value.size());
  std::copy(b.begin(), b.end(), g.value.begin());
  return g;
}

void PublicKey::write(Writer& w) const {
  w.u32(n).u32(n1).u32(n2).u32(n3);
  w.put(com_pk).put(ek).put(dk).put(vk);
  w.seq(combiner_sig).seq(combiner_enc).seq(combiner_att).seq(tracer_enc).seq(tracer_att);
  w.put(kase).put(mpk).seq(notaries);
  w.u32(static_cast<std::uint32_t>(groups.size()));
  for (const auto& g : groups) w.str(g);
}

PublicKey PublicKey::read(Reader& r) {
  PublicKey pk;
  pk.n = r.u32();
  pk.n1 = r.u32();
  pk.n2 = r.u32();
  pk.n3 = r.u32();
  pk.com_pk = r.get<prim::Commitment>();
  pk.ek = r.get<dtpke::EncryptionKey>();
  pk.dk = r.get<dtpke::DecryptionParams>();
  pk.vk = r.get<dtpke::VerificationKey>();
  pk.combiner_sig = r.seq<G1>(kMaxParties);
  pk.combiner_enc = r.seq<G1>(kMaxParties);
  pk.combiner_att = r.seq<G1>(kMaxParties);
  pk.tracer_enc = r.seq<G1>(kMaxParties);
  pk.tracer_att = r.seq<G1>(kMaxParties);
  pk.kase = r.get<kase::Params>();
  pk.mpk = r.get<kase::MasterPublic>();
  pk.notaries = r.seq<dtpke::NotaryPublic>(kMaxParties);
  const auto ng = r.count(kMaxParties);
  for (std::uint32_t i = 0; i < ng; ++i) {
    auto b = r.var();
    pk.groups.emplace_back(b.begin(), b.end());
  }
  return pk;
}

const dtpke::NotaryPublic* PublicKey::find_notary(const Pid& pid) const {
  for (const auto& nt : notaries)
    if (nt.pid == pid) return &nt;
  return nullptr;
}

Gid derive_gid(const PublicKey& pk, std::string_view group_name, std::uint64_t epoch) {
  if (std::find(pk.groups.begin(), pk.groups.end(), group_name) == pk.groups.end())
    throw Error(Errc::UnknownGroup, "group not registered");
  Writer w;
  w.str(group_name).u64(epoch);
  return {tagged_digest("DETAPS-GID", w.bytes())};
}

Bytes encode_share_payload(const SharePayload& p, std::uint32_t n, std::uint32_t n3) {
  if (p.share.quorum.size() > n || p.members.size() > n3)
    throw Error(Errc::TooManyPids, "payload exceeds padding bounds");
  Writer w;
  w.var(p.m).u32(p.share.signer).u32(static_cast<std::uint32_t>(p.share.quorum.size()));
  for (std::uint32_t i = 0; i < n; ++i) w.u32(i < p.share.quorum.size() ? p.share.quorum[i] : 0);
  w.put(p.share.inner).u32(static_cast<std::uint32_t>(p.members.size()));
  for (std::uint32_t i = 0; i < n3; ++i) (i < p.members.size() ? p.members[i] : Pid{}).write(w);
  w.put(p.gid);
  return std::move(w).bytes();
}

SharePayload decode_share_payload(ByteView b, std::uint32_t n, std::uint32_t n3) {
  Reader r(b);
  SharePayload p;
  p.m = r.var();
  p.share.signer = r.u32();
  const auto qsize = r.u32();
  if (qsize > n) throw Error(Errc::DecodeError, "quorum count");
  std::vector<std::uint32_t> q;
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto v = r.u32();
    if (i < qsize) q.push_back(v);
  }
  p.share.quorum = ats::make_quorum(std::move(q));
  p.share.inner = r.get<prim::SchnorrSig>();
  const auto msize = r.u32();
  if (msize > n3) throw Error(Errc::DecodeError, "member count");
  for (std::uint32_t i = 0; i < n3; ++i) {
    auto pid = r.get<Pid>();
    if (i < msize) p.members.push_back(pid);
  }
  p.gid = r.get<Gid>();
  r.finish();
  return p;
}

SharePayload open_share(const Scalar& enclave_sk, const EncryptedShare& s, std::uint32_t n,
                        std::uint32_t n3) {
  return decode_share_payload(prim::pke_decrypt(enclave_sk, s.ct), n, n3);
}

std::vector<std::optional<SharePayload>> open_shares(const Scalar& enclave_sk,
                                                     const std::vector<EncryptedShare>& shares,
                                                     std::uint32_t n, std::uint32_t n3, Exec exec) {
  std::vector<std::optional<SharePayload>> out(shares.size());
  for_each_index(shares.size(), exec, [&](std::size_t i) {
    try {
      out[i] = open_share(enclave_sk, shares[i], n, n3);
    } catch (const Error&) {
    }
  });
  return out;
}

EncryptedShare sign(const PublicKey& pk, const ats::SignerKey& sk, ByteView m,
                    const ats::Quorum& quorum, const std::vector<Pid>& members, const Gid& gid,
                    const G1& combiner_enc_pub, Rng& rng) {
  if (members.size() > pk.n3) throw Error(Errc::TooManyPids, "notary set larger than n3");
  for (const auto& pid : members)
    if (pk.find_notary(pid) == nullptr) throw Error(Errc::UnknownNotary, "pid not in directory");
  SharePayload p;
  p.m.assign(m.begin(), m.end());
  p.share = ats::sign(sk, m, quorum);
  p.members = members;
  p.gid = gid;
  return {prim::pke_encrypt(combiner_enc_pub, encode_share_payload(p, pk.n, pk.n3), rng)};
}

std::vector<EncryptedShare> sign_batch(const PublicKey& pk, const ats::SignerKey& sk,
                                       const std::vector<SignRequest>& requests,
                                       const G1& combiner_enc_pub, const Rng& rng, Exec exec) {
  std::vector<EncryptedShare> out(requests.size());
  std::vector<std::exception_ptr> errors(requests.size());
  for_each_index(requests.size(), exec, [&](std::size_t i) {
    try {
      auto local = rng.fork("sign-" + std::to_string(i));
      const auto& rq = requests[i];
      out[i] = sign(pk, sk, rq.m, rq.quorum, rq.members, rq.gid, combiner_enc_pub, local);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

void SignatureBody::write(Writer& w) const {
  w.u32(combiner).put(sigma_bar).put(c1).put(c2).seq(entries).put(pi);
}

SignatureBody SignatureBody::read(Reader& r) {
  SignatureBody b;
  b.combiner = r.u32();
  b.sigma_bar = r.get<dtpke::Ciphertext>();
  b.c1 = r.get<G2>();
  b.c2 = r.get<G2>();
  b.entries = r.seq<GT>(kMaxParties);
  b.pi = r.get<nizk::CombineProof>();
  return b;
}

std::size_t padded_ats_size(std::uint32_t n) { return 4 + ats::Signature::encoded_size(n); }

Bytes pad_ats_signature(const ats::Signature& s, std::uint32_t n) {
  const auto enc = encode(s);
  Writer w;
  w.var(enc);
  Bytes out = std::move(w).bytes();
  if (out.size() > padded_ats_size(n)) throw Error(Errc::OutOfRange, "signature larger than t = n");
  out.resize(padded_ats_size(n), 0);
  return out;
}

ats::Signature unpad_ats_signature(ByteView b) {
  Reader r(b);
  const auto enc = r.var();
  return decode_all<ats::Signature>(enc);
}

Bytes eta_message(ByteView m, const SignatureBody& body) {
  Writer w;
  w.str("DETAPS-ETA").var(m).put(body);
  return std::move(w).bytes();
}

nizk::CombineStatement make_statement(const PublicKey& pk, ByteView m, const SignatureBody& body) {
  if (body.combiner >= pk.combiner_att.size()) throw Error(Errc::OutOfRange, "combiner index");
  nizk::CombineStatement st;
  st.t_bound = pk.n3;
  st.com_pk = pk.com_pk;
  st.ek_digest = sha256(encode(pk.ek));
  st.mpk = pk.mpk.v;
  st.gid_bases.assign(pk.kase.pk.begin() + 1, pk.kase.pk.end());
  st.m.assign(m.begin(), m.end());
  st.sigma_bar_digest = sha256(encode(body.sigma_bar));
  st.enc_points = dtpke::randomness_points(body.sigma_bar);
  st.c1 = body.c1;
  st.c2 = body.c2;
  st.entries_digest = nizk::entries_digest(body.entries);
  st.attestation_pub = pk.combiner_att[body.combiner];
  return st;
}

Digest signature_digest(ByteView m, const Signature& sigma) {
  Writer w;
  w.var(m).put(sigma);
  return tagged_digest("DETAPS-SIGMA", w.bytes());
}

bool verify_eta(const PublicKey& pk, ByteView m, const Signature& sigma) {
  if (sigma.body.combiner >= pk.combiner_sig.size()) return false;
  return prim::sig_verify(pk.combiner_sig[sigma.body.combiner], eta_message(m, sigma.body),
                          sigma.eta);
}

bool verify(const PublicKey& pk, ByteView m, const Signature& sigma) {
  try {
    const auto& b = sigma.body;
    if (b.entries.size() != pk.n3 || b.sigma_bar.slots.size() != pk.ek.n3 ||
        b.sigma_bar.commitments.size() != pk.ek.t_max)
      return false;
    if (!verify_eta(pk, m, sigma)) return false;
    if (!prim::sig_verify(b.sigma_bar.one_time_pub, b.sigma_bar.signed_part(), b.sigma_bar.binding))
      return false;
    return nizk::verify_combine(make_statement(pk, m, b), b.pi);
  } catch (const Error&) {
    return false;
  }
}

kase::Trapdoor notary_trapdoor(const NotaryState& notary) {
  return kase::trapdoor(notary.k_a, notary.keys.pid);
}

NotaryResponse NotaryResponse::read(Reader& r) {
  NotaryResponse nr;
  read_digest(r, nr.sigma_digest);
  nr.ct = r.get<prim::HybridCiphertext>();
  return nr;
}

NotaryResponse notary_respond(const PublicKey& pk, const NotaryState& notary, ByteView m,
                              const Signature& sigma, const G1& tracer_enc_pub, Rng& rng) {
  if (!verify_eta(pk, m, sigma)) throw Error(Errc::SigInvalid, "eta does not verify");
  const auto share =
      dtpke::share_decrypt(pk.dk, notary.keys.pid, notary.keys.usk, sigma.body.sigma_bar);
  if (share.slot == dtpke::kNoSlot) throw Error(Errc::NoMatch, "notary not named in sigma");
  const ResponsePlain plain{notary.keys.public_part(), share};
  return {signature_digest(m, sigma), prim::pke_encrypt(tracer_enc_pub, encode(plain), rng)};
}

}  // namespace detaps::scheme
