#include "detaps/ats.hpp"

#include <algorithm>
#include <map>

#include "detaps/errors.hpp"
#include "detaps/rng.hpp"

namespace detaps::ats {

namespace {
constexpr std::uint32_t kMaxSigners = 1u << 16;
}

Quorum make_quorum(std::vector<std::uint32_t> indices) {
  std::sort(indices.begin(), indices.end());
  if (std::adjacent_find(indices.begin(), indices.end()) != indices.end())
    throw Error(Errc::WrongQuorumSize, "duplicate signer in quorum");
  if (!indices.empty() && indices.front() == 0)
    throw Error(Errc::OutOfRange, "signer indices are 1-based");
  return indices;
}

void write_quorum(Writer& w, const Quorum& q) {
  w.u32(static_cast<std::uint32_t>(q.size()));
  for (auto i : q) w.u32(i);
}

Quorum read_quorum(Reader& r, std::uint32_t max) {
  const auto n = r.count(max);
  Quorum q(n);
  for (auto& i : q) i = r.u32();
  if (!std::is_sorted(q.begin(), q.end()) ||
      std::adjacent_find(q.begin(), q.end()) != q.end() || (n != 0 && q.front() == 0))
    throw Error(Errc::DecodeError, "quorum not canonical");
  return q;
}

Bytes canonical_quorum(const Quorum& q) {
  Writer w;
  write_quorum(w, q);
  return std::move(w).bytes();
}

void PublicKey::write(Writer& w) const {
  w.u32(n).u32(t).seq(keys);
}

PublicKey PublicKey::read(Reader& r) {
  PublicKey pk;
  pk.n = r.u32();
  pk.t = r.u32();
  pk.keys = r.seq<G1>(kMaxSigners);
  if (pk.keys.size() != pk.n || pk.t < 1 || pk.t > pk.n)
    throw Error(Errc::DecodeError, "inconsistent ATS public key");
  return pk;
}

void Share::write(Writer& w) const {
  w.u32(signer);
  write_quorum(w, quorum);
  w.put(inner);
}

Share Share::read(Reader& r) {
  Share s;
  s.signer = r.u32();
  s.quorum = read_quorum(r, kMaxSigners);
  s.inner = r.get<SchnorrSig>();
  return s;
}

void Signature::write(Writer& w) const {
  write_quorum(w, quorum);
  for (const auto& s : sigs) w.put(s);
}

Signature Signature::read(Reader& r) {
  Signature sig;
  sig.quorum = read_quorum(r, kMaxSigners);
  sig.sigs.reserve(sig.quorum.size());
  for (std::size_t i = 0; i < sig.quorum.size(); ++i) sig.sigs.push_back(r.get<SchnorrSig>());
  return sig;
}

std::size_t Signature::encoded_size(std::uint32_t t) {
  return 4 + 4 * std::size_t{t} + SchnorrSig::kBytes * std::size_t{t};
}

KeyMaterial keygen(std::uint32_t n, std::uint32_t t, Rng& rng) {
  if (t < 1 || t > n) throw Error(Errc::BadThreshold, "need 1 <= t <= n");
  KeyMaterial km;
  km.pk.n = n;
  km.pk.t = t;
  for (std::uint32_t i = 1; i <= n; ++i) {
    auto kp = prim::keygen(prim::SchemeId::Sig, rng);
    km.pk.keys.push_back(kp.pub);
    km.signers.push_back({i, t, kp.secret});
  }
  return km;
}

Bytes signing_payload(ByteView m, const Quorum& quorum) {
  Writer w;
  w.raw(as_bytes("DETAPS-ATS")).var(m);
  write_quorum(w, quorum);
  return std::move(w).bytes();
}

Share sign(const SignerKey& sk, ByteView m, const Quorum& quorum) {
  if (quorum.size() != sk.t) throw Error(Errc::WrongQuorumSize, "quorum size differs from t");
  if (!std::binary_search(quorum.begin(), quorum.end(), sk.index))
    throw Error(Errc::NotInQuorum, "signer " + std::to_string(sk.index) + " not in quorum");
  return {sk.index, quorum, prim::sig_sign(sk.secret, signing_payload(m, quorum))};
}

std::vector<std::uint8_t> verify_shares(const PublicKey& pk, ByteView m,
                                        const std::vector<Share>& shares, Exec exec) {
  std::vector<std::uint8_t> ok(shares.size(), 0);
  for_each_index(shares.size(), exec, [&](std::size_t i) {
    const auto& s = shares[i];
    if (s.signer < 1 || s.signer > pk.n) return;
    if (!std::binary_search(s.quorum.begin(), s.quorum.end(), s.signer)) return;
    ok[i] = prim::sig_verify(pk.keys[s.signer - 1], signing_payload(m, s.quorum), s.inner) ? 1 : 0;
  });
  return ok;
}

Signature combine(const PublicKey& pk, ByteView m, const Quorum& quorum,
                  const std::vector<Share>& shares, Exec exec) {
  if (quorum.size() != pk.t) throw Error(Errc::WrongQuorumSize, "quorum size differs from t");
  std::map<std::uint32_t, const Share*> by_signer;
  for (const auto& s : shares) {
    if (s.quorum != quorum) throw Error(Errc::QuorumMismatch, "share bound to a different quorum");
    by_signer.emplace(s.signer, &s);
  }
  std::vector<Share> picked;
  for (auto i : quorum) {
    auto it = by_signer.find(i);
    if (it != by_signer.end()) picked.push_back(*it->second);
  }
  if (picked.size() < pk.t)
    throw Error(Errc::InsufficientShares,
                std::to_string(picked.size()) + " of " + std::to_string(pk.t) + " shares");
  auto ok = verify_shares(pk, m, picked, exec);
  for (std::size_t i = 0; i < picked.size(); ++i)
    if (!ok[i])
      throw ShareInvalidError(picked[i].signer,
                              "share from signer " + std::to_string(picked[i].signer));
  Signature sig;
  sig.quorum = quorum;
  for (const auto& s : picked) sig.sigs.push_back(s.inner);
  return sig;
}

bool verify(const PublicKey& pk, ByteView m, const Signature& sig) {
  if (sig.quorum.size() != pk.t || sig.sigs.size() != sig.quorum.size()) return false;
  const auto payload = signing_payload(m, sig.quorum);
  for (std::size_t i = 0; i < sig.quorum.size(); ++i) {
    const auto idx = sig.quorum[i];
    if (idx < 1 || idx > pk.n) return false;
    if (!prim::sig_verify(pk.keys[idx - 1], payload, sig.sigs[i])) return false;
  }
  return true;
}

std::optional<Quorum> trace(const PublicKey& pk, ByteView m, const Signature& sig) {
  if (!verify(pk, m, sig)) return std::nullopt;
  return sig.quorum;
}

}  // namespace detaps::ats
