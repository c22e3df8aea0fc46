#include "detaps/dtpke.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "detaps/errors.hpp"
#include "detaps/hash.hpp"
#include "detaps/rng.hpp"

namespace detaps::dtpke {

namespace {

constexpr std::string_view kSecretBaseDst = "DETAPS-V1-DTPKE-G";
constexpr std::uint32_t kMaxCount = 1u << 16;

std::size_t meta_plaintext_size(std::uint32_t n3, std::uint32_t t_max) {
  return 8 + Pid::kBytes * n3 + 2 * Scalar::kBytes * (t_max - 1);
}

Bytes cert_message(const Pid& pid, const G1& upk) {
  Writer w;
  w.str("DTPKE-CERT").put(pid).put(upk);
  return std::move(w).bytes();
}

std::array<std::uint8_t, 16> slot_tag(const G1& share, std::uint32_t slot, const G1& opk) {
  Writer w;
  w.put(share).u32(slot).put(opk);
  const auto d = hmac_sha256(as_bytes("DTPKE-TAG"), w.bytes());
  std::array<std::uint8_t, 16> out{};
  std::copy(d.begin(), d.begin() + 16, out.begin());
  return out;
}

Scalar eval_poly(const std::vector<Scalar>& coeffs, const Scalar& x) {
  Scalar acc = Scalar::zero();
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
  return acc;
}

// X = prod C_k^{x^k}, the committed value g^{f(x)}.
G1 eval_commitments(const std::vector<G1>& commitments, const Scalar& x) {
  G1 acc = G1::identity();
  for (auto it = commitments.rbegin(); it != commitments.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Scalar slot_challenge(const G1& opk, std::uint32_t slot, const Pid& pid, const G1& upk,
                      const G1& x_point, const G1& y, const G1& a1, const G1& a2) {
  Writer w;
  w.put(opk).u32(slot).put(pid).put(upk).put(x_point).put(y).put(a1).put(a2);
  return group::hash_to_scalar("DTPKE-SLOT", w.bytes());
}

bool slot_proof_valid(const Ciphertext& c, std::uint32_t slot, const Pid& pid, const G1& upk,
                      const G1& x_point) {
  const auto& s = c.slots[slot];
  const G1 a1 = G1::generator() * s.proof_z - x_point * s.proof_c;
  const G1 a2 = upk * s.proof_z - s.enc_share * s.proof_c;
  return slot_challenge(c.one_time_pub, slot, pid, upk, x_point, s.enc_share, a1, a2) ==
         s.proof_c;
}

Scalar dec_challenge(const G1& opk, std::uint32_t slot, const Pid& pid, const G1& upk,
                     const G1& share, const G1& y, const G1& a1, const G1& a2) {
  Writer w;
  w.put(opk).u32(slot).put(pid).put(upk).put(share).put(y).put(a1).put(a2);
  return group::hash_to_scalar("DTPKE-DEC", w.bytes());
}

struct DemKeys {
  Bytes key;
  Bytes nonce;
};

DemKeys derive_dem(const G1& secret_point, const G1& opk) {
  Writer w;
  w.put(secret_point).put(opk);
  auto okm = hmac_expand(as_bytes("DTPKE-DEM"), w.bytes(), 32 + kAeadNonceBytes);
  return {Bytes(okm.begin(), okm.begin() + 32), Bytes(okm.begin() + 32, okm.end())};
}

Bytes body_aad(const Ciphertext& c) {
  Writer w;
  w.seq(c.commitments).seq(c.slots).put(c.meta).put(c.one_time_pub);
  const auto d = tagged_digest("DTPKE-AAD", w.bytes());
  return {d.begin(), d.end()};
}

Scalar lagrange_at_zero(const std::vector<Scalar>& xs, std::size_t i) {
  Scalar num = Scalar::one(), den = Scalar::one();
  for (std::size_t j = 0; j < xs.size(); ++j) {
    if (j == i) continue;
    num *= xs[j];
    den *= xs[j] - xs[i];
  }
  return num * den.inverse();
}

struct MetaContents {
  SealedMeta meta;
  std::vector<std::pair<Scalar, Scalar>> fillers;
};

std::optional<MetaContents> parse_meta(const CombineKey& ck, const Ciphertext& c) {
  const auto t_max = static_cast<std::uint32_t>(c.commitments.size());
  const auto n3 = static_cast<std::uint32_t>(c.slots.size());
  if (t_max == 0) return std::nullopt;
  try {
    const auto pt = prim::pke_decrypt(ck.secret, c.meta);
    if (pt.size() != meta_plaintext_size(n3, t_max)) return std::nullopt;
    Reader r(pt);
    MetaContents out;
    out.meta.threshold = r.u32();
    const auto count = r.u32();
    if (out.meta.threshold < 1 || out.meta.threshold > t_max || count > n3 ||
        count < out.meta.threshold)
      return std::nullopt;
    for (std::uint32_t i = 0; i < n3; ++i) {
      auto pid = r.get<Pid>();
      if (i < count) out.meta.members.push_back(pid);
    }
    for (std::uint32_t i = 0; i + 1 < t_max; ++i) {
      auto x = r.get<Scalar>();
      auto y = r.get<Scalar>();
      if (i < t_max - out.meta.threshold) out.fillers.emplace_back(x, y);
    }
    r.finish();
    return out;
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace

void Pid::write(Writer& w) const { w.raw(token).u64(epoch); }

Pid Pid::read(Reader& r) {
  Pid p;
  auto t = r.raw(p.token.size());
  std::copy(t.begin(), t.end(), p.token.begin());
  p.epoch = r.u64();
  return p;
}

const G1& secret_base() {
  static const G1 base = G1::hash(kSecretBaseDst, as_bytes("G"));
  return base;
}

Scalar eval_point(const Pid& pid) {
  auto x = group::hash_to_scalar("DTPKE-X", encode(pid));
  return x.is_zero() ? Scalar::one() : x;
}

void EncryptionKey::write(Writer& w) const {
  w.u32(n3).u32(t_max).put(combine_pub).put(cert_pub);
}

EncryptionKey EncryptionKey::read(Reader& r) {
  EncryptionKey ek;
  ek.n3 = r.u32();
  ek.t_max = r.u32();
  ek.combine_pub = r.get<G1>();
  ek.cert_pub = r.get<G1>();
  return ek;
}

void Slot::write(Writer& w) const { w.put(enc_share).raw(tag).put(proof_c).put(proof_z); }

Slot Slot::read(Reader& r) {
  Slot s;
  s.enc_share = r.get<G1>();
  auto t = r.raw(s.tag.size());
  std::copy(t.begin(), t.end(), s.tag.begin());
  s.proof_c = r.get<Scalar>();
  s.proof_z = r.get<Scalar>();
  return s;
}

Bytes Ciphertext::signed_part() const {
  Writer w;
  w.str("DTPKE-CT").seq(commitments).seq(slots).put(meta).put(one_time_pub).var(body);
  return std::move(w).bytes();
}

void Ciphertext::write(Writer& w) const {
  w.seq(commitments).seq(slots).put(meta).put(one_time_pub).var(body).put(binding);
}

Ciphertext Ciphertext::read(Reader& r) {
  Ciphertext c;
  c.commitments = r.seq<G1>(kMaxCount);
  c.slots = r.seq<Slot>(kMaxCount);
  c.meta = r.get<prim::HybridCiphertext>();
  c.one_time_pub = r.get<G1>();
  c.body = r.var();
  c.binding = r.get<SchnorrSig>();
  return c;
}

void DecryptionShare::write(Writer& w) const {
  w.put(pid).u32(slot).put(share_point).put(proof_c).put(proof_z);
}

DecryptionShare DecryptionShare::read(Reader& r) {
  DecryptionShare s;
  s.pid = r.get<Pid>();
  s.slot = r.u32();
  s.share_point = r.get<G1>();
  s.proof_c = r.get<Scalar>();
  s.proof_z = r.get<Scalar>();
  return s;
}

Authority setup(std::uint32_t n3, std::uint32_t t_max, Rng& rng) {
  if (n3 < 1 || t_max < 1 || t_max > n3 || n3 > kMaxCount)
    throw Error(Errc::BadBound, "dtpke setup needs 1 <= t'_max <= n3");
  Authority a;
  rng.fill(a.mk.join_seed);
  a.mk.cert_secret = Scalar::random_nonzero(rng);
  const auto combine_secret = Scalar::random_nonzero(rng);
  a.vk.cert_pub = G1::generator() * a.mk.cert_secret;
  a.ek = {n3, t_max, G1::generator() * combine_secret, a.vk.cert_pub};
  a.dk = {n3};
  a.ck = {combine_secret, a.vk};
  return a;
}

NotaryKeys join(MasterKey& mk, std::string_view id) {
  NotaryKeys k;
  k.pid.epoch = mk.next_epoch++;
  Writer tw;
  tw.str("DTPKE-PID").str(id).u64(k.pid.epoch);
  k.pid.token = hmac_sha256(mk.join_seed, tw.bytes());
  Writer kw;
  kw.raw(mk.join_seed).raw(k.pid.token);
  k.usk = group::hash_to_scalar("DTPKE-USK", kw.bytes());
  if (k.usk.is_zero()) k.usk = Scalar::one();
  k.upk = secret_base() * k.usk;
  k.uvk = {k.upk, prim::sig_sign(mk.cert_secret, cert_message(k.pid, k.upk))};
  return k;
}

bool certificate_valid(const VerificationKey& vk, const NotaryPublic& member) {
  return !member.uvk.upk.is_identity() &&
         prim::sig_verify(vk.cert_pub, cert_message(member.pid, member.uvk.upk), member.uvk.cert);
}

Ciphertext encrypt(const EncryptionKey& ek, const std::vector<NotaryPublic>& members,
                   std::uint32_t threshold, ByteView plaintext, Rng& rng,
                   EncryptionSecrets* secrets) {
  if (members.size() > ek.n3) throw Error(Errc::TooManyPids, "more members than slots");
  if (threshold < 1 || threshold > members.size() || threshold > ek.t_max)
    throw Error(Errc::ThresholdTooLarge, "threshold outside [1, min(|N|, t'_max)]");
  const VerificationKey vk{ek.cert_pub};
  std::set<Pid> seen;
  for (const auto& m : members) {
    if (!certificate_valid(vk, m)) throw Error(Errc::UnknownPid, "member not certified");
    if (!seen.insert(m.pid).second) throw Error(Errc::UnknownPid, "duplicate member");
  }

  Ciphertext c;
  const auto one_time = Scalar::random_nonzero(rng);
  c.one_time_pub = G1::generator() * one_time;

  std::vector<Scalar> coeffs(ek.t_max);
  for (auto& a : coeffs) a = Scalar::random(rng);
  for (const auto& a : coeffs) c.commitments.push_back(G1::generator() * a);

  std::vector<std::uint32_t> order(ek.n3);
  for (std::uint32_t i = 0; i < ek.n3; ++i) order[i] = i;
  for (std::uint32_t i = ek.n3; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

  c.slots.resize(ek.n3);
  std::vector<bool> used(ek.n3, false);
  for (std::size_t k = 0; k < members.size(); ++k) {
    const auto slot = order[k];
    used[slot] = true;
    const auto& m = members[k];
    const auto fx = eval_poly(coeffs, eval_point(m.pid));
    auto& s = c.slots[slot];
    s.enc_share = m.uvk.upk * fx;
    s.tag = slot_tag(secret_base() * fx, slot, c.one_time_pub);
    const auto w = Scalar::random(rng);
    s.proof_c = slot_challenge(c.one_time_pub, slot, m.pid, m.uvk.upk, G1::generator() * fx,
                               s.enc_share, G1::generator() * w, m.uvk.upk * w);
    s.proof_z = w + s.proof_c * fx;
  }
  for (std::uint32_t slot = 0; slot < ek.n3; ++slot) {
    if (used[slot]) continue;
    auto& s = c.slots[slot];
    s.enc_share = G1::generator() * Scalar::random_nonzero(rng);
    rng.fill(s.tag);
    s.proof_c = Scalar::random(rng);
    s.proof_z = Scalar::random(rng);
  }

  Writer mw;
  mw.u32(threshold).u32(static_cast<std::uint32_t>(members.size()));
  std::vector<Pid> sorted(seen.begin(), seen.end());
  for (std::uint32_t i = 0; i < ek.n3; ++i) (i < sorted.size() ? sorted[i] : Pid{}).write(mw);
  for (std::uint32_t i = 0; i + 1 < ek.t_max; ++i) {
    if (i < ek.t_max - threshold) {
      const auto x = Scalar::random_nonzero(rng);
      mw.put(x).put(eval_poly(coeffs, x));
    } else {
      mw.put(Scalar::zero()).put(Scalar::zero());
    }
  }
  const auto meta_eph = Scalar::random_nonzero(rng);
  c.meta = prim::pke_encrypt_with(ek.combine_pub, mw.bytes(), meta_eph);

  const auto dem = derive_dem(secret_base() * coeffs[0], c.one_time_pub);
  c.body = aead_seal(dem.key, dem.nonce, body_aad(c), plaintext);
  c.binding = prim::sig_sign(one_time, c.signed_part());
  if (secrets != nullptr) *secrets = {coeffs, meta_eph, one_time};
  return c;
}

std::vector<Scalar> EncryptionSecrets::flatten() const {
  auto out = coeffs;
  out.push_back(meta_ephemeral);
  out.push_back(one_time);
  return out;
}

std::vector<G1> randomness_points(const Ciphertext& c) {
  auto out = c.commitments;
  out.push_back(c.meta.ephemeral);
  out.push_back(c.one_time_pub);
  return out;
}

bool validate(const EncryptionKey& ek, const std::vector<NotaryPublic>& members,
              std::uint32_t threshold, const Ciphertext& c) {
  if (c.commitments.size() != ek.t_max || c.slots.size() != ek.n3) return false;
  if (c.meta.body.size() != meta_plaintext_size(ek.n3, ek.t_max)) return false;
  if (members.size() > ek.n3 || threshold < 1 || threshold > members.size() ||
      threshold > ek.t_max)
    return false;
  if (!prim::sig_verify(c.one_time_pub, c.signed_part(), c.binding)) return false;

  const VerificationKey vk{ek.cert_pub};
  std::vector<bool> taken(ek.n3, false);
  std::set<Pid> seen;
  for (const auto& m : members) {
    if (!seen.insert(m.pid).second || !certificate_valid(vk, m)) return false;
    const auto x_point = eval_commitments(c.commitments, eval_point(m.pid));
    bool found = false;
    for (std::uint32_t slot = 0; slot < ek.n3 && !found; ++slot) {
      if (taken[slot]) continue;
      if (slot_proof_valid(c, slot, m.pid, m.uvk.upk, x_point)) {
        taken[slot] = true;
        found = true;
      }
    }
    if (!found) return false;
  }
  return true;
}

DecryptionShare share_decrypt(const DecryptionParams& dk, const Pid& pid, const Scalar& usk,
                              const Ciphertext& c) {
  DecryptionShare out;
  out.pid = pid;
  if (usk.is_zero() || c.slots.size() != dk.n3) return out;
  const auto inv = usk.inverse();
  for (std::uint32_t slot = 0; slot < c.slots.size(); ++slot) {
    const G1 s = c.slots[slot].enc_share * inv;
    if (slot_tag(s, slot, c.one_time_pub) != c.slots[slot].tag) continue;
    const G1 upk = secret_base() * usk;
    Writer nw;
    nw.put(usk).put(c.one_time_pub).u32(slot);
    const auto w = group::hash_to_scalar("DTPKE-DEC-NONCE", nw.bytes());
    out.slot = slot;
    out.share_point = s;
    out.proof_c = dec_challenge(c.one_time_pub, slot, pid, upk, s, c.slots[slot].enc_share,
                                secret_base() * w, s * w);
    out.proof_z = w + out.proof_c * usk;
    return out;
  }
  return out;
}

bool share_verify(const VerificationKey& vk, const Pid& pid, const UserVerificationKey& uvk,
                  const Ciphertext& c, const DecryptionShare& share) {
  if (share.pid != pid || share.slot >= c.slots.size()) return false;
  if (!certificate_valid(vk, {pid, uvk})) return false;
  const auto& slot = c.slots[share.slot];
  if (slot_tag(share.share_point, share.slot, c.one_time_pub) != slot.tag) return false;
  const auto x_point = eval_commitments(c.commitments, eval_point(pid));
  if (!slot_proof_valid(c, share.slot, pid, uvk.upk, x_point)) return false;
  const G1 a1 = secret_base() * share.proof_z - uvk.upk * share.proof_c;
  const G1 a2 = share.share_point * share.proof_z - slot.enc_share * share.proof_c;
  return dec_challenge(c.one_time_pub, share.slot, pid, uvk.upk, share.share_point,
                       slot.enc_share, a1, a2) == share.proof_c;
}

std::optional<SealedMeta> open_meta(const CombineKey& ck, const Ciphertext& c) {
  auto parsed = parse_meta(ck, c);
  if (!parsed) return std::nullopt;
  return parsed->meta;
}

std::vector<std::uint8_t> verify_shares(const VerificationKey& vk,
                                        const std::vector<NotaryPublic>& members,
                                        const Ciphertext& c,
                                        const std::vector<DecryptionShare>& shares, Exec exec) {
  std::map<Pid, const NotaryPublic*> dir;
  for (const auto& m : members) dir[m.pid] = &m;
  std::vector<std::uint8_t> ok(shares.size(), 0);
  for_each_index(shares.size(), exec, [&](std::size_t i) {
    auto it = dir.find(shares[i].pid);
    if (it == dir.end()) return;
    ok[i] = share_verify(vk, shares[i].pid, it->second->uvk, c, shares[i]) ? 1 : 0;
  });
  return ok;
}

Bytes combine(const CombineKey& ck, const std::vector<NotaryPublic>& members,
              std::uint32_t threshold, const Ciphertext& c,
              const std::vector<DecryptionShare>& shares, Exec exec) {
  auto parsed = parse_meta(ck, c);
  if (!parsed) throw Error(Errc::ValidationFailed, "meta block does not open");
  std::set<Pid> listed;
  for (const auto& m : members) listed.insert(m.pid);
  const std::set<Pid> sealed(parsed->meta.members.begin(), parsed->meta.members.end());
  if (parsed->meta.threshold != threshold || listed != sealed)
    throw Error(Errc::ValidationFailed, "(N, t') disagree with the ciphertext");

  const auto ok = verify_shares(ck.vk, members, c, shares, exec);
  std::map<Pid, const DecryptionShare*> valid;
  for (std::size_t i = 0; i < shares.size(); ++i)
    if (ok[i]) valid.emplace(shares[i].pid, &shares[i]);
  if (valid.size() < threshold)
    throw Error(Errc::InsufficientShares, "fewer than t' valid member shares");

  std::vector<Scalar> xs;
  std::vector<G1> points;
  for (const auto& [pid, share] : valid) {
    if (xs.size() == threshold) break;
    xs.push_back(eval_point(pid));
    points.push_back(share->share_point);
  }
  for (const auto& [x, y] : parsed->fillers) {
    if (!(G1::generator() * y == eval_commitments(c.commitments, x)))
      throw Error(Errc::ValidationFailed, "filler point does not match commitments");
    xs.push_back(x);
    points.push_back(secret_base() * y);
  }

  G1 secret_point = G1::identity();
  for (std::size_t i = 0; i < xs.size(); ++i) secret_point += points[i] * lagrange_at_zero(xs, i);
  const auto dem = derive_dem(secret_point, c.one_time_pub);
  return aead_open(dem.key, dem.nonce, body_aad(c), c.body);
}

std::size_t ciphertext_size(std::uint32_t n3, std::uint32_t t_max, std::size_t plaintext_len) {
  return 4 + G1::kBytes * t_max + 4 + Slot::kBytes * n3 + prim::HybridCiphertext::kOverhead +
         meta_plaintext_size(n3, t_max) + G1::kBytes + 4 + plaintext_len + kAeadTagBytes +
         prim::SchnorrSig::kBytes;
}

}  // namespace detaps::dtpke
