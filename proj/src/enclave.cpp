#include "detaps/enclave.hpp"

#include <map>
#include <optional>
#include <string>

#include "detaps/errors.hpp"
#include "detaps/rng.hpp"

namespace detaps::scheme {

namespace {

constexpr std::uint32_t kMaxBatch = 1u << 20;
constexpr std::uint8_t kOk = 0;
constexpr std::uint8_t kFail = 1;

struct BucketKey {
  Bytes m;
  Gid gid;
  auto operator<=>(const BucketKey&) const = default;
};

struct Bucket {
  std::uint64_t first_epoch = 0;
  ats::Quorum quorum;
  std::vector<Pid> members;
  std::map<std::uint32_t, ats::Share> shares;
  bool conflicted = false;
};

struct Produced {
  Bytes m;
  SignatureBody body;

  void write(Writer& w) const { w.var(m).put(body); }
  static Produced read(Reader& r) {
    auto m = r.var();
    return {std::move(m), r.get<SignatureBody>()};
  }
};

}  // namespace

struct EnclaveHandle::State {
  EnclaveRole role = EnclaveRole::Combiner;
  std::uint32_t index = 0;
  std::shared_ptr<const PublicKey> pk;
  ats::PublicKey ats_pk;
  Scalar enc_sk;
  G1 enc_pub;
  Scalar att_sk;
  G1 att_pub;
  Rng rng = Rng::from_seed(0);
  BoundaryRecorder recorder;

  // Combiner only.
  Scalar r_pk;
  std::uint32_t retention = 8;
  std::map<BucketKey, Bucket> buckets;
  std::vector<std::string> log;

  // Tracer only.
  dtpke::CombineKey ck;

  Bytes combine_entry(Reader& r);
  Bytes trace_entry(Reader& r);
  void intake(std::uint64_t epoch, const SharePayload& p);
  std::optional<SignatureBody> complete(const BucketKey& key, const Bucket& b,
                                        const GidRegistry& registry);
};

void EnclaveHandle::State::intake(std::uint64_t epoch, const SharePayload& p) {
  BucketKey key{p.m, p.gid};
  auto [it, fresh] = buckets.try_emplace(key);
  auto& b = it->second;
  if (fresh) {
    b.first_epoch = epoch;
    b.quorum = p.share.quorum;
    b.members = p.members;
  } else if (b.quorum != p.share.quorum || b.members != p.members) {
    b.conflicted = true;
    log.push_back(std::string(errc_name(Errc::QuorumMismatch)));
    return;
  }
  b.shares.emplace(p.share.signer, p.share);
}

std::optional<SignatureBody> EnclaveHandle::State::complete(const BucketKey& key, const Bucket& b,
                                                            const GidRegistry& registry) {
  std::uint32_t slot = 0;
  for (const auto& e : registry)
    if (e.gid == key.gid) slot = e.slot;
  if (slot == 0) return std::nullopt;

  std::vector<ats::Share> shares;
  for (const auto& [_, s] : b.shares) shares.push_back(s);
  const auto sig_m = ats::combine(ats_pk, key.m, b.quorum, shares, Exec::Serial);

  std::vector<dtpke::NotaryPublic> directory;
  for (const auto& pid : b.members) {
    const auto* entry = pk->find_notary(pid);
    if (entry == nullptr) throw Error(Errc::UnknownNotary, "member");
    directory.push_back(*entry);
  }

  nizk::CombineWitness wit;
  wit.pk = ats_pk;
  wit.r_pk = r_pk;
  wit.sig_m = sig_m;
  wit.members = b.members;
  wit.gid_slot = slot;

  SignatureBody body;
  body.combiner = index;
  dtpke::EncryptionSecrets secrets;
  const auto threshold = static_cast<std::uint32_t>(b.members.size());
  body.sigma_bar = dtpke::encrypt(pk->ek, directory, threshold, pad_ats_signature(sig_m, pk->n),
                                  rng, &secrets);
  wit.enc_secrets = secrets.flatten();
  auto ix = kase::encrypt(pk->kase, pk->mpk, slot, b.members, pk->n3, rng, &wit.index_randomness);
  body.c1 = ix.c1;
  body.c2 = ix.c2;
  body.entries = std::move(ix.entries);
  body.pi = nizk::prove_combine(make_statement(*pk, key.m, body), wit, att_sk, rng);
  return body;
}

Bytes EnclaveHandle::State::combine_entry(Reader& r) {
  const auto epoch = r.u64();
  const auto exec = r.u8() == 0 ? Exec::Serial : Exec::Parallel;
  const auto registry = r.seq<GidSlot>(kMaxBatch);
  const auto batch = r.seq<EncryptedShare>(kMaxBatch);
  r.finish();

  for (auto it = buckets.begin(); it != buckets.end();) {
    if (epoch >= it->second.first_epoch + retention)
      it = buckets.erase(it);
    else
      ++it;
  }

  auto opened = open_shares(enc_sk, batch, pk->n, pk->n3, exec);
  for_each_index(batch.size(), exec, [&](std::size_t i) {
    auto& p = opened[i];
    if (p && !ats::verify_shares(ats_pk, p->m, {p->share}, Exec::Serial)[0]) p.reset();
  });
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (!opened[i]) {
      log.push_back(std::string(errc_name(Errc::ShareInvalid)) + " at batch position " +
                    std::to_string(i));
      continue;
    }
    intake(epoch, *opened[i]);
  }

  std::vector<Produced> out;
  for (auto it = buckets.begin(); it != buckets.end();) {
    const auto& b = it->second;
    if (b.conflicted || b.shares.size() < ats_pk.t) {
      ++it;
      continue;
    }
    try {
      auto body = complete(it->first, b, registry);
      if (!body) {
        ++it;
        continue;
      }
      out.push_back({it->first.m, std::move(*body)});
    } catch (const ShareInvalidError& e) {
      log.push_back(std::string(e.what()) + " culprit " + std::to_string(e.culprit()));
    } catch (const Error& e) {
      log.push_back(e.what());
    }
    it = buckets.erase(it);
  }

  Writer w;
  w.seq(out);
  return std::move(w).bytes();
}

Bytes EnclaveHandle::State::trace_entry(Reader& r) {
  const auto m = r.var();
  const auto sigma = r.get<Signature>();
  const auto responses = r.seq<NotaryResponse>(kMaxBatch);
  const auto target = r.get<G1>();
  r.finish();

  if (!verify(*pk, m, sigma)) throw Error(Errc::SigInvalid, "signature");
  const auto& c = sigma.body.sigma_bar;
  const auto meta = dtpke::open_meta(ck, c);
  if (!meta) throw Error(Errc::ValidationFailed, "meta");
  std::vector<dtpke::NotaryPublic> directory;
  for (const auto& pid : meta->members) {
    const auto* entry = pk->find_notary(pid);
    if (entry == nullptr) throw Error(Errc::ValidationFailed, "member");
    directory.push_back(*entry);
  }
  if (!dtpke::validate(pk->ek, directory, meta->threshold, c))
    throw Error(Errc::ValidationFailed, "ciphertext");

  const auto digest = signature_digest(m, sigma);
  std::vector<dtpke::DecryptionShare> shares;
  for (const auto& resp : responses) {
    if (resp.sigma_digest != digest) continue;
    try {
      shares.push_back(decode_all<ResponsePlain>(prim::pke_decrypt(enc_sk, resp.ct)).share);
    } catch (const Error&) {
    }
  }
  const auto plain = dtpke::combine(ck, directory, meta->threshold, c, shares, Exec::Serial);
  const auto quorum = ats::trace(ats_pk, m, unpad_ats_signature(plain));
  if (!quorum) throw Error(Errc::ValidationFailed, "recovered signature");
  // Padded to n entries so the sealed result does not reveal t to the host.
  auto plain_q = ats::canonical_quorum(*quorum);
  plain_q.resize(4 + 4 * std::size_t{pk->n}, 0);
  return encode(prim::pke_encrypt(target, plain_q, rng));
}

EnclaveHandle::EnclaveHandle(std::unique_ptr<State> state) : state_(std::move(state)) {}
EnclaveHandle::EnclaveHandle(EnclaveHandle&&) noexcept = default;
EnclaveHandle& EnclaveHandle::operator=(EnclaveHandle&&) noexcept = default;
EnclaveHandle::~EnclaveHandle() = default;

EnclaveRole EnclaveHandle::role() const { return state_->role; }
std::uint32_t EnclaveHandle::index() const { return state_->index; }
const G1& EnclaveHandle::enc_pub() const { return state_->enc_pub; }
const G1& EnclaveHandle::attestation_pub() const { return state_->att_pub; }
void EnclaveHandle::set_recorder(BoundaryRecorder recorder) {
  state_->recorder = std::move(recorder);
}

Bytes EnclaveHandle::invoke(std::string_view entry, ByteView request) {
  Writer w;
  try {
    Reader r(request);
    Bytes payload;
    if (entry == "combine" && state_->role == EnclaveRole::Combiner)
      payload = state_->combine_entry(r);
    else if (entry == "trace" && state_->role == EnclaveRole::Tracer)
      payload = state_->trace_entry(r);
    else
      throw Error(Errc::Unauthorized, "entry point");
    w.u8(kOk).raw(payload);
  } catch (const Error& e) {
    w = Writer();
    w.u8(kFail).u32(static_cast<std::uint32_t>(e.code()));
  }
  auto out = std::move(w).bytes();
  if (state_->recorder) state_->recorder(entry, out);
  return out;
}

namespace {

// Splits a response into its payload or rethrows the enclave's error code.
Bytes unwrap(const Bytes& response) {
  Reader r(response);
  const auto status = r.u8();
  if (status == kOk) return Bytes(response.begin() + 1, response.end());
  if (status != kFail) throw Error(Errc::DecodeError, "enclave status");
  const auto code = r.u32();
  r.finish();
  if (code > static_cast<std::uint32_t>(Errc::ConfigError))
    throw Error(Errc::DecodeError, "enclave error code");
  throw Error(static_cast<Errc>(code), "enclave call failed");
}

}  // namespace

SystemKeys setup(const SystemParams& params, std::uint64_t seed) {
  if (params.t < 1 || params.t > params.n) throw Error(Errc::BadThreshold, "need 1 <= t <= n");
  if (params.n1 == 0 || params.n2 == 0 || params.n3 == 0)
    throw Error(Errc::BadBound, "n1, n2 and n3 must be positive");
  auto rng = Rng::from_seed(seed);

  SystemKeys sys;
  sys.params = params;
  auto& pk = sys.pk;
  pk.n = params.n;
  pk.n1 = params.n1;
  pk.n2 = params.n2;
  pk.n3 = params.n3;
  pk.groups = params.groups;

  auto km = ats::keygen(params.n, params.t, rng);
  sys.signers = std::move(km.signers);
  const auto r_pk = Scalar::random(rng);
  pk.com_pk = prim::com_commit(nizk::ats_key_bytes(km.pk), r_pk);

  auto authority = dtpke::setup(params.n3, params.n3, rng);
  pk.ek = authority.ek;
  pk.dk = authority.dk;
  pk.vk = authority.vk;
  std::vector<dtpke::NotaryKeys> notary_keys;
  for (std::uint32_t i = 0; i < params.n3; ++i) {
    notary_keys.push_back(dtpke::join(authority.mk, "notary-" + std::to_string(i + 1)));
    pk.notaries.push_back(notary_keys.back().public_part());
  }

  pk.kase = kase::setup(params.kase_capacity, rng);
  const auto kase_keys = kase::keygen(rng);
  pk.mpk = kase_keys.mpk;
  kase::Scope all;
  for (std::uint32_t g = 1; g <= params.kase_capacity; ++g) all.push_back(g);
  const auto k_a = kase::extract(pk.kase, kase_keys.msk, all);
  for (auto& k : notary_keys) sys.notaries.push_back({std::move(k), k_a});

  auto make_state = [&](EnclaveRole role, std::uint32_t j) {
    auto st = std::make_unique<EnclaveHandle::State>();
    st->role = role;
    st->index = j;
    st->ats_pk = km.pk;
    st->retention = params.retention_epochs;
    const auto enc = prim::keygen(prim::SchemeId::Pke, rng);
    const auto att = prim::keygen(prim::SchemeId::Sig, rng);
    st->enc_sk = enc.secret;
    st->enc_pub = enc.pub;
    st->att_sk = att.secret;
    st->att_pub = att.pub;
    st->rng = rng.fork((role == EnclaveRole::Combiner ? "combiner-" : "tracer-") +
                       std::to_string(j));
    return st;
  };

  std::vector<std::unique_ptr<EnclaveHandle::State>> combiner_states, tracer_states;
  for (std::uint32_t j = 0; j < params.n1; ++j) {
    const auto sig = prim::keygen(prim::SchemeId::Sig, rng);
    sys.combiner_sig_secrets.push_back(sig.secret);
    pk.combiner_sig.push_back(sig.pub);
    auto st = make_state(EnclaveRole::Combiner, j);
    st->r_pk = r_pk;
    pk.combiner_enc.push_back(st->enc_pub);
    pk.combiner_att.push_back(st->att_pub);
    combiner_states.push_back(std::move(st));
  }
  for (std::uint32_t j = 0; j < params.n2; ++j) {
    auto st = make_state(EnclaveRole::Tracer, j);
    st->ck = authority.ck;
    pk.tracer_enc.push_back(st->enc_pub);
    pk.tracer_att.push_back(st->att_pub);
    tracer_states.push_back(std::move(st));
  }

  auto shared = std::make_shared<const PublicKey>(pk);
  for (auto& st : combiner_states) {
    st->pk = shared;
    sys.combiners.push_back(EnclaveHandle(std::move(st)));
  }
  for (auto& st : tracer_states) {
    st->pk = shared;
    sys.tracers.push_back(EnclaveHandle(std::move(st)));
  }
  return sys;
}

std::vector<CombineOutput> combine(EnclaveHandle& enclave, const Scalar& combiner_sig_secret,
                                   std::uint64_t epoch, const GidRegistry& registry,
                                   const std::vector<EncryptedShare>& batch, Exec exec) {
  Writer w;
  w.u64(epoch).u8(exec == Exec::Serial ? 0 : 1).seq(registry).seq(batch);
  const auto payload = unwrap(enclave.invoke("combine", w.bytes()));
  Reader r(payload);
  auto produced = r.seq<Produced>(kMaxBatch);
  r.finish();
  std::vector<CombineOutput> out;
  for (auto& p : produced) {
    auto eta = prim::sig_sign(combiner_sig_secret, eta_message(p.m, p.body));
    out.push_back({p.m, {std::move(p.body), eta}});
  }
  return out;
}

prim::HybridCiphertext trace(EnclaveHandle& tracer, ByteView m, const Signature& sigma,
                             const std::vector<NotaryResponse>& responses, const G1& target_pub) {
  Writer w;
  w.var(m).put(sigma).seq(responses).put(target_pub);
  return decode_all<prim::HybridCiphertext>(unwrap(tracer.invoke("trace", w.bytes())));
}

ats::Quorum open_trace_result(const Scalar& target_sk, const prim::HybridCiphertext& sealed) {
  const auto plain = prim::pke_decrypt(target_sk, sealed);
  Reader r(plain);
  auto q = ats::read_quorum(r, kMaxBatch);
  for (auto b : r.raw(r.remaining()))
    if (b != 0) throw Error(Errc::DecodeError, "quorum padding");
  return q;
}

}  // namespace detaps::scheme
