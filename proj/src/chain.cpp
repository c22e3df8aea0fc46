#include "detaps/chain.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "detaps/errors.hpp"
#include "detaps/rng.hpp"

namespace detaps::chain {

namespace {

constexpr std::uint32_t kMaxItems = 1u << 20;
constexpr std::uint8_t kTickRecord = 1;
constexpr std::uint8_t kTxRecord = 2;

std::uint8_t required_role(TxKind kind) {
  switch (kind) {
    case TxKind::Sign:
      return kSigner;
    case TxKind::Comb:
      return kCombiner;
    case TxKind::TraceCall:
      return kAuditor;
    case TxKind::RegisterGid:
      return kAdmin;
    case TxKind::Trapdoor:
    case TxKind::Response:
      return 0;  // pseudonymous
  }
  return 0xff;
}

TxKind read_kind(Reader& r) {
  const auto k = r.u8();
  if (k < 1 || k > 6) throw Error(Errc::DecodeError, "transaction kind");
  return static_cast<TxKind>(k);
}

void check_payload(TxKind kind, ByteView payload) {
  switch (kind) {
    case TxKind::Sign:
      decode_all<SignPayload>(payload);
      break;
    case TxKind::Comb:
      decode_all<CombPayload>(payload);
      break;
    case TxKind::Trapdoor:
      decode_all<kase::Trapdoor>(payload);
      break;
    case TxKind::Response:
      decode_all<NotaryResponse>(payload);
      break;
    case TxKind::TraceCall:
      decode_all<TraceCallPayload>(payload);
      break;
    case TxKind::RegisterGid:
      decode_all<Gid>(payload);
      break;
  }
}

}  // namespace

void Genesis::write(Writer& w) const {
  w.var(election_seed).u32(combiners).u32(tracers).put(kase).seq(members);
}

Genesis Genesis::read(Reader& r) {
  Genesis g;
  g.election_seed = r.var();
  g.combiners = r.u32();
  g.tracers = r.u32();
  g.kase = r.get<kase::Params>();
  g.members = r.seq<Member>(kMaxItems);
  return g;
}

void Transaction::write(Writer& w) const {
  w.u8(static_cast<std::uint8_t>(kind)).var(payload).put(submitter).put(sig);
}

Transaction Transaction::read(Reader& r) {
  Transaction tx;
  tx.kind = read_kind(r);
  tx.payload = r.var();
  tx.submitter = r.get<G1>();
  tx.sig = r.get<prim::SchnorrSig>();
  return tx;
}

TraceCallPayload TraceCallPayload::read(Reader& r) {
  TraceCallPayload p;
  auto b = r.raw(p.sigma_digest.size());
  std::copy(b.begin(), b.end(), p.sigma_digest.begin());
  p.target = r.get<G1>();
  return p;
}

Bytes tx_signing_bytes(TxKind kind, ByteView payload, std::uint64_t epoch) {
  Writer w;
  w.str("DETAPS-TX").u8(static_cast<std::uint8_t>(kind)).var(payload).u64(epoch);
  return std::move(w).bytes();
}

Transaction make_tx(TxKind kind, Bytes payload, const Scalar& sk, std::uint64_t epoch) {
  Transaction tx;
  tx.kind = kind;
  tx.sig = prim::sig_sign(sk, tx_signing_bytes(kind, payload, epoch));
  tx.payload = std::move(payload);
  tx.submitter = G1::generator() * sk;
  return tx;
}

ChainState::ChainState(Genesis genesis) : genesis_(std::move(genesis)) {}

void ChainState::check(const Transaction& tx, std::uint64_t epoch) const {
  if (!prim::sig_verify(tx.submitter, tx_signing_bytes(tx.kind, tx.payload, epoch), tx.sig))
    throw Error(Errc::BadSignature, "transaction signature");
  const auto role = required_role(tx.kind);
  if (role != 0) {
    const auto it = std::find_if(genesis_.members.begin(), genesis_.members.end(),
                                 [&](const Member& m) { return m.key == tx.submitter; });
    if (it == genesis_.members.end() || (it->roles & role) == 0)
      throw Error(Errc::Unauthorized, "submitter not authorized for this kind");
  }
  check_payload(tx.kind, tx.payload);
}

Receipt ChainState::submit_tx(const Transaction& tx) {
  check(tx, epoch_);
  const auto position = log_.size();
  log_.push_back({false, epoch_, tx});
  apply(tx, position);
  return {epoch_, position};
}

void ChainState::tick() {
  log_.push_back({true, epoch_, {}});
  ++epoch_;
}

void ChainState::apply(const Transaction& tx, std::uint64_t position) {
  switch (tx.kind) {
    case TxKind::Sign: {
      auto p = decode_all<SignPayload>(tx.payload);
      ssl_.push_back({epoch_, p.combiner, std::move(p.share)});
      break;
    }
    case TxKind::Comb: {
      auto p = decode_all<CombPayload>(tx.payload);
      const auto& b = p.sigma.body;
      index_rows_.push_back({scheme::signature_digest(p.m, p.sigma), position});
      indexes_.push_back({b.c1, b.c2, b.entries});
      signatures_.push_back(std::move(p));
      break;
    }
    case TxKind::Trapdoor:
      trapdoors_.push_back(decode_all<kase::Trapdoor>(tx.payload));
      break;
    case TxKind::Response:
      dsl_.push_back({epoch_, decode_all<NotaryResponse>(tx.payload)});
      break;
    case TxKind::TraceCall:
      trace_calls_.push_back(decode_all<TraceCallPayload>(tx.payload));
      break;
    case TxKind::RegisterGid: {
      const auto gid = decode_all<Gid>(tx.payload);
      const bool known = std::any_of(registry_.begin(), registry_.end(),
                                     [&](const scheme::GidSlot& e) { return e.gid == gid; });
      if (known) break;
      const auto cap = genesis_.kase.capacity;
      registry_.push_back({gid, 1 + static_cast<std::uint32_t>(registry_.size() % cap)});
      break;
    }
  }
}

std::vector<EncryptedShare> ChainState::ssl_pull(std::uint64_t epoch, std::uint32_t combiner,
                                                 std::uint64_t since) const {
  std::vector<EncryptedShare> out;
  for (const auto& e : ssl_)
    if (e.combiner == combiner && e.epoch >= since && e.epoch <= epoch) out.push_back(e.share);
  return out;
}

std::vector<NotaryResponse> ChainState::dsl_pull(const Digest& sigma_digest) const {
  std::vector<NotaryResponse> out;
  for (const auto& e : dsl_)
    if (e.response.sigma_digest == sigma_digest) out.push_back(e.response);
  return out;
}

std::optional<CombPayload> ChainState::find_signature(const Digest& sigma_digest) const {
  for (std::size_t i = 0; i < index_rows_.size(); ++i)
    if (index_rows_[i].sigma_digest == sigma_digest) return signatures_[i];
  return std::nullopt;
}

std::vector<SearchHit> ChainState::search_contract(const kase::Trapdoor& td, Exec exec) const {
  std::set<std::uint32_t> slots;
  for (const auto& e : registry_)
    if (std::binary_search(td.scope.begin(), td.scope.end(), e.slot)) slots.insert(e.slot);
  std::vector<SearchHit> hits;
  for (auto slot : slots) {
    const auto adjusted = kase::adjust(genesis_.kase, slot, td);
    const auto found = kase::search(adjusted, indexes_, exec);
    for (std::size_t i = 0; i < found.size(); ++i)
      if (found[i] >= 0)
        hits.push_back({index_rows_[i].sigma_digest, index_rows_[i].position, slot,
                        static_cast<std::uint32_t>(found[i])});
  }
  std::sort(hits.begin(), hits.end(),
            [](const SearchHit& a, const SearchHit& b) { return a.position < b.position; });
  return hits;
}

std::uint32_t ChainState::elect_worker(WorkerRole role, std::uint64_t epoch) const {
  const auto pool = role == WorkerRole::Combiner ? genesis_.combiners : genesis_.tracers;
  if (pool == 0) throw Error(Errc::EmptyPool, "no workers for this role");
  // Round-robin within a round, with a fresh shuffle per round.
  const auto round = epoch / pool;
  Writer w;
  w.raw(genesis_.election_seed).u8(static_cast<std::uint8_t>(role)).u64(round);
  Rng rng(w.bytes());
  std::vector<std::uint32_t> order(pool);
  std::iota(order.begin(), order.end(), 0u);
  for (std::uint32_t i = pool - 1; i > 0; --i)
    std::swap(order[i], order[rng.below(std::uint64_t{i} + 1)]);
  return order[epoch % pool];
}

Bytes ChainState::dump_log() const {
  Writer out;
  out.var(encode(genesis_));
  for (const auto& e : log_) {
    Writer rec;
    rec.u8(e.tick ? kTickRecord : kTxRecord).u64(e.epoch);
    if (!e.tick) rec.put(e.tx);
    out.var(rec.bytes());
  }
  return std::move(out).bytes();
}

ChainState ChainState::load_log(ByteView log) {
  Reader r(log);
  ChainState st(decode_all<Genesis>(r.var()));
  while (r.remaining() > 0) {
    const auto body = r.var();
    Reader rec(body);
    const auto kind = rec.u8();
    const auto epoch = rec.u64();
    if (epoch != st.epoch_) throw Error(Errc::DecodeError, "log epoch out of order");
    if (kind == kTickRecord) {
      rec.finish();
      st.tick();
    } else if (kind == kTxRecord) {
      const auto tx = rec.get<Transaction>();
      rec.finish();
      st.submit_tx(tx);
    } else {
      throw Error(Errc::DecodeError, "log record kind");
    }
  }
  return st;
}

Bytes ChainState::state_bytes() const {
  Writer w;
  w.put(genesis_).u64(epoch_);
  w.u32(static_cast<std::uint32_t>(ssl_.size()));
  for (const auto& e : ssl_) w.u64(e.epoch).u32(e.combiner).put(e.share);
  w.u32(static_cast<std::uint32_t>(dsl_.size()));
  for (const auto& e : dsl_) w.u64(e.epoch).put(e.response);
  w.u32(static_cast<std::uint32_t>(index_rows_.size()));
  for (std::size_t i = 0; i < index_rows_.size(); ++i)
    w.raw(index_rows_[i].sigma_digest).u64(index_rows_[i].position).put(indexes_[i]);
  w.seq(signatures_).seq(trapdoors_).seq(trace_calls_).seq(registry_);
  w.var(dump_log());
  return std::move(w).bytes();
}

}  // namespace detaps::chain
