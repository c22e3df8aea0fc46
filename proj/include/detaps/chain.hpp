#pragma once

// In-process consortium chain: the share pools, the index store with its
// search contract, the gid registry and worker election.
//
// All state changes go through apply(), which also appends to the log, so
// replaying a log from genesis rebuilds the same state byte for byte.

#include <cstdint>
#include <optional>
#include <vector>

#include "detaps/scheme.hpp"

namespace detaps::chain {

using group::G1;
using group::Scalar;
using scheme::EncryptedShare;
using scheme::Gid;
using scheme::NotaryResponse;
using scheme::Signature;

enum class TxKind : std::uint8_t {
  Sign = 1,
  Comb = 2,
  Trapdoor = 3,
  Response = 4,
  TraceCall = 5,
  RegisterGid = 6,
};

enum Role : std::uint8_t {
  kSigner = 1,
  kCombiner = 2,
  kTracer = 4,
  kAuditor = 8,  // may post trace calls
  kAdmin = 16,   // may register gids
};

enum class WorkerRole : std::uint8_t { Combiner = 1, Tracer = 2 };

struct Member {
  G1 key;
  std::uint8_t roles = 0;

  bool operator==(const Member&) const = default;
  void write(Writer& w) const { w.put(key).u8(roles); }
  static Member read(Reader& r) {
    auto k = r.get<G1>();
    return {k, r.u8()};
  }
};

struct Genesis {
  Bytes election_seed;
  std::uint32_t combiners = 0;
  std::uint32_t tracers = 0;
  kase::Params kase;
  std::vector<Member> members;

  void write(Writer& w) const;
  static Genesis read(Reader& r);
};

struct Transaction {
  TxKind kind = TxKind::Sign;
  Bytes payload;
  G1 submitter;
  prim::SchnorrSig sig;

  bool operator==(const Transaction&) const = default;
  void write(Writer& w) const;
  static Transaction read(Reader& r);
};

Bytes tx_signing_bytes(TxKind kind, ByteView payload, std::uint64_t epoch);
Transaction make_tx(TxKind kind, Bytes payload, const Scalar& sk, std::uint64_t epoch);

// Payloads.
struct SignPayload {
  std::uint32_t combiner = 0;  // whose enclave key sealed the share
  EncryptedShare share;

  void write(Writer& w) const { w.u32(combiner).put(share); }
  static SignPayload read(Reader& r) {
    const auto c = r.u32();
    return {c, r.get<EncryptedShare>()};
  }
};

struct CombPayload {
  Bytes m;
  Signature sigma;

  void write(Writer& w) const { w.var(m).put(sigma); }
  static CombPayload read(Reader& r) {
    auto m = r.var();
    return {std::move(m), r.get<Signature>()};
  }
};

struct TraceCallPayload {
  Digest sigma_digest{};
  G1 target;

  void write(Writer& w) const { w.raw(sigma_digest).put(target); }
  static TraceCallPayload read(Reader& r);
};

struct Receipt {
  std::uint64_t epoch = 0;
  std::uint64_t position = 0;  // index in the transaction log

  bool operator==(const Receipt&) const = default;
};

struct SslEntry {
  std::uint64_t epoch = 0;
  std::uint32_t combiner = 0;
  EncryptedShare share;
};

struct DslEntry {
  std::uint64_t epoch = 0;
  NotaryResponse response;
};

struct IndexRow {
  Digest sigma_digest{};
  std::uint64_t position = 0;  // log position of the Tx^Comb
};

struct SearchHit {
  Digest sigma_digest{};
  std::uint64_t position = 0;
  std::uint32_t slot = 0;  // KASE gid slot the trapdoor was adjusted to
  std::uint32_t entry = 0;

  bool operator==(const SearchHit&) const = default;
};

class ChainState {
 public:
  explicit ChainState(Genesis genesis);

  // Verifies and appends. Throws BadSignature or Unauthorized.
  Receipt submit_tx(const Transaction& tx);
  void tick();

  std::uint64_t epoch() const { return epoch_; }
  const Genesis& genesis() const { return genesis_; }

  // Shares addressed to `combiner` committed in epochs [since, epoch].
  std::vector<EncryptedShare> ssl_pull(std::uint64_t epoch, std::uint32_t combiner,
                                       std::uint64_t since = 0) const;
  std::vector<NotaryResponse> dsl_pull(const Digest& sigma_digest) const;
  std::size_t ssl_size() const { return ssl_.size(); }
  std::size_t dsl_size() const { return dsl_.size(); }

  const scheme::GidRegistry& gid_registry() const { return registry_; }
  const std::vector<IndexRow>& index_rows() const { return index_rows_; }
  const std::vector<kase::Index>& indexes() const { return indexes_; }
  const std::vector<CombPayload>& signatures() const { return signatures_; }
  const std::vector<TraceCallPayload>& trace_calls() const { return trace_calls_; }
  const std::vector<kase::Trapdoor>& trapdoors() const { return trapdoors_; }
  std::optional<CombPayload> find_signature(const Digest& sigma_digest) const;

  // Adjusts td for every registered gid in its scope and tests every index.
  std::vector<SearchHit> search_contract(const kase::Trapdoor& td,
                                         Exec exec = Exec::Parallel) const;

  // Throws EmptyPool.
  std::uint32_t elect_worker(WorkerRole role, std::uint64_t epoch) const;

  // Log records are length-prefixed; load() replays them from genesis.
  Bytes dump_log() const;
  static ChainState load_log(ByteView log);
  // Canonical encoding of everything above, for equality checks.
  Bytes state_bytes() const;

 private:
  struct LogEntry {
    bool tick = false;
    std::uint64_t epoch = 0;
    Transaction tx;
  };

  void check(const Transaction& tx, std::uint64_t epoch) const;
  void apply(const Transaction& tx, std::uint64_t position);

  Genesis genesis_;
  std::uint64_t epoch_ = 0;
  std::vector<LogEntry> log_;
  std::vector<SslEntry> ssl_;
  std::vector<DslEntry> dsl_;
  std::vector<IndexRow> index_rows_;
  std::vector<kase::Index> indexes_;
  std::vector<CombPayload> signatures_;
  std::vector<kase::Trapdoor> trapdoors_;
  std::vector<TraceCallPayload> trace_calls_;
  scheme::GidRegistry registry_;
};

}  // namespace detaps::chain
