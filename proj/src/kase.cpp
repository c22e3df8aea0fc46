#include "detaps/kase.hpp"

#include <algorithm>

#include "detaps/errors.hpp"
#include "detaps/rng.hpp"

namespace detaps::kase {

namespace {

constexpr std::string_view kKeywordDst = "DETAPS-V1-KASE-KW";
constexpr std::uint32_t kMaxCapacity = 1u << 12;
constexpr std::uint32_t kMaxEntries = 1u << 16;
// Dummy keywords live in an epoch range no join ever reaches.
constexpr std::uint64_t kDummyEpochBit = 1ull << 63;

void check_gid(const Params& params, Gid gid) {
  if (gid < 1 || gid > params.capacity) throw Error(Errc::OutOfRange, "gid outside capacity");
}

Scope normalize(const Scope& scope) {
  Scope s = scope;
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

}  // namespace

const G1& Params::b_power(std::uint32_t i) const {
  if (i == capacity + 1 || i > 2 * capacity) throw Error(Errc::OutOfRange, "no such power");
  return i <= capacity ? b[i] : b[i - 1];
}

void Params::write(Writer& w) const { w.u32(capacity).seq(b).seq(pk).put(z); }

Params Params::read(Reader& r) {
  Params p;
  p.capacity = r.u32();
  if (p.capacity < 1 || p.capacity > kMaxCapacity) throw Error(Errc::DecodeError, "capacity");
  p.b = r.seq<G1>(2 * p.capacity);
  p.pk = r.seq<G2>(p.capacity + 1);
  if (p.b.size() != 2 * p.capacity || p.pk.size() != p.capacity + 1)
    throw Error(Errc::DecodeError, "ladder length");
  p.z = r.get<GT>();
  return p;
}

void AggregateKey::write(Writer& w) const {
  w.put(k).u32(static_cast<std::uint32_t>(scope.size()));
  for (auto g : scope) w.u32(g);
}

AggregateKey AggregateKey::read(Reader& r) {
  AggregateKey a;
  a.k = r.get<G1>();
  const auto n = r.count(kMaxCapacity);
  for (std::uint32_t i = 0; i < n; ++i) a.scope.push_back(r.u32());
  return a;
}

void Trapdoor::write(Writer& w) const {
  w.put(td).u32(static_cast<std::uint32_t>(scope.size()));
  for (auto g : scope) w.u32(g);
}

Trapdoor Trapdoor::read(Reader& r) {
  Trapdoor t;
  t.td = r.get<G1>();
  const auto n = r.count(kMaxCapacity);
  for (std::uint32_t i = 0; i < n; ++i) t.scope.push_back(r.u32());
  return t;
}

Index Index::read(Reader& r) {
  Index ix;
  ix.c1 = r.get<G2>();
  ix.c2 = r.get<G2>();
  ix.entries = r.seq<GT>(kMaxEntries);
  return ix;
}

std::size_t Index::encoded_size(std::uint32_t n3) {
  return 2 * G2::kBytes + 4 + GT::kBytes * n3;
}

Params setup(std::uint32_t capacity, Rng& rng) {
  if (capacity < 1 || capacity > kMaxCapacity) throw Error(Errc::BadCapacity, "capacity < 1");
  const auto alpha = Scalar::random_nonzero(rng);
  Params p;
  p.capacity = capacity;
  Scalar power = Scalar::one();
  for (std::uint32_t i = 0; i <= 2 * capacity; ++i) {
    if (i != capacity + 1) p.b.push_back(G1::generator() * power);
    if (i <= capacity) p.pk.push_back(G2::generator() * power);
    power *= alpha;
  }
  p.z = group::pairing(p.b_power(1), p.pk[capacity]);
  return p;
}

MasterKeys keygen(Rng& rng) {
  MasterKeys k;
  k.msk.gamma = Scalar::random_nonzero(rng);
  k.mpk.v = G2::generator() * k.msk.gamma;
  return k;
}

G1 keyword_hash(const Pid& pid) { return G1::hash(kKeywordDst, encode(pid)); }

AggregateKey extract(const Params& params, const MasterSecret& msk, const Scope& scope) {
  const auto s = normalize(scope);
  if (s.empty()) throw Error(Errc::OutOfRange, "empty scope");
  G1 acc = G1::identity();
  for (auto j : s) {
    check_gid(params, j);
    acc += params.b_power(params.capacity + 1 - j);
  }
  return {acc * msk.gamma, s};
}

Index encrypt(const Params& params, const MasterPublic& mpk, Gid gid,
              const std::vector<Pid>& members, std::uint32_t n3, Rng& rng,
              Scalar* randomness) {
  check_gid(params, gid);
  if (members.size() > n3) throw Error(Errc::TooManyPids, "more pids than index entries");
  const auto t = Scalar::random_nonzero(rng);
  Index ix;
  ix.c1 = G2::generator() * t;
  ix.c2 = (mpk.v + params.pk[gid]) * t;
  if (randomness != nullptr) *randomness = t;
  const GT mask = params.z.pow(t).inverse();

  std::vector<Pid> keywords = members;
  while (keywords.size() < n3) {
    Pid dummy;
    rng.fill(dummy.token);
    dummy.epoch = kDummyEpochBit | rng.u64();
    keywords.push_back(dummy);
  }
  for (std::size_t i = keywords.size(); i > 1; --i) std::swap(keywords[i - 1], keywords[rng.below(i)]);
  for (const auto& kw : keywords)
    ix.entries.push_back(group::pairing(keyword_hash(kw) * t, G2::generator()) * mask);
  return ix;
}

Trapdoor trapdoor(const AggregateKey& key, const Pid& pid) {
  return {key.k + keyword_hash(pid), key.scope};
}

AdjustedTrapdoor adjust(const Params& params, Gid gid, const Trapdoor& td) {
  if (!std::binary_search(td.scope.begin(), td.scope.end(), gid))
    throw Error(Errc::OutOfScope, "gid not covered by the aggregate key");
  AdjustedTrapdoor out;
  out.gid = gid;
  out.td = td.td;
  out.scope_pub = G1::identity();
  for (auto j : td.scope) {
    check_gid(params, j);
    out.scope_pub += params.b_power(params.capacity + 1 - j);
    if (j != gid) out.td += params.b_power(params.capacity + 1 - j + gid);
  }
  return out;
}

GT test_value(const AdjustedTrapdoor& td, const Index& index) {
  const G1 ps[2] = {td.td, -td.scope_pub};
  const G2 qs[2] = {index.c1, index.c2};
  return group::multi_pairing(ps, qs);
}

bool test(const AdjustedTrapdoor& td, const G2& c1, const G2& c2, const GT& entry) {
  return test_value(td, Index{c1, c2, {}}) == entry;
}

std::optional<std::uint32_t> match(const AdjustedTrapdoor& td, const Index& index) {
  const auto v = test_value(td, index);
  for (std::uint32_t i = 0; i < index.entries.size(); ++i)
    if (index.entries[i] == v) return i;
  return std::nullopt;
}

std::vector<int> search(const AdjustedTrapdoor& td, const std::vector<Index>& indexes,
                        Exec exec) {
  std::vector<int> out(indexes.size(), -1);
  for_each_index(indexes.size(), exec, [&](std::size_t i) {
    if (auto m = match(td, indexes[i])) out[i] = static_cast<int>(*m);
  });
  return out;
}

}  // namespace detaps::kase
