#pragma once

// Key-aggregate searchable encryption over BLS12-381.
//
// Parameters are the ladder g1^{a^i}, i in [0, 2n] \ {n+1}, in G1 and
// g2^{a^i}, i in [0, n], in G2, where n is the group capacity. A group
// (gid) occupies ladder position 1..n. Keywords are notary pids hashed to G1.
//
//   Enc(gid=i):   c1 = g2^t, c2 = (v g2_i)^t,
//                 entry(w) = e(H(w), g2)^t / e(g1_1, g2_n)^t
//   Extract(S):   k = prod_{j in S} g1_{n+1-j}^gamma
//   Trapdoor(w):  td = k H(w)
//   Adjust(i):    td_i = td prod_{j in S, j != i} g1_{n+1-j+i}
//   Test:         e(td_i, c1) / e(prod_{j in S} g1_{n+1-j}, c2) == entry

#include <cstdint>
#include <optional>
#include <vector>

#include "detaps/bytes.hpp"
#include "detaps/dtpke.hpp"
#include "detaps/group.hpp"
#include "detaps/parallel.hpp"

namespace detaps {
class Rng;
}

namespace detaps::kase {

using dtpke::Pid;
using group::G1;
using group::G2;
using group::GT;
using group::Scalar;

using Gid = std::uint32_t;
using Scope = std::vector<Gid>;

struct Params {
  std::uint32_t capacity = 0;
  std::vector<G1> b;   // 2n entries: powers 0..n, then n+2..2n
  std::vector<G2> pk;  // n+1 entries: powers 0..n
  GT z;                // e(g1_1, g2_n)

  // g1^{a^i}; throws OutOfRange for i == n+1 or i > 2n.
  const G1& b_power(std::uint32_t i) const;

  void write(Writer& w) const;
  static Params read(Reader& r);
};

struct MasterPublic {
  G2 v;

  bool operator==(const MasterPublic&) const = default;
  void write(Writer& w) const { w.put(v); }
  static MasterPublic read(Reader& r) { return {r.get<G2>()}; }
};

struct MasterSecret {
  Scalar gamma;
};

struct MasterKeys {
  MasterPublic mpk;
  MasterSecret msk;
};

struct AggregateKey {
  G1 k;
  Scope scope;  // sorted, distinct

  bool operator==(const AggregateKey&) const = default;
  void write(Writer& w) const;
  static AggregateKey read(Reader& r);
};

struct Index {
  G2 c1;
  G2 c2;
  std::vector<GT> entries;

  bool operator==(const Index&) const = default;
  void write(Writer& w) const { w.put(c1).put(c2).seq(entries); }
  static Index read(Reader& r);
  static std::size_t encoded_size(std::uint32_t n3);
};

struct Trapdoor {
  G1 td;
  Scope scope;

  bool operator==(const Trapdoor&) const = default;
  void write(Writer& w) const;
  static Trapdoor read(Reader& r);
};

struct AdjustedTrapdoor {
  Gid gid = 0;
  G1 td;
  G1 scope_pub;  // prod_{j in S} g1_{n+1-j}

  bool operator==(const AdjustedTrapdoor&) const = default;
  void write(Writer& w) const { w.u32(gid).put(td).put(scope_pub); }
  static AdjustedTrapdoor read(Reader& r) {
    AdjustedTrapdoor a;
    a.gid = r.u32();
    a.td = r.get<G1>();
    a.scope_pub = r.get<G1>();
    return a;
  }
};

// Throws BadCapacity if capacity < 1.
Params setup(std::uint32_t capacity, Rng& rng);
MasterKeys keygen(Rng& rng);

G1 keyword_hash(const Pid& pid);

// Throws OutOfRange for an empty scope or a gid outside [1, capacity].
AggregateKey extract(const Params& params, const MasterSecret& msk, const Scope& scope);

// Throws OutOfRange for a bad gid, TooManyPids if |N| > n3.
Index encrypt(const Params& params, const MasterPublic& mpk, Gid gid,
              const std::vector<Pid>& members, std::uint32_t n3, Rng& rng,
              Scalar* randomness = nullptr);

Trapdoor trapdoor(const AggregateKey& key, const Pid& pid);
// Public; throws OutOfScope if gid is not in the trapdoor's scope.
AdjustedTrapdoor adjust(const Params& params, Gid gid, const Trapdoor& td);

// The value every matching entry must equal.
GT test_value(const AdjustedTrapdoor& td, const Index& index);
bool test(const AdjustedTrapdoor& td, const G2& c1, const G2& c2, const GT& entry);
// Position of the matching entry, if any.
std::optional<std::uint32_t> match(const AdjustedTrapdoor& td, const Index& index);

// For each index, the matching entry position or -1.
std::vector<int> search(const AdjustedTrapdoor& td, const std::vector<Index>& indexes,
                        Exec exec = Exec::Parallel);

}  // namespace detaps::kase
