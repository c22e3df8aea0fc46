#include <algorithm>
#include <set>

#include <doctest.h>

#include "detaps/errors.hpp"
#include "detaps/kase.hpp"
#include "detaps/rng.hpp"
#include "golden.hpp"

using namespace detaps;
using namespace detaps::kase;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::ConfigError;
}

std::vector<Pid> make_pids(std::size_t n, Rng& rng) {
  std::vector<Pid> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    rng.fill(out[i].token);
    out[i].epoch = i;
  }
  return out;
}

int count_matches(const AdjustedTrapdoor& td, const Index& ix) {
  const auto v = test_value(td, ix);
  return static_cast<int>(std::count(ix.entries.begin(), ix.entries.end(), v));
}

}  // namespace

TEST_CASE("setup ladder layout") {
  auto rng = Rng::from_seed(61);
  const auto p = setup(4, rng);
  CHECK(p.b.size() == 8);
  CHECK(p.pk.size() == 5);
  CHECK(p.b_power(0) == G1::generator());
  CHECK(p.pk[0] == G2::generator());
  CHECK(code_of([&] { (void)p.b_power(5); }) == Errc::OutOfRange);
  CHECK(code_of([&] { (void)p.b_power(9); }) == Errc::OutOfRange);
  // Consecutive powers: e(g1_{i+1}, g2) == e(g1_i, g2_1), skipping the hole.
  for (std::uint32_t i = 0; i + 1 <= 8; ++i) {
    if (i == 5 || i + 1 == 5) continue;
    CHECK(group::pairing(p.b_power(i + 1), G2::generator()) ==
          group::pairing(p.b_power(i), p.pk[1]));
  }
  CHECK(p.z == group::pairing(p.b_power(1), p.pk[4]));
  CHECK(code_of([&] { setup(0, rng); }) == Errc::BadCapacity);
  CHECK(setup(1, rng).b.size() == 2);
}

TEST_CASE("extract validates the scope") {
  auto rng = Rng::from_seed(62);
  const auto p = setup(4, rng);
  const auto mk = keygen(rng);
  CHECK(extract(p, mk.msk, {3, 1, 3}).scope == Scope{1, 3});
  CHECK(code_of([&] { extract(p, mk.msk, {}); }) == Errc::OutOfRange);
  CHECK(code_of([&] { extract(p, mk.msk, {5}); }) == Errc::OutOfRange);
  CHECK(code_of([&] { extract(p, mk.msk, {0}); }) == Errc::OutOfRange);
  CHECK(extract(p, mk.msk, {1, 2, 3, 4}).scope.size() == 4);
}

TEST_CASE("index shape and errors") {
  auto rng = Rng::from_seed(63);
  const auto p = setup(2, rng);
  const auto mk = keygen(rng);
  const auto pids = make_pids(5, rng);
  const auto small = encrypt(p, mk.mpk, 1, {pids[0]}, 4, rng);
  const auto big = encrypt(p, mk.mpk, 2, {pids[0], pids[1], pids[2], pids[3]}, 4, rng);
  CHECK(small.entries.size() == 4);
  CHECK(encode(small).size() == encode(big).size());
  CHECK(encode(small).size() == Index::encoded_size(4));
  std::set<std::string> distinct;
  for (const auto& e : big.entries) distinct.insert(to_hex(e.to_bytes()));
  for (const auto& e : small.entries) distinct.insert(to_hex(e.to_bytes()));
  CHECK(distinct.size() == 8);
  CHECK(code_of([&] { encrypt(p, mk.mpk, 1, pids, 4, rng); }) == Errc::TooManyPids);
  CHECK(code_of([&] { encrypt(p, mk.mpk, 3, {}, 4, rng); }) == Errc::OutOfRange);
  CHECK(decode_all<Index>(encode(big)) == big);
}

TEST_CASE("membership example: N = {p2, p3}, n3 = 4") {
  auto rng = Rng::from_seed(64);
  const auto p = setup(3, rng);
  const auto mk = keygen(rng);
  const auto pids = make_pids(4, rng);
  const auto key = extract(p, mk.msk, {1, 2});
  const auto ix = encrypt(p, mk.mpk, 2, {pids[1], pids[2]}, 4, rng);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto adj = adjust(p, 2, trapdoor(key, pids[i]));
    CHECK(count_matches(adj, ix) == ((i == 1 || i == 2) ? 1 : 0));
    CHECK(match(adj, ix).has_value() == (i == 1 || i == 2));
  }
  const auto empty = encrypt(p, mk.mpk, 2, {}, 4, rng);
  for (const auto& pid : pids) CHECK_FALSE(match(adjust(p, 2, trapdoor(key, pid)), empty));

  // Out-of-scope adjustment is refused.
  const auto narrow = extract(p, mk.msk, {1});
  CHECK(code_of([&] { adjust(p, 2, trapdoor(narrow, pids[1])); }) == Errc::OutOfScope);

  // Re-encryption: fresh randomness, same match vector.
  const auto again = encrypt(p, mk.mpk, 2, {pids[1], pids[2]}, 4, rng);
  CHECK_FALSE(again == ix);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto adj = adjust(p, 2, trapdoor(key, pids[i]));
    CHECK(match(adj, again).has_value() == match(adj, ix).has_value());
  }
}

TEST_CASE("single-entry test agrees with match") {
  auto rng = Rng::from_seed(65);
  const auto p = setup(2, rng);
  const auto mk = keygen(rng);
  const auto pids = make_pids(2, rng);
  const auto ix = encrypt(p, mk.mpk, 1, {pids[0]}, 3, rng);
  const auto adj = adjust(p, 1, trapdoor(extract(p, mk.msk, {1, 2}), pids[0]));
  int hits = 0;
  for (const auto& e : ix.entries) hits += test(adj, ix.c1, ix.c2, e) ? 1 : 0;
  CHECK(hits == 1);
  CHECK(ix.entries[*match(adj, ix)] == test_value(adj, ix));
}

TEST_CASE("exhaustive oracle: 4 pids, 4 gids, every N and scope") {
  auto rng = Rng::from_seed(66);
  const std::uint32_t cap = 4, n3 = 4;
  const auto p = setup(cap, rng);
  const auto mk = keygen(rng);
  const auto pids = make_pids(4, rng);

  struct Row {
    Gid gid;
    unsigned members;
    Index ix;
  };
  std::vector<Row> rows;
  for (Gid gid = 1; gid <= cap; ++gid)
    for (unsigned mask = 0; mask < 16; ++mask) {
      std::vector<Pid> n;
      for (unsigned i = 0; i < 4; ++i)
        if (mask & (1u << i)) n.push_back(pids[i]);
      rows.push_back({gid, mask, encrypt(p, mk.mpk, gid, n, n3, rng)});
    }

  int mismatches = 0, checked = 0;
  for (unsigned smask = 1; smask < 16; ++smask) {
    Scope scope;
    for (Gid g = 1; g <= cap; ++g)
      if (smask & (1u << (g - 1))) scope.push_back(g);
    const auto key = extract(p, mk.msk, scope);
    for (unsigned pi = 0; pi < 4; ++pi) {
      const auto td = trapdoor(key, pids[pi]);
      std::vector<AdjustedTrapdoor> adjusted;
      for (auto g : scope) adjusted.push_back(adjust(p, g, td));
      for (const auto& row : rows) {
        // The search contract tries every adjustment it can form.
        int found = 0;
        for (const auto& a : adjusted) found += count_matches(a, row.ix);
        const bool oracle = (row.members & (1u << pi)) &&
                            std::find(scope.begin(), scope.end(), row.gid) != scope.end();
        if ((found == 1) != oracle || found > 1) ++mismatches;
        ++checked;
      }
    }
  }
  CHECK(checked == 15 * 4 * 64);
  CHECK(mismatches == 0);
}

TEST_CASE("serial and parallel search agree") {
  auto rng = Rng::from_seed(67);
  const auto p = setup(3, rng);
  const auto mk = keygen(rng);
  const auto pids = make_pids(6, rng);
  std::vector<Index> indexes;
  for (int i = 0; i < 12; ++i) {
    std::vector<Pid> n;
    for (std::size_t j = 0; j < pids.size(); ++j)
      if (rng.below(2)) n.push_back(pids[j]);
    indexes.push_back(encrypt(p, mk.mpk, 1 + static_cast<Gid>(rng.below(3)), n, 6, rng));
  }
  const auto adj = adjust(p, 2, trapdoor(extract(p, mk.msk, {1, 2, 3}), pids[0]));
  CHECK(search(adj, indexes, Exec::Serial) == search(adj, indexes, Exec::Parallel));
}

TEST_CASE("kase golden encodings") {
  auto rng = Rng::from_seed(68);
  const auto p = setup(2, rng);
  const auto mk = keygen(rng);
  Pid pid;
  pid.epoch = 7;
  const auto td = trapdoor(extract(p, mk.msk, {1, 2}), pid);
  golden::check("kase.txt", "trapdoor", encode(td));
  golden::check("kase.txt", "adjusted", encode(adjust(p, 1, td)));
  golden::check("kase.txt", "index_digest", sha256(encode(encrypt(p, mk.mpk, 1, {pid}, 3, rng))));
  golden::check("kase.txt", "keyword", keyword_hash(pid).to_bytes());
}
