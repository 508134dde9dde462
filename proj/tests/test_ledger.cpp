#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "skyrelay/ledger.hpp"
#include "skyrelay/net_model.hpp"
#include "skyrelay/rng.hpp"
#include "skyrelay/trust.hpp"

using namespace skyrelay;

namespace {

Ledger random_ledger(int n, std::uint64_t seed) {
  Rng rng(seed);
  Ledger ledger;
  double t = 0.0;
  for (int k = 0; k < n; ++k) {
    t += rng.uniform(0.0, 0.5);
    ledger.append(static_cast<std::uint32_t>(rng.uniform_int(0, 9)),
                  static_cast<std::uint32_t>(k + 1), rng.uniform() < 0.3, t);
  }
  return ledger;
}

NetworkGraph line_graph(int n) {
  NetworkGraph graph;
  graph.area_size = 100.0 * n;
  graph.o_max = 150.0;
  for (int id = 0; id < n; ++id) {
    graph.nodes.push_back({id, {100.0 * id, 0.0}, 500.0, 0.01, 1e6});
  }
  graph.destination = n - 1;
  graph.rebuild_adjacency();
  return graph;
}

}  // namespace

TEST_CASE("ledger: genesis chaining and link property") {
  Ledger ledger;
  CHECK(ledger.verify());  // empty chain is valid

  const AuthRecord& first = ledger.append(3, 1, false, 0.5);
  CHECK(first.prev_hash == genesis_hash());
  CHECK(first.record_hash == first.compute_hash());

  const AuthRecord& second = ledger.append(4, 2, true, 0.9);
  CHECK(second.prev_hash == first.record_hash);
  CHECK(ledger.size() == 2);
  CHECK(ledger.verify());
}

TEST_CASE("ledger: 1000-record chain verifies") {
  const Ledger ledger = random_ledger(1000, 77);
  CHECK(ledger.verify());
}

TEST_CASE("ledger: any single-byte mutation is detected") {
  const Ledger ledger = random_ledger(25, 5);
  const auto& records = ledger.records();
  // Exhaustive over record, byte offset and a spread of wrong values.
  for (std::size_t which = 0; which < records.size(); ++which) {
    auto bytes = records[which].serialize();
    for (std::size_t pos = 0; pos < bytes.size(); ++pos) {
      for (std::uint8_t delta : {0x01, 0x80, 0xFF}) {
        auto mutated_records = records;
        auto mutated = bytes;
        mutated[pos] = static_cast<std::uint8_t>(mutated[pos] ^ delta);
        mutated_records[which] = AuthRecord::deserialize(mutated.data());
        CHECK_FALSE(Ledger::from_records(mutated_records).verify());
      }
    }
  }
}

TEST_CASE("ledger: reordering and truncation-in-the-middle are detected") {
  const Ledger ledger = random_ledger(10, 9);
  auto records = ledger.records();
  std::swap(records[2], records[6]);
  CHECK_FALSE(Ledger::from_records(records).verify());

  records = ledger.records();
  records.erase(records.begin() + 4);
  CHECK_FALSE(Ledger::from_records(records).verify());

  // Truncating the tail keeps a valid (shorter) chain.
  records = ledger.records();
  records.resize(5);
  CHECK(Ledger::from_records(records).verify());
}

TEST_CASE("ledger: csv export round-trips and still verifies") {
  const Ledger ledger = random_ledger(50, 13);
  std::ostringstream out;
  ledger.write_csv(out);
  std::istringstream in(out.str());
  const Ledger back = Ledger::read_csv(in);
  REQUIRE(back.size() == ledger.size());
  CHECK(back.verify());
  for (std::size_t k = 0; k < ledger.size(); ++k) {
    CHECK(back.records()[k].record_hash == ledger.records()[k].record_hash);
    CHECK(back.records()[k].timestamp == ledger.records()[k].timestamp);
  }
}

TEST_CASE("trust: credibility update arithmetic") {
  TrustParams params;
  TrustState state(10, params);
  CHECK(state.credibility(0) == 1.0);  // prior S=1, F=0

  TrustParams fresh = params;
  fresh.prior_successes = 9;
  fresh.prior_failures = 1;
  TrustState nine(10, fresh);
  CHECK(nine.update_credibility(2, false) == Catch::Approx(10.0 / 11.0).epsilon(1e-12));
  TrustState nine2(10, fresh);
  CHECK(nine2.update_credibility(2, true) == Catch::Approx(9.0 / 11.0).epsilon(1e-12));
}

TEST_CASE("trust: reliability decline and clamping") {
  TrustParams params;  // beta = 0.2
  params.init_reliability = 0.8;
  TrustState state(5, params);
  CHECK(state.update_reliability(1, false) == 0.8);
  CHECK(state.update_reliability(1, true) == Catch::Approx(0.6).epsilon(1e-12));

  params.init_reliability = 0.1;
  TrustState low(5, params);
  CHECK(low.update_reliability(0, true) == 0.0);  // clamped at the floor
}

TEST_CASE("trust: neighbor reliability averages over the adjacency") {
  const NetworkGraph graph = line_graph(5);
  TrustParams params;
  TrustState state(5, params);
  // Node 2 has neighbors {1, 3}; push their reliabilities apart.
  state.update_reliability(1, true);  // 0.7
  CHECK(state.neighbor_reliability(graph, 2) == Catch::Approx((0.7 + 0.9) / 2).epsilon(1e-12));
  CHECK(state.neighbor_reliability(graph, 0) == Catch::Approx(0.7).epsilon(1e-12));

  NetworkGraph isolated;
  isolated.area_size = 100.0;
  isolated.o_max = 1.0;
  isolated.nodes = {{0, {0, 0}, 500, 0.01, 1e6}, {1, {50, 50}, 500, 0.01, 1e6}};
  isolated.destination = 1;
  isolated.rebuild_adjacency();
  TrustState lone(2, params);
  CHECK_THROWS_AS(lone.neighbor_reliability(isolated, 0), InfeasibleError);
}

TEST_CASE("trust: security degree weighting") {
  const NetworkGraph graph = line_graph(3);
  TrustParams params;  // alpha = 0.5

  TrustState state(3, params);
  // Force RE_avg of node 1 to 0.8: neighbors are 0 and 2, both at 0.9;
  // one attack on node 0 gives (0.7 + 0.9)/2 = 0.8.
  state.record_auth(0, true);
  // Set node 1 credibility to 0.9: S=9, F=1 via updates on top of S=1.
  for (int k = 0; k < 8; ++k) state.update_credibility(1, false);
  state.update_credibility(1, true);
  CHECK(state.credibility(1) == Catch::Approx(0.9).epsilon(1e-12));
  CHECK(state.security_degree(graph, 1) ==
        Catch::Approx(0.5 * 0.8 + 0.5 * 0.9).epsilon(1e-12));

  TrustParams re_only = params;
  re_only.alpha = 1.0;
  TrustState s1(3, re_only);
  CHECK(s1.security_degree(graph, 1) == s1.neighbor_reliability(graph, 1));

  TrustParams cred_only = params;
  cred_only.alpha = 0.0;
  TrustState s0(3, cred_only);
  CHECK(s0.security_degree(graph, 1) == s0.credibility(1));
}

TEST_CASE("trust: credibility and reliability stay in bounds and move monotonically") {
  TrustParams params;
  TrustState state(4, params);
  Rng rng(21);
  double last_re = state.reliability(2);
  for (int k = 0; k < 500; ++k) {
    const bool delta = rng.uniform() < 0.4;
    const double a_before = state.credibility(2);
    state.record_auth(2, delta);
    const double a_after = state.credibility(2);
    if (delta) {
      CHECK(a_after <= a_before);
    } else {
      CHECK(a_after >= a_before);
    }
    CHECK(a_after >= 0.0);
    CHECK(a_after <= 1.0);
    CHECK(state.reliability(2) <= last_re);
    CHECK(state.reliability(2) >= 0.0);
    last_re = state.reliability(2);
  }
}

TEST_CASE("trust: ledger replay equals incremental state (property)") {
  const NetworkGraph graph = line_graph(8);
  TrustParams params;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    Ledger ledger;
    TrustState incremental(graph.node_count(), params);
    double t = 0.0;
    const int events = rng.uniform_int(0, 60);
    for (int k = 0; k < events; ++k) {
      const int id = rng.uniform_int(0, graph.node_count() - 1);
      const bool delta = rng.uniform() < 0.25;
      t += rng.uniform(0.0, 0.2);
      ledger.append(static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(k + 1), delta, t);
      incremental.record_auth(id, delta);
    }
    const TrustState replayed = rebuild_trust_from_ledger(ledger, graph, params);
    CHECK(replayed == incremental);
  }
}

TEST_CASE("trust: rebuild refuses a tampered ledger") {
  const NetworkGraph graph = line_graph(4);
  Ledger ledger;
  ledger.append(1, 1, false, 0.1);
  ledger.append(2, 2, true, 0.2);
  auto records = ledger.records();
  records[0].delta_data = 1;  // flip the outcome without re-hashing
  const Ledger tampered = Ledger::from_records(records);
  CHECK_THROWS_AS(rebuild_trust_from_ledger(tampered, graph, TrustParams{}),
                  ContractViolation);

  // Empty ledger replays to the all-prior state.
  const TrustState fresh = rebuild_trust_from_ledger(Ledger{}, graph, TrustParams{});
  CHECK(fresh == TrustState(graph.node_count(), TrustParams{}));
}

TEST_CASE("trust params validation") {
  TrustParams params;
  params.alpha = 1.5;
  CHECK_THROWS_AS(params.validate(), std::invalid_argument);
  params = {};
  params.beta = 0.0;
  CHECK_THROWS_AS(params.validate(), std::invalid_argument);
  params = {};
  params.prior_successes = 0;
  CHECK_THROWS_AS(params.validate(), std::invalid_argument);
}
