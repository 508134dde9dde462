#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <sstream>

#include "skyrelay/net_model.hpp"
#include "skyrelay/rng.hpp"

using namespace skyrelay;

TEST_CASE("distance: euclidean basics") {
  CHECK(distance(Vec2{0, 0}, Vec2{0, 0}) == 0.0);
  CHECK(distance(Vec2{0, 0}, Vec2{3, 4}) == 5.0);
  const double expected = std::sqrt(150.0 * 150.0 + 40.0 * 40.0);
  CHECK(distance(Vec2{100, 200}, Vec2{250, 160}) == Catch::Approx(expected).epsilon(0));
  CHECK(distance(Vec2{100, 200}, Vec2{250, 160}) == Catch::Approx(155.24).margin(0.01));

  Rng rng(42);
  for (int i = 0; i < 200; ++i) {
    Vec2 a{rng.uniform(0, 1000), rng.uniform(0, 1000)};
    Vec2 b{rng.uniform(0, 1000), rng.uniform(0, 1000)};
    CHECK(distance(a, b) == distance(b, a));
  }
}

TEST_CASE("path_loss_db: free-space reference values") {
  // At d = c/(4*pi*f) the loss is zero up to the rounding of the 147.55
  // constant.
  const double f = 2.4e9;
  const double d0 = kLightSpeed / (4.0 * std::numbers::pi * f);
  CHECK(path_loss_db(d0, f) == Catch::Approx(0.0).margin(0.01));

  CHECK(path_loss_db(100.0, f) == Catch::Approx(80.05).margin(0.01));
  CHECK(path_loss_db(200.0, f) == Catch::Approx(86.08).margin(0.01));

  const double direct = 20.0 * std::log10(200.0) + 20.0 * std::log10(f) - 147.55;
  CHECK(path_loss_db(200.0, f) == direct);
}

TEST_CASE("path_loss_db: +6.0206 dB per distance doubling, monotone") {
  const double per_doubling = 20.0 * std::log10(2.0);
  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    const double d = rng.uniform(1.0, 500.0);
    const double f = rng.uniform(1e8, 6e9);
    CHECK(path_loss_db(2.0 * d, f) - path_loss_db(d, f) ==
          Catch::Approx(per_doubling).margin(1e-9));
    const double d2 = d + rng.uniform(0.1, 100.0);
    CHECK(path_loss_db(d, f) < path_loss_db(d2, f));
  }
}

TEST_CASE("path_loss_db: rejects degenerate inputs") {
  CHECK_THROWS_AS(path_loss_db(0.0, 2.4e9), std::invalid_argument);
  CHECK_THROWS_AS(path_loss_db(-1.0, 2.4e9), std::invalid_argument);
  CHECK_THROWS_AS(path_loss_db(10.0, 0.0), std::invalid_argument);
}

TEST_CASE("snr: unity and worked example") {
  ChannelParams params;
  params.tx_power = 1e-13;
  params.noise_power = 1e-13;
  const Snr unity = snr(params, 0.0);
  CHECK(unity.linear == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(unity.db == Catch::Approx(0.0).margin(1e-9));

  ChannelParams defaults;
  const Snr s = snr(defaults, 80.05);
  const double expected = 0.1 * std::pow(10.0, -8.005) / 1e-13;
  CHECK(s.linear == Catch::Approx(expected).epsilon(1e-12));
  CHECK(s.linear == Catch::Approx(9886.0).margin(1.0));
  CHECK(s.db == Catch::Approx(39.95).margin(0.01));
}

TEST_CASE("snr: +10 dB path loss divides the linear ratio by 10") {
  ChannelParams params;
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const double pl = rng.uniform(0.0, 120.0);
    CHECK(snr(params, pl).linear / snr(params, pl + 10.0).linear ==
          Catch::Approx(10.0).epsilon(1e-12));
  }
}

TEST_CASE("shannon_rate: endpoints and worked example") {
  CHECK(shannon_rate(1e6, 0.0) == 0.0);
  CHECK(shannon_rate(1e6, 1.0) == 1e6);
  const double expected = 1e6 * std::log2(1.0 + 9886.0);
  CHECK(shannon_rate(1e6, 9886.0) == Catch::Approx(expected).epsilon(0));
  CHECK(shannon_rate(1e6, 9886.0) == Catch::Approx(13.27e6).margin(0.01e6));
}

TEST_CASE("snr/rate chain decreases with path loss") {
  ChannelParams params;
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const double pl = rng.uniform(40.0, 110.0);
    const double bump = rng.uniform(0.1, 20.0);
    CHECK(snr(params, pl + bump).linear < snr(params, pl).linear);
    CHECK(shannon_rate(params.bandwidth, snr(params, pl + bump).linear) <
          shannon_rate(params.bandwidth, snr(params, pl).linear));
  }
}

TEST_CASE("hop_energy: worked example and degenerate payload") {
  ChannelParams params;
  const HopEnergy zero = hop_energy(0.0, params);
  CHECK(zero.tx == 0.0);
  CHECK(zero.rx == 0.0);

  const HopEnergy e = hop_energy(1e6, params);
  CHECK(e.tx == 1e6 * params.circuit_energy + params.tx_power * (1e6 / params.bandwidth));
  CHECK(e.rx == 1e6 * params.circuit_energy);
  CHECK(e.tx == Catch::Approx(0.15).epsilon(1e-12));
  CHECK(e.rx == Catch::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("hop_energy: exact linearity in payload, tx bound") {
  ChannelParams params;
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    const double bits = rng.uniform(1.0, 1e7);
    const HopEnergy one = hop_energy(bits, params);
    const HopEnergy two = hop_energy(2.0 * bits, params);
    CHECK(two.tx == 2.0 * one.tx);
    CHECK(two.rx == 2.0 * one.rx);
    CHECK(one.tx >= one.rx);
    CHECK(one.rx >= 0.0);
    CHECK(one.tx - one.rx ==
          Catch::Approx(params.tx_power * bits / params.bandwidth).epsilon(1e-10));
  }
}

TEST_CASE("hop_delay: components and error path") {
  CHECK(hop_delay(0.0, 1e6, 0.0, 0.0) == 0.0);
  const double expected = 0.01 + 1e6 / 13.27e6 + 100.0 / kLightSpeed;
  CHECK(hop_delay(1e6, 13.27e6, 100.0, 0.01) == Catch::Approx(expected).epsilon(0));
  CHECK(hop_delay(1e6, 13.27e6, 100.0, 0.01) == Catch::Approx(0.08536).margin(1e-4));
  CHECK(hop_delay(0.0, 1e6, 200.0, 0.0) == Catch::Approx(200.0 / 2.998e8).epsilon(1e-3));
  CHECK_THROWS_AS(hop_delay(1e6, 0.0, 100.0, 0.01), InfeasibleError);

  Rng rng(13);
  for (int i = 0; i < 50; ++i) {
    const double r1 = rng.uniform(1e5, 1e7);
    const double r2 = r1 + rng.uniform(1.0, 1e7);
    CHECK(hop_delay(1e6, r2, 50.0, 0.01) < hop_delay(1e6, r1, 50.0, 0.01));
  }
}

namespace {

NetworkGraph small_graph() {
  NetworkGraph graph;
  graph.area_size = 300.0;
  graph.o_max = 150.0;
  graph.nodes = {
      {0, {0.0, 0.0}, 500.0, 0.01, 1e6},
      {1, {100.0, 0.0}, 500.0, 0.01, 1e6},
      {2, {300.0, 0.0}, 500.0, 0.0, 0.0},
  };
  graph.destination = 2;
  graph.rebuild_adjacency();
  return graph;
}

}  // namespace

TEST_CASE("link_metrics: matches the standalone operations bit for bit") {
  const NetworkGraph graph = small_graph();
  ChannelParams params;
  const LinkMetrics m = link_metrics(graph, params, 0, 1, 1e6);

  const double d = distance(graph.nodes[0], graph.nodes[1]);
  CHECK(m.distance == d);
  CHECK(m.path_loss_db == path_loss_db(d, params.frequency));
  const Snr s = snr(params, m.path_loss_db);
  CHECK(m.snr_linear == s.linear);
  CHECK(m.snr_db == s.db);
  CHECK(m.rate == shannon_rate(params.bandwidth, s.linear));
  const HopEnergy e = hop_energy(1e6, params);
  CHECK(m.tx_energy == e.tx);
  CHECK(m.rx_energy == e.rx);
  CHECK(m.hop_delay == hop_delay(1e6, m.rate, d, graph.nodes[0].proc_time));
  CHECK(m.feasible);
}

TEST_CASE("link_metrics: non-adjacent pair rejected, weak link flagged") {
  const NetworkGraph graph = small_graph();
  ChannelParams params;
  CHECK_THROWS_AS(link_metrics(graph, params, 0, 2, 1e6), std::invalid_argument);

  params.snr_min_db = 200.0;  // nothing can pass
  const LinkMetrics m = link_metrics(graph, params, 0, 1, 1e6);
  CHECK_FALSE(m.feasible);
  CHECK(m.rate > 0.0);
}

TEST_CASE("generate_topology: deterministic for a fixed seed") {
  const NetworkGraph a = generate_topology(9001, 12, 600.0, 250.0, {600.0, 300.0});
  const NetworkGraph b = generate_topology(9001, 12, 600.0, 250.0, {600.0, 300.0});
  std::ostringstream sa, sb;
  write_topology(a, sa);
  write_topology(b, sb);
  CHECK(sa.str() == sb.str());
  CHECK(a.destination == 12);
  CHECK(a.nodes[12].pos.x == 600.0);
}

TEST_CASE("generate_topology: adjacency matches geometry exactly") {
  const NetworkGraph graph = generate_topology(77, 40, 1200.0, 200.0, {1200.0, 600.0});
  for (int i = 0; i < graph.node_count(); ++i) {
    CHECK(graph.nodes[i].pos.x >= 0.0);
    CHECK(graph.nodes[i].pos.x <= 1200.0);
    CHECK(graph.nodes[i].pos.y >= 0.0);
    CHECK(graph.nodes[i].pos.y <= 1200.0);
    for (int j = 0; j < graph.node_count(); ++j) {
      if (i == j) continue;
      const bool in_range = distance(graph.nodes[i], graph.nodes[j]) <= graph.o_max;
      CHECK(graph.adjacent(i, j) == in_range);
      CHECK(graph.adjacent(i, j) == graph.adjacent(j, i));
      CHECK(distance(graph.nodes[i], graph.nodes[j]) >= 1.0);
    }
  }
}

TEST_CASE("generate_topology: connectivity holds (independent BFS oracle)") {
  const NetworkGraph graph = generate_topology(123, 40, 1200.0, 200.0, {1200.0, 600.0});
  // Breadth-first search written against the raw positions, not the stored
  // adjacency.
  std::vector<int> frontier{graph.destination};
  std::set<int> seen{graph.destination};
  while (!frontier.empty()) {
    const int u = frontier.back();
    frontier.pop_back();
    for (int v = 0; v < graph.node_count(); ++v) {
      if (v != u && !seen.count(v) && distance(graph.nodes[u], graph.nodes[v]) <= graph.o_max) {
        seen.insert(v);
        frontier.push_back(v);
      }
    }
  }
  // The destination must be able to reach at least half the swarm, and the
  // default source must be among the reachable nodes.
  CHECK(static_cast<int>(seen.size()) - 1 >= 20);
  CHECK(seen.count(default_source(graph)) == 1);
}

TEST_CASE("generate_topology: impossible configuration fails after retries") {
  // Range so short that nothing can connect in a large area.
  CHECK_THROWS_AS(generate_topology(1, 5, 10000.0, 1.5, {5000.0, 5000.0}), InfeasibleError);
}

TEST_CASE("topology file round-trip") {
  const NetworkGraph graph = generate_topology(55, 15, 800.0, 250.0, {800.0, 400.0});
  std::ostringstream out;
  write_topology(graph, out);
  std::istringstream in(out.str());
  const NetworkGraph back = read_topology(in);

  REQUIRE(back.node_count() == graph.node_count());
  CHECK(back.destination == graph.destination);
  for (int i = 0; i < graph.node_count(); ++i) {
    CHECK(back.nodes[i].pos.x == graph.nodes[i].pos.x);
    CHECK(back.nodes[i].pos.y == graph.nodes[i].pos.y);
    for (int j = 0; j < graph.node_count(); ++j) {
      if (i != j) CHECK(back.adjacent(i, j) == graph.adjacent(i, j));
    }
  }
}

TEST_CASE("channel params validation") {
  ChannelParams params;
  CHECK_NOTHROW(params.validate());
  params.noise_power = 0.0;
  CHECK_THROWS_AS(params.validate(), std::invalid_argument);
}
