#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "skyrelay/rng.hpp"

namespace skyrelay {

inline constexpr double kLightSpeed = 299792458.0;  // m/s

// Scenario that cannot produce a valid route (disconnected topology, no
// path surviving the feasibility filters, ...). Distinct from config errors
// and from programming-contract violations.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke an API precondition (invalid action index, unverified
// ledger, ...). Maps to exit code 3 in the CLI.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Vec2& a, const Vec2& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

struct UavNode {
  int id = 0;
  Vec2 pos;
  double residual_energy = 500.0;  // J
  double proc_time = 0.01;         // s, per-hop self-authentication
  double compute_load = 1e6;       // cycles, controller security pass
};

inline double distance(const UavNode& a, const UavNode& b) {
  return distance(a.pos, b.pos);
}

/// Radio parameters shared by every link. Values are uniform across the
/// network; per-link variation is not modelled.
struct ChannelParams {
  double frequency = 2.4e9;      // Hz
  double bandwidth = 1e6;        // Hz
  double tx_power = 0.1;         // W
  double noise_power = 1e-13;    // W
  double snr_min_db = 5.0;       // link feasibility threshold
  double circuit_energy = 5e-8;  // J/bit

  void validate() const {
    if (frequency <= 0 || bandwidth <= 0 || tx_power <= 0 || noise_power <= 0 ||
        circuit_energy <= 0) {
      throw std::invalid_argument("ChannelParams: all physical constants must be positive");
    }
  }
};

/// Free-space path loss in dB: 20 log10(d) + 20 log10(f) - 147.55.
inline double path_loss_db(double distance_m, double frequency_hz) {
  if (distance_m <= 0.0) {
    throw std::invalid_argument("path_loss_db: distance must be positive (co-located link)");
  }
  if (frequency_hz <= 0.0) {
    throw std::invalid_argument("path_loss_db: frequency must be positive");
  }
  return 20.0 * std::log10(distance_m) + 20.0 * std::log10(frequency_hz) - 147.55;
}

struct Snr {
  double linear = 0.0;
  double db = 0.0;
};

inline Snr snr(const ChannelParams& params, double path_loss_db_value) {
  const double linear =
      params.tx_power * std::pow(10.0, -path_loss_db_value / 10.0) / params.noise_power;
  return {linear, 10.0 * std::log10(linear)};
}

inline double shannon_rate(double bandwidth_hz, double snr_linear) {
  return bandwidth_hz * std::log2(1.0 + snr_linear);
}

struct HopEnergy {
  double tx = 0.0;  // J
  double rx = 0.0;  // J
};

// Transmit side pays the circuitry term plus radiated power over the
// send duration L/B; receive side pays the circuitry term only.
inline HopEnergy hop_energy(double payload_bits, const ChannelParams& params) {
  const double circuitry = payload_bits * params.circuit_energy;
  return {circuitry + params.tx_power * (payload_bits / params.bandwidth), circuitry};
}

// Per-hop latency: self-authentication + transmission + propagation.
inline double hop_delay(double payload_bits, double rate_bps, double distance_m,
                        double proc_time_s) {
  if (rate_bps <= 0.0) {
    throw InfeasibleError("hop_delay: zero rate, link should have been filtered by SNR");
  }
  return proc_time_s + payload_bits / rate_bps + distance_m / kLightSpeed;
}

struct LinkMetrics {
  double distance = 0.0;
  double path_loss_db = 0.0;
  double snr_linear = 0.0;
  double snr_db = 0.0;
  double rate = 0.0;       // bit/s
  double tx_energy = 0.0;  // J, at the requested payload
  double rx_energy = 0.0;
  double hop_delay = 0.0;  // s
  bool feasible = false;   // snr_db >= snr_min_db
};

struct NetworkGraph {
  std::vector<UavNode> nodes;  // index == id; the destination is one of them
  int destination = -1;
  double area_size = 0.0;  // side length M of the deployment square
  double o_max = 0.0;      // max link range

  int node_count() const { return static_cast<int>(nodes.size()); }
  int uav_count() const { return node_count() - 1; }

  const std::vector<int>& neighbors(int id) const { return adjacency_[id]; }

  bool adjacent(int i, int j) const {
    const auto& n = adjacency_[i];
    return std::binary_search(n.begin(), n.end(), j);
  }

  int max_degree() const {
    std::size_t d = 0;
    for (const auto& n : adjacency_) d = std::max(d, n.size());
    return static_cast<int>(d);
  }

  void rebuild_adjacency() {
    adjacency_.assign(nodes.size(), {});
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      for (std::size_t j = i + 1; j < nodes.size(); ++j) {
        if (distance(nodes[i], nodes[j]) <= o_max) {
          adjacency_[i].push_back(static_cast<int>(j));
          adjacency_[j].push_back(static_cast<int>(i));
        }
      }
    }
    for (auto& n : adjacency_) std::sort(n.begin(), n.end());
  }

  void set_edges(const std::vector<std::pair<int, int>>& edges) {
    adjacency_.assign(nodes.size(), {});
    for (const auto& [i, j] : edges) {
      adjacency_[i].push_back(j);
      adjacency_[j].push_back(i);
    }
    for (auto& n : adjacency_) std::sort(n.begin(), n.end());
  }

  std::vector<int> component_of(int start) const {
    std::vector<bool> seen(nodes.size(), false);
    std::vector<int> stack{start};
    std::vector<int> component{start};
    seen[start] = true;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v : adjacency_[u]) {
        if (!seen[v]) {
          seen[v] = true;
          component.push_back(v);
          stack.push_back(v);
        }
      }
    }
    std::sort(component.begin(), component.end());
    return component;
  }

  bool connected() const {
    return !nodes.empty() && component_of(0).size() == nodes.size();
  }

 private:
  std::vector<std::vector<int>> adjacency_;
};

/// One-shot bundle of every per-link quantity for an existing edge.
inline LinkMetrics link_metrics(const NetworkGraph& graph, const ChannelParams& params, int i,
                                int j, double payload_bits) {
  if (!graph.adjacent(i, j)) {
    throw std::invalid_argument("link_metrics: nodes " + std::to_string(i) + " and " +
                                std::to_string(j) + " are not adjacent");
  }
  LinkMetrics m;
  m.distance = distance(graph.nodes[i], graph.nodes[j]);
  m.path_loss_db = path_loss_db(m.distance, params.frequency);
  const Snr s = snr(params, m.path_loss_db);
  m.snr_linear = s.linear;
  m.snr_db = s.db;
  m.rate = shannon_rate(params.bandwidth, m.snr_linear);
  const HopEnergy e = hop_energy(payload_bits, params);
  m.tx_energy = e.tx;
  m.rx_energy = e.rx;
  m.hop_delay = hop_delay(payload_bits, m.rate, m.distance, graph.nodes[i].proc_time);
  m.feasible = m.snr_db >= params.snr_min_db;
  return m;
}

struct TopologyOptions {
  double initial_energy = 500.0;  // J per UAV
  double proc_time = 0.01;        // s
  double compute_load = 1e6;      // cycles
  double min_separation = 1.0;    // m, keeps the path-loss model off its singularity
  int max_retries = 100;          // regenerations before giving up on connectivity
};

// n UAVs uniform in [0, m]^2 plus the destination node at dest_pos (last id).
// Regenerates with a derived seed until the destination's connected
// component holds at least half the swarm, so a usable relay source exists.
// At the default densities the full graph is usually fragmented, which is
// why the rule is about the destination's component and not the whole graph.
inline NetworkGraph generate_topology(std::uint64_t seed, int n, double m, double o_max,
                                      Vec2 dest_pos, const TopologyOptions& opts = {}) {
  if (n < 2) throw std::invalid_argument("generate_topology: need at least 2 UAVs");
  if (m <= 0 || o_max <= 0) {
    throw std::invalid_argument("generate_topology: area and range must be positive");
  }
  const int required = std::max(2, n / 2);

  for (int attempt = 0; attempt < opts.max_retries; ++attempt) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(attempt)));
    NetworkGraph graph;
    graph.area_size = m;
    graph.o_max = o_max;
    graph.nodes.reserve(static_cast<std::size_t>(n) + 1);

    bool placed_all = true;
    for (int id = 0; id < n; ++id) {
      Vec2 pos;
      bool ok = false;
      for (int tries = 0; tries < 1000; ++tries) {
        pos = {rng.uniform(0.0, m), rng.uniform(0.0, m)};
        ok = distance(pos, dest_pos) >= opts.min_separation;
        for (const auto& other : graph.nodes) {
          if (distance(pos, other.pos) < opts.min_separation) {
            ok = false;
            break;
          }
        }
        if (ok) break;
      }
      if (!ok) {
        placed_all = false;
        break;
      }
      graph.nodes.push_back({id, pos, opts.initial_energy, opts.proc_time, opts.compute_load});
    }
    if (!placed_all) continue;

    graph.nodes.push_back({n, dest_pos, opts.initial_energy, 0.0, 0.0});
    graph.destination = n;
    graph.rebuild_adjacency();
    const int reachable_uavs =
        static_cast<int>(graph.component_of(graph.destination).size()) - 1;
    if (reachable_uavs >= required) return graph;
  }
  throw InfeasibleError("generate_topology: no connected topology within retry bound");
}

// Default mission source: the UAV farthest from the destination among those
// that can actually reach it.
inline int default_source(const NetworkGraph& graph) {
  int best = -1;
  double best_distance = -1.0;
  for (int id : graph.component_of(graph.destination)) {
    if (id == graph.destination) continue;
    const double d = distance(graph.nodes[id], graph.nodes[graph.destination]);
    if (d > best_distance) {
      best_distance = d;
      best = id;
    }
  }
  if (best < 0) throw InfeasibleError("default_source: destination has no reachable UAV");
  return best;
}

// Plain-text dump: node lines "id,x,y" first, then edge lines "i,j".
inline void write_topology(const NetworkGraph& graph, std::ostream& out) {
  out.precision(17);
  for (const auto& node : graph.nodes) {
    out << node.id << ',' << node.pos.x << ',' << node.pos.y << '\n';
  }
  for (int i = 0; i < graph.node_count(); ++i) {
    for (int j : graph.neighbors(i)) {
      if (i < j) out << i << ',' << j << '\n';
    }
  }
}

// Reads the format written by write_topology. The file stores geometry only:
// the destination is taken to be the highest node id and o_max is recovered
// as the longest stored edge.
inline NetworkGraph read_topology(std::istream& in, const TopologyOptions& opts = {}) {
  NetworkGraph graph;
  std::vector<std::pair<int, int>> edges;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string a, b, c;
    std::getline(fields, a, ',');
    std::getline(fields, b, ',');
    if (std::getline(fields, c, ',')) {
      UavNode node;
      node.id = std::stoi(a);
      node.pos = {std::stod(b), std::stod(c)};
      node.residual_energy = opts.initial_energy;
      node.proc_time = opts.proc_time;
      node.compute_load = opts.compute_load;
      graph.nodes.push_back(node);
    } else {
      edges.emplace_back(std::stoi(a), std::stoi(b));
    }
  }
  if (graph.nodes.empty()) throw std::invalid_argument("read_topology: no node lines");
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    if (graph.nodes[i].id != static_cast<int>(i)) {
      throw std::invalid_argument("read_topology: node ids must be dense and ordered");
    }
  }
  graph.destination = graph.node_count() - 1;
  graph.nodes.back().proc_time = 0.0;
  graph.nodes.back().compute_load = 0.0;
  graph.set_edges(edges);
  for (const auto& [i, j] : edges) {
    graph.o_max = std::max(graph.o_max, distance(graph.nodes[i], graph.nodes[j]));
  }
  for (const auto& node : graph.nodes) {
    graph.area_size = std::max({graph.area_size, node.pos.x, node.pos.y});
  }
  return graph;
}

}  // namespace skyrelay
