#pragma once

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "skyrelay/net_model.hpp"
#include "skyrelay/trust.hpp"

namespace skyrelay {

struct ScreeningParams {
  int beam_width = 60;
  int max_hops = 15;
  double theta_sd = 0.5;          // minimum security degree for a relay
  double energy_threshold = 1.0;  // J, minimum residual energy for a relay

  void validate() const {
    if (beam_width < 1) throw std::invalid_argument("ScreeningParams: beam_width < 1");
    if (max_hops < 1) throw std::invalid_argument("ScreeningParams: max_hops < 1");
  }
};

struct CandidatePath {
  std::vector<int> nodes;  // source first; simple; consecutive nodes adjacent
  double avg_sd = 0.0;     // mean security degree over all path nodes
  bool complete = false;   // ends at the destination
};

// Ordering used everywhere a beam is truncated: higher score first, then
// fewer hops, then lexicographic node sequence. Total order on distinct
// paths, which keeps every screening output deterministic.
inline bool path_order(const CandidatePath& a, const CandidatePath& b) {
  if (a.avg_sd != b.avg_sd) return a.avg_sd > b.avg_sd;
  if (a.nodes.size() != b.nodes.size()) return a.nodes.size() < b.nodes.size();
  return a.nodes < b.nodes;
}

inline double score_path(const std::vector<int>& nodes, const TrustState& trust,
                         const NetworkGraph& graph) {
  if (nodes.empty()) throw std::invalid_argument("score_path: empty path");
  double sum = 0.0;
  for (int id : nodes) sum += trust.security_degree(graph, id);
  return sum / static_cast<double>(nodes.size());
}

// Candidate must make strict progress toward the destination (or be the
// destination). Strictness guarantees simple paths and termination.
inline bool directional_filter(const NetworkGraph& graph, int current, int candidate,
                               int destination) {
  if (candidate == destination) return true;
  const Vec2& dest = graph.nodes[destination].pos;
  return distance(graph.nodes[candidate].pos, dest) < distance(graph.nodes[current].pos, dest);
}

// Delay of traversing u -> v: self-authentication at the sender plus
// transmission plus propagation; the final hop into the destination carries
// no authentication term.
inline double edge_delay(const NetworkGraph& graph, const ChannelParams& params, int u, int v,
                         double payload_bits) {
  const double d = distance(graph.nodes[u], graph.nodes[v]);
  const double rate = shannon_rate(params.bandwidth, snr(params, path_loss_db(d, params.frequency)).linear);
  const double proc = (v == graph.destination) ? 0.0 : graph.nodes[u].proc_time;
  return hop_delay(payload_bits, rate, d, proc);
}

// Combined transmit + receive energy of one hop. Distance-independent under
// the free-space model with uniform power, so this varies only with payload.
inline double edge_energy(const ChannelParams& params, double payload_bits) {
  const HopEnergy e = hop_energy(payload_bits, params);
  return e.tx + e.rx;
}

namespace detail {

// Per-extension feasibility: in-range link with adequate SNR, strict
// progress, and (for relays) the trust and energy floors. `hops_after` is
// the hop budget left once the candidate is appended.
inline bool extension_feasible(const NetworkGraph& graph, const ChannelParams& params,
                               const ScreeningParams& screening,
                               const std::vector<double>& security_degrees,
                               const std::vector<bool>& excluded, int u, int v, int destination,
                               int hops_after) {
  if (!excluded.empty() && excluded[v]) return false;
  if (!directional_filter(graph, u, v, destination)) return false;
  const double d = distance(graph.nodes[u], graph.nodes[v]);
  if (snr(params, path_loss_db(d, params.frequency)).db < params.snr_min_db) return false;
  if (v == destination) return true;
  if (security_degrees[v] < screening.theta_sd) return false;
  if (graph.nodes[v].residual_energy < screening.energy_threshold) return false;
  // Prune branches that cannot reach the destination in the remaining hops.
  const double dist_to_go = distance(graph.nodes[v].pos, graph.nodes[destination].pos);
  if (static_cast<double>(hops_after) * graph.o_max < dist_to_go) return false;
  return true;
}

inline std::vector<double> all_security_degrees(const NetworkGraph& graph,
                                                const TrustState& trust) {
  std::vector<double> sd(graph.node_count());
  for (int id = 0; id < graph.node_count(); ++id) sd[id] = trust.security_degree(graph, id);
  return sd;
}

}  // namespace detail

// One beam-search step: extends every partial path to its feasible
// neighbors, scores the extensions, and keeps the top beam_width.
inline std::vector<CandidatePath> expand_beam(const std::vector<CandidatePath>& beam,
                                              const NetworkGraph& graph, const TrustState& trust,
                                              const ChannelParams& params,
                                              const ScreeningParams& screening, int destination,
                                              const std::vector<bool>& excluded, int hops_after) {
  const std::vector<double> sd = detail::all_security_degrees(graph, trust);
  std::vector<CandidatePath> candidates;
  for (const CandidatePath& path : beam) {
    if (path.complete) continue;
    const int head = path.nodes.back();
    for (int v : graph.neighbors(head)) {
      if (std::find(path.nodes.begin(), path.nodes.end(), v) != path.nodes.end()) continue;
      if (!detail::extension_feasible(graph, params, screening, sd, excluded, head, v,
                                      destination, hops_after)) {
        continue;
      }
      CandidatePath extended;
      extended.nodes = path.nodes;
      extended.nodes.push_back(v);
      extended.complete = (v == destination);
      double sum = 0.0;
      for (int id : extended.nodes) sum += sd[id];
      extended.avg_sd = sum / static_cast<double>(extended.nodes.size());
      candidates.push_back(std::move(extended));
    }
  }
  std::sort(candidates.begin(), candidates.end(), path_order);
  if (static_cast<int>(candidates.size()) > screening.beam_width) {
    candidates.resize(screening.beam_width);
  }
  return candidates;
}

// The union of the screened candidate paths: the action-space substrate for
// the learning agents. Edges are directed as traversed, which makes the
// subgraph acyclic (every hop strictly approaches the destination).
struct ScreenedSubgraph {
  int source = -1;
  int destination = -1;
  double payload_bits = 0.0;
  std::vector<int> v_opt;                       // sorted
  std::vector<std::pair<int, int>> e_opt;       // directed, sorted
  std::vector<CandidatePath> paths;             // complete, best score first
  // Reward normalization bounds over e_opt, frozen at construction.
  double delay_min = 0.0, delay_max = 0.0;
  double energy_min = 0.0, energy_max = 0.0;

  bool contains_node(int id) const {
    return std::binary_search(v_opt.begin(), v_opt.end(), id);
  }

  bool contains_edge(int u, int v) const {
    return std::binary_search(e_opt.begin(), e_opt.end(), std::make_pair(u, v));
  }

  std::vector<int> successors(int u) const {
    std::vector<int> out;
    auto it = std::lower_bound(e_opt.begin(), e_opt.end(), std::make_pair(u, -1));
    for (; it != e_opt.end() && it->first == u; ++it) out.push_back(it->second);
    return out;
  }

  // Directed reachability of the destination from `from`.
  bool reachable(int from) const {
    if (from == destination) return true;
    if (!contains_node(from)) return false;
    std::vector<int> stack{from};
    std::vector<int> seen;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v : successors(u)) {
        if (v == destination) return true;
        if (std::find(seen.begin(), seen.end(), v) == seen.end()) {
          seen.push_back(v);
          stack.push_back(v);
        }
      }
    }
    return false;
  }
};

namespace detail {

// Rebuilds node/edge sets from the path list; normalizer bounds are
// computed only when `refresh_bounds` (pruning keeps the frozen ones).
inline void assemble_subgraph(ScreenedSubgraph& sub, const NetworkGraph& graph,
                              const ChannelParams& params, bool refresh_bounds) {
  sub.v_opt.clear();
  sub.e_opt.clear();
  for (const CandidatePath& path : sub.paths) {
    for (int id : path.nodes) sub.v_opt.push_back(id);
    for (std::size_t k = 0; k + 1 < path.nodes.size(); ++k) {
      sub.e_opt.emplace_back(path.nodes[k], path.nodes[k + 1]);
    }
  }
  std::sort(sub.v_opt.begin(), sub.v_opt.end());
  sub.v_opt.erase(std::unique(sub.v_opt.begin(), sub.v_opt.end()), sub.v_opt.end());
  std::sort(sub.e_opt.begin(), sub.e_opt.end());
  sub.e_opt.erase(std::unique(sub.e_opt.begin(), sub.e_opt.end()), sub.e_opt.end());

  if (refresh_bounds && !sub.e_opt.empty()) {
    sub.delay_min = sub.energy_min = 1e300;
    sub.delay_max = sub.energy_max = -1e300;
    for (const auto& [u, v] : sub.e_opt) {
      const double t = edge_delay(graph, params, u, v, sub.payload_bits);
      const double e = edge_energy(params, sub.payload_bits);
      sub.delay_min = std::min(sub.delay_min, t);
      sub.delay_max = std::max(sub.delay_max, t);
      sub.energy_min = std::min(sub.energy_min, e);
      sub.energy_max = std::max(sub.energy_max, e);
    }
  }
}

}  // namespace detail

// Beam-search path screening from source to destination. Partial paths are
// expanded hop by hop under the feasibility filters; completed paths are
// harvested from each beam. Throws InfeasibleError when nothing reaches the
// destination within the hop budget.
inline ScreenedSubgraph beam_search(const NetworkGraph& graph, const TrustState& trust,
                                    const ChannelParams& params, const ScreeningParams& screening,
                                    int source, int destination, double payload_bits,
                                    const std::vector<bool>& excluded = {}) {
  screening.validate();
  if (source == destination) {
    throw std::invalid_argument("beam_search: source equals destination");
  }
  if (source < 0 || source >= graph.node_count() || destination < 0 ||
      destination >= graph.node_count()) {
    throw std::invalid_argument("beam_search: node id out of range");
  }

  ScreenedSubgraph sub;
  sub.source = source;
  sub.destination = destination;
  sub.payload_bits = payload_bits;

  std::vector<CandidatePath> beam{{{source}, 0.0, false}};
  beam[0].avg_sd = score_path(beam[0].nodes, trust, graph);

  for (int hop = 1; hop <= screening.max_hops && !beam.empty(); ++hop) {
    beam = expand_beam(beam, graph, trust, params, screening, destination, excluded,
                       screening.max_hops - hop);
    auto complete_begin = std::stable_partition(
        beam.begin(), beam.end(), [](const CandidatePath& p) { return !p.complete; });
    for (auto it = complete_begin; it != beam.end(); ++it) sub.paths.push_back(std::move(*it));
    beam.erase(complete_begin, beam.end());
  }

  if (sub.paths.empty()) {
    throw InfeasibleError("beam_search: no feasible path from " + std::to_string(source) +
                          " to " + std::to_string(destination));
  }
  std::sort(sub.paths.begin(), sub.paths.end(), path_order);
  detail::assemble_subgraph(sub, graph, params, /*refresh_bounds=*/true);
  return sub;
}

// Drops every candidate path that touches an attacked node and rebuilds the
// node/edge sets from the survivors. An empty path list is a reported state
// (the environment reacts by re-screening), not an error. Normalizer bounds
// stay frozen so rewards remain comparable across the episode.
inline ScreenedSubgraph prune_subgraph(const ScreenedSubgraph& sub, const NetworkGraph& graph,
                                       const ChannelParams& params,
                                       const std::vector<bool>& attacked) {
  ScreenedSubgraph pruned = sub;
  pruned.paths.clear();
  for (const CandidatePath& path : sub.paths) {
    bool hit = false;
    for (int id : path.nodes) {
      if (attacked[id]) {
        hit = true;
        break;
      }
    }
    if (!hit) pruned.paths.push_back(path);
  }
  detail::assemble_subgraph(pruned, graph, params, /*refresh_bounds=*/false);
  return pruned;
}

// Inspection dump: one line per candidate path (score, hops, node sequence),
// then the node set and the directed edge set.
inline void write_subgraph(const ScreenedSubgraph& sub, std::ostream& out) {
  out.precision(17);
  for (const CandidatePath& path : sub.paths) {
    out << "path," << path.avg_sd << ',' << path.nodes.size() - 1;
    for (int id : path.nodes) out << ',' << id;
    out << '\n';
  }
  out << "v_opt";
  for (int id : sub.v_opt) out << ',' << id;
  out << '\n';
  for (const auto& [u, v] : sub.e_opt) out << "e_opt," << u << ',' << v << '\n';
}

}  // namespace skyrelay
