#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace sst::graph {

using NodeId = std::uint32_t;

// Undirected simple graph whose edges are the buddy relation. Each node also
// carries a flag telling whether it can receive satellite broadcasts.
class SocialGraph {
 public:
  SocialGraph() = default;
  explicit SocialGraph(std::size_t node_count);

  std::size_t node_count() const { return adjacency_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  bool empty() const { return adjacency_.empty(); }

  // Returns false when the edge already exists. Throws std::out_of_range for
  // unknown ids and std::invalid_argument for self-loops.
  bool add_edge(NodeId u, NodeId v);
  bool has_edge(NodeId u, NodeId v) const;

  // Sorted ascending.
  std::span<const NodeId> neighbors(NodeId u) const { return adjacency_[u]; }
  std::size_t degree(NodeId u) const { return adjacency_[u].size(); }

  bool sat_enabled(NodeId u) const { return sat_[u] != 0; }
  void set_sat_enabled(NodeId u, bool enabled) { sat_[u] = enabled ? 1 : 0; }
  std::size_t sat_count() const;
  std::size_t sat_neighbor_count(NodeId u) const;

  // Each undirected edge once, as (u, v) with u < v, in ascending order.
  std::vector<std::pair<NodeId, NodeId>> edges() const;

  friend bool operator==(const SocialGraph&, const SocialGraph&) = default;

 private:
  std::vector<std::vector<NodeId>> adjacency_;
  std::vector<std::uint8_t> sat_;
  std::size_t edge_count_ = 0;
};

struct BaParams {
  std::size_t initial_nodes = 5;   // m0, wired as a ring
  std::size_t edges_per_node = 5;  // m
};

struct ToParams {
  // Distribution over the number of initial contacts: (count, weight).
  // Defaults calibrated at n = 10,000: average degree ~9.95, clustering
  // ~0.58, ~71k triangles, and a degree spread that keeps P(NSN) above BA's
  // even at low dish ratios.
  std::vector<std::pair<std::size_t, double>> initial_contacts = {{1, 0.9}, {3, 0.1}};
  // Mean number of secondary contacts taken from each initial contact.
  double secondary_mean = 3.5;
};

// Barabasi-Albert preferential attachment. Each new node picks m distinct
// targets, each draw proportional to the target's degree among the targets
// not yet picked.
SocialGraph generate_ba(std::size_t n, const BaParams& params, std::uint64_t seed);

// Toivonen growth model: r initial contacts chosen uniformly, then a random
// number of each contact's neighbors.
SocialGraph generate_toivonen(std::size_t n, const ToParams& params, std::uint64_t seed);

// Flags exactly round(ratio * n) nodes, uniformly without replacement, and
// clears the flag on all others.
SocialGraph assign_sat_peers(SocialGraph graph, double ratio, std::uint64_t seed);

// Fraction of all nodes with no sat-enabled buddy. A node's own flag does not
// count.
double p_nsn(const SocialGraph& graph);

struct GraphProperties {
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  double average_degree = 0.0;
  std::uint32_t diameter = 0;
  double average_clustering_coefficient = 0.0;
  double average_path_length = 0.0;
  std::uint64_t total_triangles = 0;
  // Path metrics cover the largest connected component only; `connected`
  // is false when that component is not the whole graph.
  bool connected = true;
  std::size_t largest_component_size = 0;
};

GraphProperties graph_properties(const SocialGraph& graph);

// Text format: "# nodes=<n>", one "u v" line per edge, then "# sat" and the
// flagged node ids one per line.
void export_edge_list(const SocialGraph& graph, std::ostream& out);
SocialGraph import_edge_list(std::istream& in);

}  // namespace sst::graph
