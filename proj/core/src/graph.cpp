#include "sst/graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sst/errors.hpp"
#include "sst/rng.hpp"

namespace sst::graph {

SocialGraph::SocialGraph(std::size_t node_count) : adjacency_(node_count), sat_(node_count, 0) {}

bool SocialGraph::add_edge(NodeId u, NodeId v) {
  if (u >= node_count() || v >= node_count()) {
    throw std::out_of_range("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                            ") references a node outside [0, " + std::to_string(node_count()) + ")");
  }
  if (u == v) throw std::invalid_argument("self-loop on node " + std::to_string(u));
  auto& au = adjacency_[u];
  auto it = std::lower_bound(au.begin(), au.end(), v);
  if (it != au.end() && *it == v) return false;
  au.insert(it, v);
  auto& av = adjacency_[v];
  av.insert(std::lower_bound(av.begin(), av.end(), u), u);
  ++edge_count_;
  return true;
}

bool SocialGraph::has_edge(NodeId u, NodeId v) const {
  if (u >= node_count() || v >= node_count()) return false;
  return std::binary_search(adjacency_[u].begin(), adjacency_[u].end(), v);
}

std::size_t SocialGraph::sat_count() const {
  return static_cast<std::size_t>(std::count(sat_.begin(), sat_.end(), std::uint8_t{1}));
}

std::size_t SocialGraph::sat_neighbor_count(NodeId u) const {
  std::size_t count = 0;
  for (NodeId v : adjacency_[u]) count += sat_[v];
  return count;
}

std::vector<std::pair<NodeId, NodeId>> SocialGraph::edges() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  out.reserve(edge_count_);
  for (NodeId u = 0; u < node_count(); ++u) {
    for (NodeId v : adjacency_[u]) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

SocialGraph generate_ba(std::size_t n, const BaParams& params, std::uint64_t seed) {
  const std::size_t m0 = params.initial_nodes;
  const std::size_t m = params.edges_per_node;
  std::vector<std::string> errors;
  if (m0 < 2) errors.push_back("BA: initial_nodes (m0) must be >= 2");
  if (m < 1) errors.push_back("BA: edges_per_node (m) must be >= 1");
  if (m > m0) errors.push_back("BA: edges_per_node (m) must not exceed initial_nodes (m0)");
  if (n < m0) errors.push_back("BA: node count must be >= initial_nodes (m0)");
  if (!errors.empty()) throw ConfigError(std::move(errors));

  SocialGraph g(n);
  // Every endpoint of every edge, so a uniform pick is degree-proportional.
  std::vector<NodeId> endpoints;
  endpoints.reserve(2 * (m0 + m * (n - m0)));
  auto connect = [&](NodeId u, NodeId v) {
    if (g.add_edge(u, v)) {
      endpoints.push_back(u);
      endpoints.push_back(v);
    }
  };
  for (std::size_t i = 0; i < m0; ++i) {
    connect(static_cast<NodeId>(i), static_cast<NodeId>((i + 1) % m0));
  }

  Rng rng(seed);
  std::vector<NodeId> targets;
  targets.reserve(m);
  for (std::size_t v = m0; v < n; ++v) {
    targets.clear();
    // Rejecting already-picked targets samples from the degree distribution
    // renormalised over the remaining nodes.
    while (targets.size() < m) {
      NodeId t = endpoints[rng.below(endpoints.size())];
      if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
    }
    for (NodeId t : targets) connect(static_cast<NodeId>(v), t);
  }
  return g;
}

namespace {

std::size_t max_initial_contacts(const ToParams& params) {
  std::size_t r = 0;
  for (const auto& [count, weight] : params.initial_contacts) {
    if (weight > 0.0) r = std::max(r, count);
  }
  return r;
}

// Uniform on [0, 2 * mean] with stochastic rounding, so the mean is exact
// even when 2 * mean is not an integer.
std::size_t draw_secondary_count(double mean, Rng& rng) {
  if (mean <= 0.0) return 0;
  const double x = rng.uniform() * 2.0 * mean;
  const double whole = std::floor(x);
  return static_cast<std::size_t>(whole) + (rng.bernoulli(x - whole) ? 1 : 0);
}

}  // namespace

SocialGraph generate_toivonen(std::size_t n, const ToParams& params, std::uint64_t seed) {
  std::vector<std::string> errors;
  std::vector<double> weights;
  for (const auto& [count, weight] : params.initial_contacts) {
    if (weight < 0.0) errors.push_back("TO: negative initial-contact weight");
    weights.push_back(weight);
  }
  const std::size_t r_max = max_initial_contacts(params);
  if (params.initial_contacts.empty() || r_max == 0) {
    errors.push_back("TO: initial-contact distribution is empty");
  }
  if (params.secondary_mean < 0.0) errors.push_back("TO: secondary_mean must be >= 0");
  if (r_max > 0 && n < 2 + r_max) {
    errors.push_back("TO: node count must be >= 2 + max initial contacts");
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));

  // Seed graph: a clique just large enough to offer r_max initial contacts.
  const std::size_t seed_size = r_max + 1;
  SocialGraph g(n);
  for (std::size_t u = 0; u < seed_size; ++u) {
    for (std::size_t v = u + 1; v < seed_size; ++v) {
      g.add_edge(static_cast<NodeId>(u), static_cast<NodeId>(v));
    }
  }

  Rng rng(seed);
  std::vector<NodeId> contacts;
  std::vector<NodeId> candidates;
  for (std::size_t v = seed_size; v < n; ++v) {
    const auto node = static_cast<NodeId>(v);
    const std::size_t r = std::min(params.initial_contacts[rng.weighted_index(weights)].first, v);
    contacts.clear();
    while (contacts.size() < r) {
      auto c = static_cast<NodeId>(rng.below(v));
      if (std::find(contacts.begin(), contacts.end(), c) == contacts.end()) contacts.push_back(c);
    }
    for (NodeId c : contacts) g.add_edge(node, c);

    for (NodeId c : contacts) {
      const std::size_t wanted = draw_secondary_count(params.secondary_mean, rng);
      if (wanted == 0) continue;
      candidates.clear();
      for (NodeId w : g.neighbors(c)) {
        if (w != node && !g.has_edge(node, w)) candidates.push_back(w);
      }
      const std::size_t k = std::min(wanted, candidates.size());
      for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + rng.below(candidates.size() - i);
        std::swap(candidates[i], candidates[j]);
        g.add_edge(node, candidates[i]);
      }
    }
  }
  return g;
}

SocialGraph assign_sat_peers(SocialGraph graph, double ratio, std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw ConfigError("sat ratio must lie in [0, 1]");
  const std::size_t n = graph.node_count();
  const auto flagged = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  std::vector<NodeId> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<NodeId>(i);
  Rng rng(seed);
  for (std::size_t i = 0; i < flagged; ++i) {
    const std::size_t j = i + rng.below(n - i);
    std::swap(order[i], order[j]);
  }
  for (std::size_t i = 0; i < n; ++i) graph.set_sat_enabled(order[i], i < flagged);
  return graph;
}

double p_nsn(const SocialGraph& graph) {
  if (graph.empty()) throw std::invalid_argument("p_nsn: empty graph");
  std::size_t without = 0;
  for (NodeId u = 0; u < graph.node_count(); ++u) {
    if (graph.sat_neighbor_count(u) == 0) ++without;
  }
  return static_cast<double>(without) / static_cast<double>(graph.node_count());
}

namespace {

// Component label per node; returns the label of the largest component
// (smallest label on ties) and its size.
std::pair<std::uint32_t, std::size_t> largest_component(const SocialGraph& g,
                                                        std::vector<std::uint32_t>& label) {
  const std::size_t n = g.node_count();
  constexpr auto kUnset = static_cast<std::uint32_t>(-1);
  label.assign(n, kUnset);
  std::vector<NodeId> queue;
  std::uint32_t best = 0;
  std::size_t best_size = 0;
  std::uint32_t next_label = 0;
  for (NodeId s = 0; s < n; ++s) {
    if (label[s] != kUnset) continue;
    queue.assign(1, s);
    label[s] = next_label;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      for (NodeId w : g.neighbors(queue[head])) {
        if (label[w] == kUnset) {
          label[w] = next_label;
          queue.push_back(w);
        }
      }
    }
    if (queue.size() > best_size) {
      best_size = queue.size();
      best = next_label;
    }
    ++next_label;
  }
  return {best, best_size};
}

}  // namespace

GraphProperties graph_properties(const SocialGraph& g) {
  GraphProperties props;
  const std::size_t n = g.node_count();
  props.node_count = n;
  props.edge_count = g.edge_count();
  if (n == 0) return props;
  props.average_degree = 2.0 * static_cast<double>(g.edge_count()) / static_cast<double>(n);

  // Triangles, each counted once as u < v < w; per-node counts feed the
  // local clustering coefficient.
  std::vector<std::uint64_t> at_node(n, 0);
  for (NodeId u = 0; u < n; ++u) {
    const auto nu = g.neighbors(u);
    for (NodeId v : nu) {
      if (v <= u) continue;
      const auto nv = g.neighbors(v);
      auto a = std::upper_bound(nu.begin(), nu.end(), v);
      auto b = std::upper_bound(nv.begin(), nv.end(), v);
      while (a != nu.end() && b != nv.end()) {
        if (*a < *b) {
          ++a;
        } else if (*b < *a) {
          ++b;
        } else {
          ++props.total_triangles;
          ++at_node[u];
          ++at_node[v];
          ++at_node[*a];
          ++a;
          ++b;
        }
      }
    }
  }
  double clustering_sum = 0.0;
  for (NodeId u = 0; u < n; ++u) {
    const double d = static_cast<double>(g.degree(u));
    if (d >= 2.0) clustering_sum += static_cast<double>(at_node[u]) / (d * (d - 1.0) / 2.0);
  }
  props.average_clustering_coefficient = clustering_sum / static_cast<double>(n);

  std::vector<std::uint32_t> label;
  const auto [component, size] = largest_component(g, label);
  props.largest_component_size = size;
  props.connected = size == n;

  std::vector<NodeId> members;
  members.reserve(size);
  for (NodeId u = 0; u < n; ++u) {
    if (label[u] == component) members.push_back(u);
  }

  // Bit-parallel BFS: 64 sources advance one level per sweep over the edges.
  std::vector<std::uint64_t> visited(n), frontier(n), next(n);
  std::uint64_t distance_sum = 0;
  std::uint32_t diameter = 0;
  for (std::size_t start = 0; start < members.size(); start += 64) {
    const std::size_t batch = std::min<std::size_t>(64, members.size() - start);
    for (NodeId u : members) {
      visited[u] = 0;
      frontier[u] = 0;
    }
    for (std::size_t j = 0; j < batch; ++j) {
      visited[members[start + j]] |= std::uint64_t{1} << j;
      frontier[members[start + j]] |= std::uint64_t{1} << j;
    }
    for (std::uint32_t level = 1;; ++level) {
      bool advanced = false;
      for (NodeId v : members) {
        std::uint64_t reach = 0;
        for (NodeId w : g.neighbors(v)) reach |= frontier[w];
        reach &= ~visited[v];
        next[v] = reach;
      }
      for (NodeId v : members) {
        if (next[v] != 0) {
          visited[v] |= next[v];
          distance_sum += static_cast<std::uint64_t>(level) * std::popcount(next[v]);
          advanced = true;
        }
      }
      if (!advanced) break;
      diameter = std::max(diameter, level);
      std::swap(frontier, next);
    }
  }
  props.diameter = diameter;
  if (size > 1) {
    props.average_path_length =
        static_cast<double>(distance_sum) / (static_cast<double>(size) * static_cast<double>(size - 1));
  }
  return props;
}

}  // namespace sst::graph
