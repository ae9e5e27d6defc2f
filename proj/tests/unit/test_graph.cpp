#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <map>
#include <sstream>
#include <vector>

#include "sst/errors.hpp"
#include "sst/graph.hpp"
#include "sst/rng.hpp"

namespace {

using namespace sst::graph;

// Naive reference values: Floyd-Warshall distances and O(n^3) triple counts.
struct Reference {
  std::uint32_t diameter = 0;
  double average_path_length = 0.0;
  double clustering = 0.0;
  std::uint64_t triangles = 0;
};

Reference brute_force(const SocialGraph& g) {
  const std::size_t n = g.node_count();
  constexpr std::uint32_t kInf = std::numeric_limits<std::uint32_t>::max() / 2;
  std::vector<std::vector<std::uint32_t>> d(n, std::vector<std::uint32_t>(n, kInf));
  for (std::size_t i = 0; i < n; ++i) {
    d[i][i] = 0;
    for (NodeId j : g.neighbors(static_cast<NodeId>(i))) d[i][j] = 1;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);

  Reference r;
  double sum = 0.0;
  std::uint64_t pairs = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && d[i][j] < kInf) {
        r.diameter = std::max(r.diameter, d[i][j]);
        sum += d[i][j];
        ++pairs;
      }
  r.average_path_length = pairs ? sum / static_cast<double>(pairs) : 0.0;

  double cc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto nb = g.neighbors(static_cast<NodeId>(i));
    if (nb.size() < 2) continue;
    std::uint64_t closed = 0;
    for (std::size_t a = 0; a < nb.size(); ++a)
      for (std::size_t b = a + 1; b < nb.size(); ++b) closed += g.has_edge(nb[a], nb[b]) ? 1 : 0;
    cc += static_cast<double>(closed) / (nb.size() * (nb.size() - 1) / 2.0);
  }
  r.clustering = n ? cc / static_cast<double>(n) : 0.0;

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k)
        if (g.has_edge(i, j) && g.has_edge(j, k) && g.has_edge(i, k)) ++r.triangles;
  return r;
}

SocialGraph complete(std::size_t n) {
  SocialGraph g(n);
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v) g.add_edge(u, v);
  return g;
}

TEST(SocialGraph, EdgesAreUndirectedAndUnique) {
  SocialGraph g(3);
  EXPECT_TRUE(g.add_edge(0, 1));
  EXPECT_FALSE(g.add_edge(1, 0));
  EXPECT_TRUE(g.has_edge(1, 0));
  EXPECT_EQ(g.edge_count(), 1u);
  EXPECT_THROW(g.add_edge(2, 2), std::invalid_argument);
  EXPECT_THROW(g.add_edge(0, 3), std::out_of_range);
}

TEST(GraphProperties, CompleteGraphK4) {
  const auto p = graph_properties(complete(4));
  EXPECT_DOUBLE_EQ(p.average_clustering_coefficient, 1.0);
  EXPECT_EQ(p.diameter, 1u);
  EXPECT_EQ(p.total_triangles, 4u);
  EXPECT_DOUBLE_EQ(p.average_degree, 3.0);
}

TEST(GraphProperties, PathOfThree) {
  SocialGraph g(3);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  const auto p = graph_properties(g);
  EXPECT_DOUBLE_EQ(p.average_clustering_coefficient, 0.0);
  EXPECT_EQ(p.diameter, 2u);
  EXPECT_NEAR(p.average_path_length, 4.0 / 3.0, 1e-12);
  EXPECT_TRUE(p.connected);
}

TEST(GraphProperties, DisconnectedReportsLargestComponent) {
  SocialGraph g(5);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  g.add_edge(3, 4);
  const auto p = graph_properties(g);
  EXPECT_FALSE(p.connected);
  EXPECT_EQ(p.largest_component_size, 3u);
  EXPECT_EQ(p.diameter, 2u);
}

TEST(GraphProperties, MatchesBruteForceOnGeneratedGraphs) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    ToParams to;
    to.initial_contacts = {{1, 0.5}, {2, 0.5}};
    to.secondary_mean = 1.5;
    const std::vector<SocialGraph> graphs{generate_toivonen(200, to, seed),
                                          generate_ba(150, BaParams{3, 2}, seed)};
    for (const auto& g : graphs) {
      const auto p = graph_properties(g);
      const auto r = brute_force(g);
      EXPECT_EQ(p.diameter, r.diameter);
      EXPECT_NEAR(p.average_path_length, r.average_path_length, 1e-12);
      EXPECT_NEAR(p.average_clustering_coefficient, r.clustering, 1e-12);
      EXPECT_EQ(p.total_triangles, r.triangles);
      EXPECT_EQ(p.edge_count, g.edge_count());
      EXPECT_NEAR(p.average_degree, 2.0 * g.edge_count() / g.node_count(), 1e-12);
      EXPECT_GE(static_cast<double>(p.diameter), std::ceil(p.average_path_length) - 1e-12);
    }
  }
}

TEST(Ba, EdgeCountIsExact) {
  // ring of m0 nodes plus m edges per new node
  const auto g = generate_ba(1000, BaParams{5, 5}, 3);
  EXPECT_EQ(g.edge_count(), 5u + 5u * (1000u - 5u));
  const auto h = generate_ba(10000, BaParams{5, 5}, 3);
  EXPECT_NEAR(static_cast<double>(h.edge_count()), 49985.0, 100.0);
}

TEST(Ba, NodeCountEqualToSeedGraphIsTheRing) {
  const auto g = generate_ba(5, BaParams{5, 2}, 1);
  EXPECT_EQ(g.edge_count(), 5u);
  for (NodeId u = 0; u < 5; ++u) EXPECT_EQ(g.degree(u), 2u);
}

TEST(Ba, RejectsBadParameters) {
  EXPECT_THROW(generate_ba(10, BaParams{3, 4}, 1), sst::ConfigError);
  EXPECT_THROW(generate_ba(10, BaParams{1, 1}, 1), sst::ConfigError);
}

TEST(Ba, AttachmentFrequenciesFollowDegrees) {
  // n=4, m0=2, m=1: node 2 joins the single edge 0-1, node 3 then sees
  // degrees that depend on node 2's choice.
  std::map<std::pair<NodeId, NodeId>, int> seen;
  const int runs = 10000;
  for (int s = 0; s < runs; ++s) {
    const auto g = generate_ba(4, BaParams{2, 1}, static_cast<std::uint64_t>(s) + 1);
    ASSERT_EQ(g.edge_count(), 3u);
    ASSERT_EQ(g.degree(3), 1u);
    const NodeId t2 = g.neighbors(2)[0];  // sorted, and the target is 0 or 1
    const NodeId t3 = g.neighbors(3)[0];
    ++seen[{t2, t3}];
  }
  // P(t2) = 1/2 each; then the target of 2 has degree 2 of total 4.
  const std::map<std::pair<NodeId, NodeId>, double> expected{
      {{0, 0}, 0.25}, {{0, 1}, 0.125}, {{0, 2}, 0.125}, {{1, 1}, 0.25}, {{1, 0}, 0.125}, {{1, 2}, 0.125}};
  double chi = 0.0;
  for (const auto& [k, p] : expected) {
    const double e = p * runs;
    const double o = seen.count(k) ? seen[k] : 0;
    chi += (o - e) * (o - e) / e;
  }
  for (const auto& [k, c] : seen) ASSERT_TRUE(expected.count(k)) << k.first << "," << k.second;
  EXPECT_LT(chi, 20.52);  // 5 dof, 0.999 quantile
}

TEST(Ba, HubsEmerge) {
  const auto g = generate_ba(5000, BaParams{5, 5}, 2);
  std::size_t max_degree = 0;
  for (NodeId u = 0; u < g.node_count(); ++u) max_degree = std::max(max_degree, g.degree(u));
  EXPECT_GT(max_degree, 100u);
}

TEST(Toivonen, TreeWithoutSecondaryContacts) {
  ToParams to;
  to.initial_contacts = {{1, 1.0}};
  to.secondary_mean = 0.0;
  const auto g = generate_toivonen(300, to, 4);
  EXPECT_EQ(g.edge_count(), 299u);
  EXPECT_EQ(graph_properties(g).total_triangles, 0u);
}

TEST(Toivonen, ClusteringAgainstBruteForce) {
  ToParams to;
  to.initial_contacts = {{2, 1.0}};
  to.secondary_mean = 1.5;
  const auto g = generate_toivonen(50, to, 8);
  EXPECT_NEAR(graph_properties(g).average_clustering_coefficient, brute_force(g).clustering, 1e-12);
}

TEST(Toivonen, MoreClusteredThanBaAtSimilarDegree) {
  const auto to = generate_toivonen(10000, ToParams{}, 5);
  const auto ba = generate_ba(10000, BaParams{}, 5);
  const auto pt = graph_properties(to);
  const auto pb = graph_properties(ba);
  EXPECT_NEAR(pt.average_degree, pb.average_degree, 0.5);
  EXPECT_GT(pt.average_clustering_coefficient, 10 * pb.average_clustering_coefficient);
}

TEST(Toivonen, RejectsBadParameters) {
  EXPECT_THROW(generate_toivonen(100, ToParams{{}, 1.0}, 1), sst::ConfigError);
  EXPECT_THROW(generate_toivonen(3, ToParams{{{2, 1.0}}, 1.0}, 1), sst::ConfigError);
}

TEST(SatPeers, ExactCount) {
  const auto g = generate_ba(10000, BaParams{}, 1);
  EXPECT_EQ(assign_sat_peers(g, 0.3, 2).sat_count(), 3000u);
  EXPECT_EQ(assign_sat_peers(g, 0.0, 2).sat_count(), 0u);
  EXPECT_EQ(assign_sat_peers(g, 1.0, 2).sat_count(), 10000u);
  EXPECT_THROW(assign_sat_peers(g, 1.5, 2), sst::ConfigError);
}

TEST(PNsn, Endpoints) {
  const auto g = generate_ba(2000, BaParams{}, 1);
  EXPECT_DOUBLE_EQ(p_nsn(assign_sat_peers(g, 0.0, 1)), 1.0);
  EXPECT_DOUBLE_EQ(p_nsn(assign_sat_peers(g, 1.0, 1)), 0.0);
}

TEST(PNsn, TriangleWithOneSatNode) {
  auto g = complete(3);
  g.set_sat_enabled(1, true);
  EXPECT_NEAR(p_nsn(g), 1.0 / 3.0, 1e-15);
}

TEST(PNsn, BruteForceCount) {
  const auto g = assign_sat_peers(generate_toivonen(500, ToParams{}, 3), 0.2, 4);
  std::size_t lonely = 0;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    bool any = false;
    for (NodeId v : g.neighbors(u)) any |= g.sat_enabled(v);
    lonely += any ? 0 : 1;
  }
  EXPECT_DOUBLE_EQ(p_nsn(g), static_cast<double>(lonely) / g.node_count());
}

TEST(PNsn, NonIncreasingInRatioOnPairedSeeds) {
  // Paired seeds: same graph and same sat stream, growing ratio.
  int violations = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto g = generate_ba(2000, BaParams{}, seed);
    double prev = 1.0;
    for (int k = 0; k <= 10; ++k) {
      const double p = p_nsn(assign_sat_peers(g, k / 10.0, seed + 100));
      if (p > prev + 1e-12) ++violations;
      prev = p;
    }
  }
  EXPECT_EQ(violations, 0);
}

TEST(Generators, Deterministic) {
  EXPECT_EQ(generate_ba(500, BaParams{}, 9), generate_ba(500, BaParams{}, 9));
  EXPECT_EQ(generate_toivonen(500, ToParams{}, 9), generate_toivonen(500, ToParams{}, 9));
  EXPECT_NE(generate_ba(500, BaParams{}, 9), generate_ba(500, BaParams{}, 10));
}

TEST(EdgeList, RoundTrip) {
  const auto g = assign_sat_peers(generate_ba(100, BaParams{}, 4), 0.3, 5);
  std::stringstream s;
  export_edge_list(g, s);
  EXPECT_EQ(import_edge_list(s), g);
}

TEST(EdgeList, EmptyAndTriangle) {
  std::stringstream e;
  export_edge_list(SocialGraph{}, e);
  EXPECT_EQ(import_edge_list(e).node_count(), 0u);

  std::stringstream t;
  export_edge_list(complete(3), t);
  int edge_lines = 0;
  std::string line;
  while (std::getline(t, line)) edge_lines += !line.empty() && line[0] != '#';
  EXPECT_EQ(edge_lines, 3);
}

TEST(EdgeList, MalformedLineReportsLine) {
  std::stringstream s("# nodes=3\n0 1\n1 x\n");
  try {
    import_edge_list(s);
    FAIL() << "expected ParseError";
  } catch (const sst::ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

}  // namespace
