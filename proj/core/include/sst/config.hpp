#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sst/graph.hpp"
#include "sst/prefs.hpp"

namespace sst {

enum class GraphModel { kBa, kTo };
enum class WaitDistribution { kExponential, kFixed, kUniform };

struct FeatureFlags {
  bool buddy_help = false;
  bool prefetch = false;
  std::optional<std::uint32_t> prefetch_cap;  // concurrent prefetchers
  bool broadcast = false;
  bool locality_only = false;
  bool credits = true;

  friend bool operator==(const FeatureFlags&, const FeatureFlags&) = default;
};

// Full description of one experiment. Defaults follow the static simulation
// parameters (100 MB files, 100 categories, 10 seeders, 8/1 Mbit links, 30%
// sat-enabled users, 2 h mean wait) at desk scale.
struct ScenarioConfig {
  // Social graph.
  GraphModel graph_model = GraphModel::kBa;
  std::uint32_t node_count = 2000;
  graph::BaParams ba;
  graph::ToParams to;
  double sat_ratio = 0.3;

  // Preferences and mutual influence.
  std::optional<prefs::MiModel> mi_model = prefs::MiModel::kMi1;
  double p_mi = 0.005;  // per node per step
  prefs::ProfileInit profile_init;
  prefs::FeedbackParams feedback;
  double negative_feedback_prob = 0.1;
  prefs::DemandWeights demand_weights;

  FeatureFlags features;

  // Content.
  std::uint32_t categories = 100;
  std::uint32_t catalog_items = 200;
  std::uint64_t file_size_bytes = 100ull << 20;
  std::uint64_t piece_size_bytes = 1ull << 20;
  std::uint32_t seeders = 10;
  std::uint32_t cache_items = 20;

  // Protocol.
  std::int64_t credit_limit = 50;
  std::uint32_t max_helpers = 4;
  std::uint32_t max_connections = 8;   // sources per download
  std::uint32_t upload_slots = 4;      // downloaders one peer serves at once; helpers exempt
  std::uint32_t tracker_sample = 50;
  std::uint32_t broadcast_threshold = 5;
  double broadcast_cooldown_s = 6 * 3600.0;
  std::uint64_t transponder_bps = 36'000'000;
  double buddycast_interval_s = 3600.0;
  double prefetch_interval_s = 600.0;  // how often an idle peer looks for a prefetch

  // Links and arrivals.
  double download_bps = 8e6;
  double upload_bps = 1e6;
  double wait_mean_s = 7200.0;
  WaitDistribution wait_distribution = WaitDistribution::kExponential;

  // Run control.
  double duration_s = 48 * 3600.0;
  std::uint32_t step_s = 60;
  double bucket_s = 3600.0;
  std::uint64_t seed = 1;
  std::uint32_t replications = 1;
  std::string output_dir;
  bool write_transfer_log = true;

  // Completed files stay in a shared cache only when a caching feature is
  // on; otherwise a peer leaves the swarm once its download finishes.
  bool caching() const { return features.prefetch || features.broadcast; }
};

// Every violated constraint, empty when the config is usable.
std::vector<std::string> validate(const ScenarioConfig& config);
// Legal but suspicious settings.
std::vector<std::string> warnings(const ScenarioConfig& config);

}  // namespace sst
