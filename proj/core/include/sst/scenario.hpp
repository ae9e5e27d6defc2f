#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sst/config.hpp"
#include "sst/graph.hpp"
#include "sst/metrics.hpp"
#include "sst/protocol.hpp"
#include "sst/sim.hpp"

namespace sst::scenario {

enum class PresetId { kA, kB, kC, kD, kE, kF, kG, kH, kI };

inline constexpr PresetId kAllPresets[] = {PresetId::kA, PresetId::kB, PresetId::kC, PresetId::kD, PresetId::kE,
                                           PresetId::kF, PresetId::kG, PresetId::kH, PresetId::kI};

char to_char(PresetId id);
std::optional<PresetId> parse_preset(std::string_view text);

// Overwrites the feature flags of `base` with the preset's. Every other
// field is kept.
ScenarioConfig expand_preset(PresetId id, ScenarioConfig base);

// Sets one `key = value` setting. Throws ConfigError for unknown keys and
// malformed values.
void apply_setting(ScenarioConfig& config, std::string_view key, std::string_view value);

// Flat `key = value` text with `#` comments. A `preset` key is applied after
// all other keys. Throws ParseError (with the line) on bad syntax or values.
ScenarioConfig parse_config(std::istream& in, ScenarioConfig base = {});
ScenarioConfig load_config(const std::filesystem::path& path, ScenarioConfig base = {});

// Every setting, one per line, in a form parse_config reads back to an equal
// config.
std::string dump_config(const ScenarioConfig& config);

std::string_view version();

// Seed of replication `k` (0-based).
std::uint64_t replication_seed(std::uint64_t master, std::uint32_t k);

struct Outcome {
  ScenarioConfig config;  // resolved, with this replication's seed
  graph::SocialGraph graph;
  protocol::TransferLog log;
  std::vector<metrics::DownloadRecord> records;
  sim::RunStats stats;
  metrics::AuditReport audit;
  std::int64_t ledger_total = 0;
  std::int64_t ledger_minted = 0;
};

// One replication in memory.
Outcome simulate(const ScenarioConfig& config);

struct Summary {
  std::string label;
  std::uint64_t seed = 0;
  double mean_duration_s = 0.0;
  std::size_t user_downloads = 0;
  double files_per_user = 0.0;
  std::optional<double> corr_sat_flag;
  std::optional<double> corr_sat_friend_count;
  double p_nsn = 0.0;
  std::uint64_t non_friend_bytes = 0;
  std::uint64_t broadcasts = 0;
  bool audit_ok = true;
};

Summary summarize(const Outcome& outcome, std::string label = {});

// Writes manifest.txt, downloads.csv, durations.csv, nonfriend.csv,
// files_per_user.csv, correlations.csv, graph_props.csv, pnsn.csv,
// summary.csv and (if enabled) transfer_log.csv into `dir`.
void write_bundle(const Outcome& outcome, const std::filesystem::path& dir, std::string_view note = {});

// Runs every replication of `config`, one bundle per replication under
// `out/rep-<k>`. Throws ConfigError before any work when invalid.
std::vector<Summary> run(const ScenarioConfig& config, const std::filesystem::path& out,
                         std::string_view note = {});

enum class SweepDimension { kSatRatio, kNodeCount, kMiModel, kPreset };
std::optional<SweepDimension> parse_dimension(std::string_view text);

struct SweepRequest {
  SweepDimension dimension = SweepDimension::kSatRatio;
  std::vector<std::string> values;
  std::vector<GraphModel> models;  // empty: the base config's model
  bool graph_only = false;         // P(NSN) without simulating
};

struct SweepFailure {
  std::string value;
  std::string message;
};

// One run per value, model and replication. Writes pnsn.csv,
// correlations.csv and summary.csv to `out`; failures are collected and the
// sweep continues.
std::vector<SweepFailure> sweep(const SweepRequest& request, const ScenarioConfig& base,
                                const std::filesystem::path& out);

std::string_view to_string(GraphModel model);
std::optional<GraphModel> parse_graph_model(std::string_view text);

}  // namespace sst::scenario
