#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "sst/bandwidth.hpp"
#include "sst/config.hpp"
#include "sst/content.hpp"
#include "sst/graph.hpp"
#include "sst/metrics.hpp"
#include "sst/prefs.hpp"
#include "sst/protocol.hpp"
#include "sst/rng.hpp"

namespace sst::sim {

using protocol::PeerId;

class SimClock {
 public:
  explicit SimClock(double step_s) : step_s_(step_s) {}
  double now() const { return static_cast<double>(step_) * step_s_; }
  double step_s() const { return step_s_; }
  std::uint64_t step() const { return step_; }
  void advance() { ++step_; }

 private:
  double step_s_;
  std::uint64_t step_ = 0;
};

// Per-peer access link in bytes per second.
struct LinkBudget {
  double download_bytes_per_s = 1e6;
  double upload_bytes_per_s = 125e3;
};

struct ArrivalProcess {
  double mean_wait_s = 7200.0;
  WaitDistribution distribution = WaitDistribution::kExponential;
};

// Idle time between a completed download and the next request.
double sample_wait(const ArrivalProcess& process, Rng& rng);

enum class DownloadKind : std::uint8_t { kUser, kPrefetch, kHelpFetch };

struct Connection {
  PeerId source = 0;
  protocol::Exchange exchange = protocol::Exchange::kRefuse;
  bool helper = false;
  bool half_upload = false;  // a helper forwarding pieces it fetches itself
  double carry_bytes = 0.0;  // bandwidth granted but short of a whole piece
};

struct Download {
  std::uint64_t id = 0;
  PeerId peer = 0;
  ItemId item = 0;
  DownloadKind kind = DownloadKind::kUser;
  PeerId beneficiary = 0;  // help-fetch: the buddy being helped
  double request_s = 0.0;
  std::uint64_t friend_bytes = 0;
  std::uint64_t non_friend_bytes = 0;
  std::uint64_t cache_bytes = 0;
  std::vector<Connection> connections;
  bool done = false;
  bool cancelled = false;
  double completion_s = 0.0;
  double last_piece_s = 0.0;
};

struct RunStats {
  std::uint64_t steps = 0;
  std::uint64_t broadcasts = 0;
  std::uint64_t donations = 0;
  std::uint64_t mi_updates = 0;
  std::uint64_t refused_credit = 0;
  std::uint64_t prefetches_started = 0;
  std::uint64_t help_fetches_started = 0;
  double max_upload_utilisation = 0.0;    // allocated / capacity, worst step
  double max_download_utilisation = 0.0;
  std::int64_t min_balance = 0;
  bool ledger_conserved = true;  // sum of balances equals minted credits every step
  bool pieces_from_holders = true;
};

struct World {
  ScenarioConfig config;
  graph::SocialGraph graph;
  std::vector<prefs::PreferenceProfile> profiles;
  Catalog catalog;
  std::vector<std::vector<ItemId>> items_by_category;
  std::vector<protocol::PeerState> peers;  // social peers, then initial seeders
  protocol::CreditLedger ledger;
  protocol::BroadcastSchedule schedule;
  std::map<PeerId, prefs::PreferenceProfile> digest;  // BuddyBroadCast view
  double next_buddycast_s = 0.0;
  std::map<std::uint64_t, Download> downloads;  // active, keyed by start order
  std::map<std::pair<PeerId, ItemId>, std::uint64_t> download_of;
  std::vector<std::uint64_t> user_download;  // per social peer, 0 when idle
  std::vector<std::uint32_t> upload_slots_used;  // per peer, non-helper connections served
  std::uint64_t next_download_id = 1;
  std::vector<std::vector<PeerId>> holders;  // per item: peers sharing pieces
  std::vector<std::vector<std::uint32_t>> holder_slot;  // [item][peer]
  SimClock clock{60.0};
  LinkBudget link;
  ArrivalProcess arrivals;
  std::uint64_t cache_capacity_bytes = 0;
  protocol::TransferLog log;
  std::vector<metrics::DownloadRecord> records;
  RunStats stats;

  Rng arrival_rng{0};
  Rng mi_rng{0};
  Rng protocol_rng{0};
  Rng feedback_rng{0};

  std::size_t social_count() const { return graph.node_count(); }
  bool is_buddy(PeerId a, PeerId b) const {
    return a < social_count() && b < social_count() && graph.has_edge(a, b);
  }
};

// Builds the graph, profiles, catalog, seeders and ledger from the config.
// Throws ConfigError on invalid parameters.
World init_world(const ScenarioConfig& config);

// Same, on a prebuilt graph whose sat flags are already assigned.
World init_world(const ScenarioConfig& config, graph::SocialGraph graph);

// Advances the world by one step.
void tick(World& world);

// Runs until the configured duration.
void run_simulation(World& world);

}  // namespace sst::sim
