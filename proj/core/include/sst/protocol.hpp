#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "sst/content.hpp"
#include "sst/graph.hpp"
#include "sst/prefs.hpp"

namespace sst::protocol {

using PeerId = std::uint32_t;

// Sender id used in the transfer log for satellite deliveries.
inline constexpr PeerId kTransponder = 0xffffffffu;

// Bitmap over the pieces of one item.
class PieceSet {
 public:
  PieceSet() = default;
  explicit PieceSet(std::uint32_t piece_count, bool full = false);

  std::uint32_t size() const { return size_; }
  std::uint32_t count() const { return count_; }
  bool full() const { return count_ == size_; }
  bool none() const { return count_ == 0; }

  bool test(std::uint32_t piece) const { return (words_[piece >> 6] >> (piece & 63)) & 1u; }
  // Returns true when the piece was not present before.
  bool set(std::uint32_t piece);
  void fill();

  // Lowest piece held by `source` and missing here, starting at `from`.
  std::optional<std::uint32_t> next_missing_from(const PieceSet& source, std::uint32_t from = 0) const;
  // Number of pieces `source` holds that are missing here.
  std::uint32_t missing_from(const PieceSet& source) const;

  friend bool operator==(const PieceSet&, const PieceSet&) = default;

 private:
  std::vector<std::uint64_t> words_;
  std::uint32_t size_ = 0;
  std::uint32_t count_ = 0;
};

enum class TransferKind : std::uint8_t {
  kReciprocal,  // piece for piece
  kCredit,      // piece for one credit
  kBuddy,       // free service from a buddy
  kBroadcast,   // satellite delivery
  kPrefetch,    // free buddy service feeding a prefetch
  kSeed,        // unconditional upload by an initial seeder while credits are off
};

std::string_view to_string(TransferKind kind);
std::optional<TransferKind> parse_transfer_kind(std::string_view text);

// One contiguous run of pieces moved between two peers. Broadcast records
// cover the pieces the receiver newly captured, so `piece_count` may be less
// than the item's piece count.
struct TransferRecord {
  double time_s = 0.0;
  PeerId from = 0;
  PeerId to = 0;
  ItemId item = 0;
  std::uint32_t piece = 0;
  std::uint32_t piece_count = 0;
  std::uint64_t bytes = 0;
  TransferKind kind = TransferKind::kReciprocal;
  bool friend_link = false;

  friend bool operator==(const TransferRecord&, const TransferRecord&) = default;
};

using TransferLog = std::vector<TransferRecord>;

struct PeerState {
  PeerId peer_id = 0;
  bool sat_enabled = false;
  bool seeder = false;  // initial seeder: holds everything, never downloads
  std::map<ItemId, PieceSet> cache;
  std::set<ItemId> completed;  // user downloads finished at least once
  std::set<ItemId> active_downloads;
  std::map<ItemId, std::set<PeerId>> helpers;
  double idle_until = 0.0;

  const PieceSet* pieces(ItemId item) const {
    auto it = cache.find(item);
    return it == cache.end() ? nullptr : &it->second;
  }
  bool holds_complete(ItemId item) const {
    const auto* p = pieces(item);
    return p != nullptr && p->full();
  }
};

class CreditLedger {
 public:
  CreditLedger() = default;
  CreditLedger(std::size_t peers, std::int64_t credit_limit) : balances_(peers, 0), limit_(credit_limit) {}

  std::int64_t balance(PeerId peer) const { return balances_[peer]; }
  std::int64_t limit() const { return limit_; }
  std::size_t size() const { return balances_.size(); }

  bool can_spend(PeerId peer, std::int64_t amount) const { return balances_[peer] - amount >= -limit_; }
  // Zero-sum move; refused (returns false, no change) if it would push
  // `from` below -limit.
  bool transfer(PeerId from, PeerId to, std::int64_t amount);
  // New credits, outside the zero-sum economy.
  void mint(PeerId peer, std::int64_t amount);

  std::int64_t total() const;
  std::int64_t minted() const { return minted_; }

 private:
  std::vector<std::int64_t> balances_;
  std::int64_t limit_ = 0;
  std::int64_t minted_ = 0;
};

enum class Exchange { kBuddy, kReciprocal, kCredit, kSeed, kRefuse };

struct ExchangePolicy {
  bool buddy_exempt = true;  // buddies serve without tit-for-tat
  bool credits = true;
};

// How `candidate` would serve `downloader` a piece of `item`.
Exchange select_exchange(const PeerState& downloader, const PeerState& candidate, ItemId item, bool buddies,
                         const CreditLedger& ledger, const ExchangePolicy& policy);

// Zero-sum donation; false (ledger untouched) for amount <= 0 or when the
// donor would fall below -CreditLimit.
bool donate_credits(CreditLedger& ledger, PeerId from, PeerId to, std::int64_t amount);

enum class HelperRole { kRejected, kNoop, kServing, kFetching };

// Registers `buddy` as a helper of `downloader` for `item`. A buddy holding
// pieces serves from its cache; one without pieces fetches them on the
// downloader's behalf only when `help_fetch` is set.
HelperRole register_helper(PeerState& downloader, const PeerState& buddy, ItemId item, bool buddies,
                           bool help_fetch);

// Latest profile per peer from the uplink inbox.
std::map<PeerId, prefs::PreferenceProfile> buddy_broadcast_aggregate(
    std::span<const std::pair<PeerId, prefs::PreferenceProfile>> inbox);

// Cache value of an item for `peer`: 1 + Q(C, peer) when the peer itself
// wants the category, else max over buddies Q(C, buddy). Anything the peer
// wants outranks anything held only for friends.
double interest_score(const graph::SocialGraph& graph, prefs::Profiles profiles, PeerId peer,
                      const ContentItem& item);

struct CacheInsertResult {
  bool inserted = false;
  std::vector<ItemId> evicted;
};

// Adds `item` to the peer's cache (empty bitmap if new) and evicts the least
// interesting items until the cache fits `capacity_bytes`. Items under
// active download are never evicted. Rejected without side effects when the
// item cannot fit.
CacheInsertResult cache_insert(PeerState& peer, const ContentItem& item, const Catalog& catalog,
                               std::uint64_t capacity_bytes, const std::function<double(ItemId)>& interest);

// Lowest interest among cached items that could be evicted, if any.
std::optional<double> cheapest_evictable(const PeerState& peer, const std::function<double(ItemId)>& interest);

std::uint64_t cached_bytes(const PeerState& peer, const Catalog& catalog);

struct PrefetchContext {
  const graph::SocialGraph& graph;
  prefs::Profiles profiles;
  const Catalog& catalog;
  std::span<const PeerState> peers;
  prefs::DemandWeights weights;
  std::uint64_t cache_capacity_bytes = 0;
  std::optional<std::size_t> cap;  // global concurrent-prefetcher limit
  std::size_t active_prefetchers = 0;
};

// Item an idle peer should prefetch: the best-ranked predicted item some
// buddy can supply, provided the cache would keep it. `busy` marks a peer
// with an active user download.
std::optional<ItemId> prefetch_tick(const PeerState& peer, bool busy, const PrefetchContext& ctx);

struct ScheduledBroadcast {
  ItemId item = 0;
  double start_s = 0.0;
  double end_s = 0.0;
};

struct BroadcastPolicy {
  std::uint32_t popularity_threshold = 5;
  double cooldown_s = 6 * 3600.0;
};

struct BroadcastSchedule {
  std::deque<ScheduledBroadcast> queue;  // ordered by start time
  std::uint64_t transponder_bps = 36'000'000;
  double busy_until_s = 0.0;
  std::map<ItemId, double> last_start_s;
};

double broadcast_duration_s(const ContentItem& item, std::uint64_t transponder_bps);

// When the transponder is idle at `now_s`, queues the most demanded item at
// or above the threshold and outside its cooldown. Returns the new entry.
std::optional<ScheduledBroadcast> broadcast_scheduler_tick(const std::map<ItemId, std::uint32_t>& demand,
                                                           BroadcastSchedule& schedule, double now_s,
                                                           const Catalog& catalog, const BroadcastPolicy& policy);

// Minted reward for pieces an uploader served as a seeder. Buddy service
// earns nothing.
void seeding_reward(CreditLedger& ledger, PeerId peer, std::int64_t pieces_uploaded, bool to_buddy);

}  // namespace sst::protocol
