#include "sst/protocol.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace sst::protocol {

PieceSet::PieceSet(std::uint32_t piece_count, bool full)
    : words_((piece_count + 63) / 64, 0), size_(piece_count), count_(0) {
  if (full) fill();
}

bool PieceSet::set(std::uint32_t piece) {
  if (piece >= size_) throw std::out_of_range("piece index beyond piece count");
  auto& w = words_[piece >> 6];
  const std::uint64_t bit = std::uint64_t{1} << (piece & 63);
  if (w & bit) return false;
  w |= bit;
  ++count_;
  return true;
}

void PieceSet::fill() {
  std::fill(words_.begin(), words_.end(), ~std::uint64_t{0});
  if (size_ % 64 != 0 && !words_.empty()) words_.back() = (std::uint64_t{1} << (size_ % 64)) - 1;
  count_ = size_;
}

std::optional<std::uint32_t> PieceSet::next_missing_from(const PieceSet& source, std::uint32_t from) const {
  for (std::size_t w = from >> 6; w < words_.size(); ++w) {
    std::uint64_t useful = source.words_[w] & ~words_[w];
    if (w == (from >> 6)) useful &= ~std::uint64_t{0} << (from & 63);
    if (useful != 0) return static_cast<std::uint32_t>(w * 64 + std::countr_zero(useful));
  }
  return std::nullopt;
}

std::uint32_t PieceSet::missing_from(const PieceSet& source) const {
  std::uint32_t n = 0;
  for (std::size_t w = 0; w < words_.size(); ++w) n += std::popcount(source.words_[w] & ~words_[w]);
  return n;
}

std::string_view to_string(TransferKind kind) {
  switch (kind) {
    case TransferKind::kReciprocal: return "reciprocal";
    case TransferKind::kCredit: return "credit";
    case TransferKind::kBuddy: return "buddy";
    case TransferKind::kBroadcast: return "broadcast";
    case TransferKind::kPrefetch: return "prefetch";
    case TransferKind::kSeed: return "seed";
  }
  return "?";
}

std::optional<TransferKind> parse_transfer_kind(std::string_view text) {
  for (auto k : {TransferKind::kReciprocal, TransferKind::kCredit, TransferKind::kBuddy, TransferKind::kBroadcast,
                 TransferKind::kPrefetch, TransferKind::kSeed}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

bool CreditLedger::transfer(PeerId from, PeerId to, std::int64_t amount) {
  if (!can_spend(from, amount)) return false;
  balances_[from] -= amount;
  balances_[to] += amount;
  return true;
}

void CreditLedger::mint(PeerId peer, std::int64_t amount) {
  balances_[peer] += amount;
  minted_ += amount;
}

std::int64_t CreditLedger::total() const {
  return std::accumulate(balances_.begin(), balances_.end(), std::int64_t{0});
}

Exchange select_exchange(const PeerState& downloader, const PeerState& candidate, ItemId item, bool buddies,
                         const CreditLedger& ledger, const ExchangePolicy& policy) {
  if (policy.buddy_exempt && buddies) return Exchange::kBuddy;
  const PieceSet* mine = downloader.pieces(item);
  const PieceSet* theirs = candidate.pieces(item);
  if (mine != nullptr && theirs != nullptr && !theirs->full() && theirs->missing_from(*mine) > 0) {
    return Exchange::kReciprocal;
  }
  if (policy.credits) {
    return ledger.can_spend(downloader.peer_id, 1) ? Exchange::kCredit : Exchange::kRefuse;
  }
  return candidate.seeder ? Exchange::kSeed : Exchange::kRefuse;
}

bool donate_credits(CreditLedger& ledger, PeerId from, PeerId to, std::int64_t amount) {
  if (amount <= 0 || from == to) return false;
  return ledger.transfer(from, to, amount);
}

HelperRole register_helper(PeerState& downloader, const PeerState& buddy, ItemId item, bool buddies,
                           bool help_fetch) {
  if (!buddies) return HelperRole::kRejected;
  const PieceSet* held = buddy.pieces(item);
  HelperRole role;
  if (held != nullptr && !held->none()) {
    role = HelperRole::kServing;
  } else if (help_fetch) {
    role = HelperRole::kFetching;
  } else {
    return HelperRole::kNoop;
  }
  downloader.helpers[item].insert(buddy.peer_id);
  return role;
}

std::map<PeerId, prefs::PreferenceProfile> buddy_broadcast_aggregate(
    std::span<const std::pair<PeerId, prefs::PreferenceProfile>> inbox) {
  std::map<PeerId, prefs::PreferenceProfile> digest;
  for (const auto& [peer, profile] : inbox) digest[peer] = profile;
  return digest;
}

double interest_score(const graph::SocialGraph& graph, prefs::Profiles profiles, PeerId peer,
                      const ContentItem& item) {
  if (peer >= graph.node_count()) return 0.0;
  const double own = profiles[peer].quantifier_or_zero(item.category);
  if (own > 0.0) return 1.0 + own;
  double best = 0.0;
  for (graph::NodeId b : graph.neighbors(peer)) {
    best = std::max(best, profiles[b].quantifier_or_zero(item.category));
  }
  return best;
}

std::uint64_t cached_bytes(const PeerState& peer, const Catalog& catalog) {
  std::uint64_t total = 0;
  for (const auto& [item, pieces] : peer.cache) total += catalog[item].size_bytes;
  return total;
}

std::optional<double> cheapest_evictable(const PeerState& peer, const std::function<double(ItemId)>& interest) {
  std::optional<double> best;
  for (const auto& [item, pieces] : peer.cache) {
    if (peer.active_downloads.contains(item)) continue;
    const double s = interest(item);
    if (!best || s < *best) best = s;
  }
  return best;
}

CacheInsertResult cache_insert(PeerState& peer, const ContentItem& item, const Catalog& catalog,
                               std::uint64_t capacity_bytes, const std::function<double(ItemId)>& interest) {
  CacheInsertResult result;
  if (item.size_bytes > capacity_bytes) return result;
  std::uint64_t used = cached_bytes(peer, catalog);
  const bool present = peer.cache.contains(item.item_id);
  if (!present) used += item.size_bytes;

  // Evict by ascending (interest, item id) among items that may go.
  std::vector<std::pair<double, ItemId>> victims;
  for (const auto& [id, pieces] : peer.cache) {
    if (id == item.item_id || peer.active_downloads.contains(id)) continue;
    victims.emplace_back(interest(id), id);
  }
  std::sort(victims.begin(), victims.end());
  std::size_t take = 0;
  while (used > capacity_bytes && take < victims.size()) {
    used -= catalog[victims[take].second].size_bytes;
    ++take;
  }
  if (used > capacity_bytes) return result;

  for (std::size_t i = 0; i < take; ++i) {
    peer.cache.erase(victims[i].second);
    result.evicted.push_back(victims[i].second);
  }
  if (!present) peer.cache.emplace(item.item_id, PieceSet(item.piece_count()));
  result.inserted = true;
  return result;
}

std::optional<ItemId> prefetch_tick(const PeerState& peer, bool busy, const PrefetchContext& ctx) {
  if (busy || peer.seeder) return std::nullopt;
  if (ctx.cap && ctx.active_prefetchers >= *ctx.cap) return std::nullopt;
  const auto& graph = ctx.graph;
  if (peer.peer_id >= graph.node_count()) return std::nullopt;

  // Items some buddy can supply and we do not hold at all.
  std::vector<ItemId> offered;
  for (graph::NodeId b : graph.neighbors(peer.peer_id)) {
    for (const auto& [id, pieces] : ctx.peers[b].cache) {
      if (!pieces.none() && !peer.cache.contains(id) && !peer.active_downloads.contains(id)) offered.push_back(id);
    }
  }
  if (offered.empty()) return std::nullopt;
  std::sort(offered.begin(), offered.end());
  offered.erase(std::unique(offered.begin(), offered.end()), offered.end());

  CategoryId categories = 0;
  for (const auto& item : ctx.catalog) categories = std::max(categories, item.category + 1);
  const auto demand = prefs::category_demand(graph, ctx.profiles, peer.peer_id, categories, ctx.weights);

  // Best by (score desc, id asc): the first offered item in predict_demand
  // order.
  ItemId best = offered.front();
  for (ItemId id : offered) {
    if (demand[ctx.catalog[id].category] > demand[ctx.catalog[best].category]) best = id;
  }
  if (!(demand[ctx.catalog[best].category] > 0.0)) return std::nullopt;

  auto interest = [&](ItemId id) { return interest_score(graph, ctx.profiles, peer.peer_id, ctx.catalog[id]); };
  const ContentItem& item = ctx.catalog[best];
  if (cached_bytes(peer, ctx.catalog) + item.size_bytes > ctx.cache_capacity_bytes) {
    const auto floor = cheapest_evictable(peer, interest);
    if (!floor || interest(best) <= *floor) return std::nullopt;
  }
  return best;
}

double broadcast_duration_s(const ContentItem& item, std::uint64_t transponder_bps) {
  return static_cast<double>(item.size_bytes) * 8.0 / static_cast<double>(transponder_bps);
}

std::optional<ScheduledBroadcast> broadcast_scheduler_tick(const std::map<ItemId, std::uint32_t>& demand,
                                                           BroadcastSchedule& schedule, double now_s,
                                                           const Catalog& catalog, const BroadcastPolicy& policy) {
  if (schedule.busy_until_s > now_s) return std::nullopt;
  std::optional<ItemId> pick;
  std::uint32_t pick_demand = 0;
  for (const auto& [item, count] : demand) {
    if (count < policy.popularity_threshold) continue;
    auto last = schedule.last_start_s.find(item);
    if (last != schedule.last_start_s.end() && now_s - last->second < policy.cooldown_s) continue;
    if (!pick || count > pick_demand) {
      pick = item;
      pick_demand = count;
    }
  }
  if (!pick) return std::nullopt;
  ScheduledBroadcast b{*pick, now_s, now_s + broadcast_duration_s(catalog[*pick], schedule.transponder_bps)};
  schedule.queue.push_back(b);
  schedule.busy_until_s = b.end_s;
  schedule.last_start_s[*pick] = now_s;
  return b;
}

void seeding_reward(CreditLedger& ledger, PeerId peer, std::int64_t pieces_uploaded, bool to_buddy) {
  if (to_buddy || pieces_uploaded <= 0) return;
  ledger.mint(peer, pieces_uploaded);
}

}  // namespace sst::protocol
