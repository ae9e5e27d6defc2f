#include "sst/sim.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "sst/errors.hpp"

namespace sst::sim {

namespace {

using protocol::Exchange;
using protocol::PieceSet;
using protocol::TransferKind;
using protocol::TransferRecord;

constexpr std::uint32_t kAbsent = 0xffffffffu;
constexpr std::int64_t kDonation = 10;
constexpr std::size_t kTrackerScan = 4;  // global view: holders examined, in tracker samples

std::uint64_t held_bytes(const PieceSet& set, const ContentItem& item) {
  if (set.none()) return 0;
  std::uint64_t bytes = std::uint64_t{set.count()} * item.piece_size_bytes;
  const std::uint32_t last = item.piece_count() - 1;
  if (set.test(last)) bytes -= item.piece_size_bytes - item.piece_bytes(last);
  return bytes;
}

TransferKind kind_of(Exchange e, DownloadKind d) {
  switch (e) {
    case Exchange::kBuddy: return d == DownloadKind::kPrefetch ? TransferKind::kPrefetch : TransferKind::kBuddy;
    case Exchange::kReciprocal: return TransferKind::kReciprocal;
    case Exchange::kCredit: return TransferKind::kCredit;
    case Exchange::kSeed: return TransferKind::kSeed;
    case Exchange::kRefuse: break;
  }
  throw std::logic_error("refused exchange carries no transfer");
}

class Engine {
 public:
  explicit Engine(World& world)
      : w_(world), cfg_(world.config), now_(world.clock.now()), dt_(world.clock.step_s()),
        n_(static_cast<PeerId>(world.social_count())) {}

  void step() {
    arrivals();
    influence();
    broadcasts();
    helpers();
    transfers();
    prefetch();
    completions();
    audit_ledger();
  }

 private:
  World& w_;
  const ScenarioConfig& cfg_;
  double now_;
  double dt_;
  PeerId n_;

  std::function<double(ItemId)> interest_fn(PeerId p) const {
    return [this, p](ItemId i) { return protocol::interest_score(w_.graph, w_.profiles, p, w_.catalog[i]); };
  }

  void share(PeerId p, ItemId i) {
    auto& slot = w_.holder_slot[i][p];
    if (slot != kAbsent) return;
    slot = static_cast<std::uint32_t>(w_.holders[i].size());
    w_.holders[i].push_back(p);
  }

  void unshare(PeerId p, ItemId i) {
    auto& slot = w_.holder_slot[i][p];
    if (slot == kAbsent) return;
    auto& list = w_.holders[i];
    const PeerId last = list.back();
    list[slot] = last;
    w_.holder_slot[i][last] = slot;
    list.pop_back();
    slot = kAbsent;
  }

  void forget(PeerId p, ItemId i) {
    w_.peers[p].cache.erase(i);
    w_.peers[p].completed.erase(i);
    unshare(p, i);
  }

  void evicted(PeerId p, const protocol::CacheInsertResult& r) {
    for (ItemId e : r.evicted) {
      w_.peers[p].completed.erase(e);
      unshare(p, e);
    }
  }

  Download* find(PeerId p, ItemId i) {
    auto it = w_.download_of.find({p, i});
    return it == w_.download_of.end() ? nullptr : &w_.downloads.at(it->second);
  }

  bool fetching_for_buddy(PeerId p, ItemId i) {
    const Download* d = find(p, i);
    return d != nullptr && d->kind == DownloadKind::kHelpFetch;
  }

  void mark_done(Download& d, double at) {
    d.done = true;
    d.completion_s = std::max(at, d.request_s);
    w_.peers[d.peer].completed.insert(d.item);
  }

  Download* start(PeerId p, ItemId i, DownloadKind kind, PeerId beneficiary) {
    auto& peer = w_.peers[p];
    const auto r = protocol::cache_insert(peer, w_.catalog[i], w_.catalog, w_.cache_capacity_bytes, interest_fn(p));
    if (!r.inserted) return nullptr;
    evicted(p, r);
    peer.active_downloads.insert(i);
    const PieceSet& held = peer.cache.at(i);

    Download d;
    d.id = w_.next_download_id++;
    d.peer = p;
    d.item = i;
    d.kind = kind;
    d.beneficiary = beneficiary;
    d.request_s = now_;
    d.last_piece_s = now_;
    d.cache_bytes = held_bytes(held, w_.catalog[i]);
    if (!held.none()) share(p, i);
    auto& ref = w_.downloads.emplace(d.id, std::move(d)).first->second;
    if (held.full()) mark_done(ref, now_);
    w_.download_of[{p, i}] = ref.id;
    if (kind == DownloadKind::kUser) w_.user_download[p] = ref.id;
    return &ref;
  }

  void release(const Connection& c) {
    if (!c.helper) --w_.upload_slots_used[c.source];
  }

  void erase_download(const Download& d) {
    for (const auto& c : d.connections) release(c);
    w_.peers[d.peer].active_downloads.erase(d.item);
    w_.download_of.erase({d.peer, d.item});
    if (d.kind == DownloadKind::kUser && w_.user_download[d.peer] == d.id) w_.user_download[d.peer] = 0;
    w_.downloads.erase(d.id);
  }

  void finish_user(PeerId p, ItemId i, double at) {
    const bool negative = w_.feedback_rng.bernoulli(cfg_.negative_feedback_prob);
    w_.profiles[p] = prefs::apply_download_feedback(std::move(w_.profiles[p]), w_.catalog[i].category, negative,
                                                    cfg_.feedback);
    w_.peers[p].idle_until = at + sample_wait(w_.arrivals, w_.arrival_rng);
  }

  // (1) Idle peers past their wait pick an item from their preferences.
  void arrivals() {
    std::vector<double> weights;
    for (PeerId p = 0; p < n_; ++p) {
      if (w_.user_download[p] != 0 || w_.peers[p].idle_until > now_) continue;
      const auto entries = w_.profiles[p].entries();
      if (entries.empty()) continue;
      weights.clear();
      for (const auto& e : entries) weights.push_back(e.quantifier);
      const CategoryId c = entries[w_.arrival_rng.weighted_index(weights)].category;
      const auto& pool = w_.items_by_category[c];
      const ItemId item = pool.empty() ? static_cast<ItemId>(w_.arrival_rng.below(w_.catalog.size()))
                                       : pool[w_.arrival_rng.below(pool.size())];
      request(p, item);
    }
  }

  void request(PeerId p, ItemId item) {
    auto& peer = w_.peers[p];
    const ContentItem& it = w_.catalog[item];
    if (Download* d = find(p, item)) {
      // A running prefetch or help fetch becomes the user's own download.
      d->kind = DownloadKind::kUser;
      d->request_s = now_;
      d->last_piece_s = now_;
      d->friend_bytes = 0;
      d->non_friend_bytes = 0;
      d->cache_bytes = held_bytes(peer.cache.at(item), it);
      // Partial pieces restart so no byte predates the request.
      for (auto& c : d->connections) c.carry_bytes = 0.0;
      w_.user_download[p] = d->id;
      return;
    }
    if (peer.holds_complete(item)) {
      w_.records.push_back({p, item, now_, now_, 0, 0, it.size_bytes, false});
      finish_user(p, item, now_);
      return;
    }
    if (start(p, item, DownloadKind::kUser, p) == nullptr) {
      peer.idle_until = now_ + sample_wait(w_.arrivals, w_.arrival_rng);
    }
  }

  // (2) Mutual influence against a snapshot of this step's profiles.
  void influence() {
    if (!cfg_.mi_model || cfg_.p_mi <= 0.0) return;
    std::vector<std::pair<PeerId, prefs::PreferenceProfile>> updates;
    for (PeerId v = 0; v < n_; ++v) {
      if (w_.mi_rng.bernoulli(cfg_.p_mi)) {
        updates.emplace_back(v, prefs::apply_influence(*cfg_.mi_model, w_.graph, w_.profiles, v, w_.mi_rng));
      }
    }
    for (auto& [v, profile] : updates) w_.profiles[v] = std::move(profile);
    w_.stats.mi_updates += updates.size();
  }

  // (3) BuddyBroadCast digest, finished transmissions, scheduler.
  void broadcasts() {
    if (!cfg_.features.broadcast) return;
    if (now_ >= w_.next_buddycast_s) {
      std::vector<std::pair<PeerId, prefs::PreferenceProfile>> inbox;
      inbox.reserve(n_);
      for (PeerId p = 0; p < n_; ++p) inbox.emplace_back(p, w_.profiles[p]);
      w_.digest = protocol::buddy_broadcast_aggregate(inbox);
      w_.next_buddycast_s += cfg_.buddycast_interval_s;
    }
    auto& queue = w_.schedule.queue;
    while (!queue.empty() && queue.front().end_s <= now_) {
      deliver(queue.front());
      queue.pop_front();
    }
    std::map<ItemId, std::uint32_t> demand;
    for (const auto& [id, d] : w_.downloads) {
      if (!d.done && d.kind != DownloadKind::kHelpFetch) ++demand[d.item];
    }
    const protocol::BroadcastPolicy policy{cfg_.broadcast_threshold, cfg_.broadcast_cooldown_s};
    if (protocol::broadcast_scheduler_tick(demand, w_.schedule, now_, w_.catalog, policy)) ++w_.stats.broadcasts;
  }

  void deliver(const protocol::ScheduledBroadcast& b) {
    const ContentItem& item = w_.catalog[b.item];
    for (PeerId p = 0; p < n_; ++p) {
      if (!w_.graph.sat_enabled(p)) continue;
      auto& peer = w_.peers[p];
      auto it = peer.cache.find(b.item);
      if (it != peer.cache.end() && it->second.full()) continue;
      const bool active = peer.active_downloads.contains(b.item);
      if (!active) {
        if (!cfg_.caching()) continue;
        const auto fn = interest_fn(p);
        const double score = fn(b.item);
        if (!(score > 0.0)) continue;
        if (it == peer.cache.end()) {
          if (protocol::cached_bytes(peer, w_.catalog) + item.size_bytes > w_.cache_capacity_bytes) {
            const auto floor = protocol::cheapest_evictable(peer, fn);
            if (!floor || score <= *floor) continue;
          }
          const auto r = protocol::cache_insert(peer, item, w_.catalog, w_.cache_capacity_bytes, fn);
          if (!r.inserted) continue;
          evicted(p, r);
          it = peer.cache.find(b.item);
        }
      }
      PieceSet& set = it->second;
      const std::uint64_t bytes = item.size_bytes - held_bytes(set, item);
      const std::uint32_t pieces = set.size() - set.count();
      set.fill();
      peer.completed.insert(b.item);
      share(p, b.item);
      w_.log.push_back({b.end_s, protocol::kTransponder, p, b.item, 0, pieces, bytes, TransferKind::kBroadcast, false});
      if (active) {
        Download* d = find(p, b.item);
        d->cache_bytes += bytes;
        mark_done(*d, std::max(b.end_s, d->last_piece_s));
      }
    }
  }

  // Buddy help: recruit helpers for user downloads and top up credits.
  void helpers() {
    if (!cfg_.features.buddy_help) return;
    const bool help_fetch = !cfg_.features.broadcast;
    for (auto& [id, d] : w_.downloads) {
      if (d.kind != DownloadKind::kUser || d.done) continue;
      auto& me = w_.peers[d.peer];
      const PieceSet& mine = me.cache.at(d.item);
      auto& assigned = me.helpers[d.item];
      const auto buddies = w_.graph.neighbors(d.peer);
      for (int pass = 0; pass < 2; ++pass) {
        for (PeerId b : buddies) {
          if (assigned.size() >= cfg_.max_helpers) break;
          if (assigned.contains(b) || w_.graph.sat_enabled(b) != (pass == 0)) continue;
          const PieceSet* theirs = w_.peers[b].pieces(d.item);
          if (theirs == nullptr || mine.missing_from(*theirs) == 0) continue;
          protocol::register_helper(me, w_.peers[b], d.item, true, help_fetch);
        }
      }
      if (help_fetch) {
        for (PeerId b : buddies) {
          if (assigned.size() >= cfg_.max_helpers) break;
          auto& buddy = w_.peers[b];
          if (assigned.contains(b) || buddy.pieces(d.item) != nullptr || !buddy.active_downloads.empty()) continue;
          if (protocol::register_helper(me, buddy, d.item, true, true) != protocol::HelperRole::kFetching) continue;
          if (start(b, d.item, DownloadKind::kHelpFetch, d.peer) == nullptr) {
            assigned.erase(b);
          } else {
            ++w_.stats.help_fetches_started;
          }
        }
      }
      if (cfg_.features.credits && !w_.ledger.can_spend(d.peer, 1)) donate(d.peer);
    }
  }

  void donate(PeerId p) {
    std::optional<PeerId> donor;
    for (PeerId b : w_.graph.neighbors(p)) {
      if (!donor || w_.ledger.balance(b) > w_.ledger.balance(*donor)) donor = b;
    }
    if (!donor) return;
    const std::int64_t amount = std::min(kDonation, w_.ledger.balance(*donor));
    if (protocol::donate_credits(w_.ledger, *donor, p, amount)) ++w_.stats.donations;
  }

  // (4) Connections, bandwidth allocation, piece delivery.
  void transfers() {
    for (auto& [id, d] : w_.downloads) {
      if (!d.done) refresh(d);
    }

    struct Slot {
      Download* download;
      std::size_t connection;
    };
    std::vector<FlowRequest> flows;
    std::vector<Slot> slots;
    BandwidthCaps caps;
    caps.upload.assign(w_.peers.size(), w_.link.upload_bytes_per_s);
    caps.download.assign(w_.peers.size(), w_.link.download_bytes_per_s);
    for (auto& [id, d] : w_.downloads) {
      if (d.done || d.connections.empty()) continue;
      const ContentItem& item = w_.catalog[d.item];
      const PieceSet& mine = w_.peers[d.peer].cache.at(d.item);
      const auto group = static_cast<std::uint32_t>(caps.group.size());
      caps.group.push_back(static_cast<double>(item.size_bytes - held_bytes(mine, item)) / dt_);
      for (std::size_t k = 0; k < d.connections.size(); ++k) {
        const Connection& c = d.connections[k];
        const PieceSet& theirs = *w_.peers[c.source].pieces(d.item);
        double cap = static_cast<double>(mine.missing_from(theirs)) * static_cast<double>(item.piece_size_bytes) / dt_;
        if (c.half_upload) cap = std::min(cap, 0.5 * w_.link.upload_bytes_per_s);
        flows.push_back({c.source, d.peer, group, cap, c.helper});
        slots.push_back({&d, k});
      }
    }
    if (flows.empty()) return;
    const auto rates = allocate_bandwidth(flows, caps);
    check_caps(flows, rates);
    for (std::size_t f = 0; f < flows.size(); ++f) {
      Download& d = *slots[f].download;
      if (!d.done) deliver(d, d.connections[slots[f].connection], rates[f]);
    }
  }

  void check_caps(const std::vector<FlowRequest>& flows, const std::vector<double>& rates) {
    std::vector<double> up(w_.peers.size(), 0.0), down(w_.peers.size(), 0.0);
    for (std::size_t f = 0; f < flows.size(); ++f) {
      up[flows[f].uploader] += rates[f];
      down[flows[f].downloader] += rates[f];
    }
    auto& s = w_.stats;
    for (std::size_t p = 0; p < up.size(); ++p) {
      s.max_upload_utilisation = std::max(s.max_upload_utilisation, up[p] / w_.link.upload_bytes_per_s);
      s.max_download_utilisation = std::max(s.max_download_utilisation, down[p] / w_.link.download_bytes_per_s);
    }
  }

  bool usable(const Download& d, PeerId s, Exchange& ex) {
    if (s == d.peer) return false;
    const PieceSet* theirs = w_.peers[s].pieces(d.item);
    if (theirs == nullptr || w_.peers[d.peer].cache.at(d.item).missing_from(*theirs) == 0) return false;
    const protocol::ExchangePolicy policy{cfg_.features.buddy_help, cfg_.features.credits};
    ex = protocol::select_exchange(w_.peers[d.peer], w_.peers[s], d.item, w_.is_buddy(d.peer, s), w_.ledger, policy);
    return ex != Exchange::kRefuse;
  }

  bool connected(const Download& d, PeerId s) const {
    return std::any_of(d.connections.begin(), d.connections.end(), [s](const Connection& c) { return c.source == s; });
  }

  bool has_slot(PeerId s) const { return w_.upload_slots_used[s] < cfg_.upload_slots; }

  void connect(Download& d, PeerId s, bool helper) {
    if (d.connections.size() >= cfg_.max_connections || connected(d, s)) return;
    if (!helper && !has_slot(s)) return;
    Exchange ex;
    if (!usable(d, s, ex)) return;
    d.connections.push_back({s, ex, helper, fetching_for_buddy(s, d.item), 0.0});
    if (!helper) ++w_.upload_slots_used[s];
  }

  void refresh(Download& d) {
    std::erase_if(d.connections, [&](Connection& c) {
      Exchange ex;
      if (!usable(d, c.source, ex)) {
        release(c);
        return true;
      }
      c.exchange = ex;
      c.half_upload = fetching_for_buddy(c.source, d.item);
      return false;
    });
    if (d.connections.size() >= cfg_.max_connections) return;

    const auto& me = w_.peers[d.peer];
    if (d.kind == DownloadKind::kUser && cfg_.features.buddy_help) {
      auto it = me.helpers.find(d.item);
      if (it != me.helpers.end()) {
        for (PeerId h : it->second) connect(d, h, true);
      }
    }
    if (cfg_.features.buddy_help || cfg_.features.locality_only || d.kind == DownloadKind::kPrefetch) {
      for (PeerId b : w_.graph.neighbors(d.peer)) {
        if (d.kind == DownloadKind::kHelpFetch && b == d.beneficiary) continue;
        connect(d, b, false);
      }
    }
    if (d.kind == DownloadKind::kPrefetch) return;
    // Buddy-aware peers go to the tracker only when no buddy can serve.
    const bool local_first = cfg_.features.buddy_help || cfg_.features.locality_only;
    const bool via_buddy = std::any_of(d.connections.begin(), d.connections.end(),
                                       [&](const Connection& c) { return w_.is_buddy(d.peer, c.source); });
    if (!(local_first && via_buddy)) tracker(d);
  }

  // Tracker response. Sat peers with the broadcast digest see every holder
  // and rank by tit-for-tat prospects, then profile similarity; others get a
  // random sample.
  void tracker(Download& d) {
    const std::size_t want = cfg_.max_connections - std::min<std::size_t>(cfg_.max_connections, d.connections.size());
    const auto& list = w_.holders[d.item];
    if (want == 0 || list.empty()) return;
    const bool global = cfg_.features.broadcast && w_.graph.sat_enabled(d.peer);
    const std::size_t budget = std::min(list.size(), (global ? kTrackerScan : 1) * cfg_.tracker_sample);

    struct Candidate {
      bool reciprocal;
      double similarity;
      PeerId peer;
    };
    std::vector<Candidate> found;
    auto consider = [&](PeerId s) {
      if (s == d.peer || connected(d, s) || !has_slot(s)) return;
      if (d.kind == DownloadKind::kHelpFetch && s == d.beneficiary) return;
      Exchange ex;
      if (!usable(d, s, ex)) return;
      double sim = 0.0;
      if (global) {
        auto it = w_.digest.find(s);
        if (it != w_.digest.end()) sim = prefs::similarity(w_.profiles[d.peer], it->second);
      }
      found.push_back({ex == Exchange::kReciprocal, sim, s});
    };
    if (budget == list.size()) {
      for (PeerId s : list) consider(s);
    } else {
      const std::size_t offset = w_.protocol_rng.below(list.size());
      if (global) {
        for (std::size_t k = 0; k < budget; ++k) consider(list[(offset + k) % list.size()]);
      } else {
        std::vector<std::uint32_t> picks;
        picks.reserve(budget);
        while (picks.size() < budget) {
          const auto k = static_cast<std::uint32_t>(w_.protocol_rng.below(list.size()));
          if (std::find(picks.begin(), picks.end(), k) == picks.end()) picks.push_back(k);
        }
        for (auto k : picks) consider(list[k]);
      }
    }
    std::sort(found.begin(), found.end(), [](const Candidate& a, const Candidate& b) {
      if (a.reciprocal != b.reciprocal) return a.reciprocal;
      if (a.similarity != b.similarity) return a.similarity > b.similarity;
      return a.peer < b.peer;
    });
    for (std::size_t k = 0; k < found.size() && k < want; ++k) connect(d, found[k].peer, false);
  }

  void deliver(Download& d, Connection& c, double rate) {
    const ContentItem& item = w_.catalog[d.item];
    auto& me = w_.peers[d.peer];
    PieceSet& mine = me.cache.at(d.item);
    const PieceSet& theirs = *w_.peers[c.source].pieces(d.item);
    const bool friends = w_.is_buddy(c.source, d.peer);
    const TransferKind kind = kind_of(c.exchange, d.kind);
    const std::uint32_t pieces = item.piece_count();

    double budget = c.carry_bytes + rate * dt_;
    double spent = 0.0;
    std::uint32_t from = static_cast<std::uint32_t>(w_.protocol_rng.below(pieces));
    std::optional<std::size_t> run;
    while (!mine.full()) {
      auto next = mine.next_missing_from(theirs, from);
      if (!next) next = mine.next_missing_from(theirs, 0);
      if (!next) break;
      const std::uint64_t bytes = item.piece_bytes(*next);
      if (budget < static_cast<double>(bytes)) break;
      if (c.exchange == Exchange::kCredit) {
        if (!w_.ledger.transfer(d.peer, c.source, 1)) {
          ++w_.stats.refused_credit;
          break;
        }
        if (theirs.full()) protocol::seeding_reward(w_.ledger, c.source, 1, friends);
      }
      budget -= static_cast<double>(bytes);
      spent += static_cast<double>(bytes);
      const double own = std::max(0.0, spent - c.carry_bytes);
      const double t = rate > 0.0 ? std::min(now_ + dt_, now_ + own / rate) : now_;

      mine.set(*next);
      if (mine.count() == 1) share(d.peer, d.item);
      (friends ? d.friend_bytes : d.non_friend_bytes) += bytes;
      d.last_piece_s = std::max(d.last_piece_s, t);

      if (run && w_.log[*run].piece + w_.log[*run].piece_count == *next) {
        ++w_.log[*run].piece_count;
        w_.log[*run].bytes += bytes;
      } else {
        run = w_.log.size();
        w_.log.push_back({t, c.source, d.peer, d.item, *next, 1, bytes, kind, friends});
      }
      from = *next + 1 < pieces ? *next + 1 : 0;
    }
    c.carry_bytes = mine.full() ? 0.0 : std::min(budget, static_cast<double>(item.piece_size_bytes));
    if (mine.full()) mark_done(d, d.last_piece_s);
  }

  // (5) Idle peers look for an item their buddies can supply.
  void prefetch() {
    if (!cfg_.features.prefetch) return;
    const auto every = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(cfg_.prefetch_interval_s / dt_)));
    std::vector<std::uint8_t> prefetching(n_, 0);
    std::size_t active = 0;
    for (const auto& [id, d] : w_.downloads) {
      if (d.kind == DownloadKind::kPrefetch && !d.done && !prefetching[d.peer]) {
        prefetching[d.peer] = 1;
        ++active;
      }
    }
    protocol::PrefetchContext ctx{w_.graph, w_.profiles, w_.catalog, w_.peers, cfg_.demand_weights,
                                  w_.cache_capacity_bytes, cfg_.features.prefetch_cap, active};
    const std::uint64_t step = w_.clock.step();
    for (PeerId p = 0; p < n_; ++p) {
      if ((step + p) % every != 0 || prefetching[p] || w_.user_download[p] != 0) continue;
      ctx.active_prefetchers = active;
      const auto item = protocol::prefetch_tick(w_.peers[p], false, ctx);
      if (!item) continue;
      if (start(p, *item, DownloadKind::kPrefetch, p) != nullptr) {
        ++active;
        ++w_.stats.prefetches_started;
      }
    }
  }

  // (6) Finished downloads: records, feedback, next wait.
  void completions() {
    std::vector<std::uint64_t> finished;
    for (const auto& [id, d] : w_.downloads) {
      if (d.done) finished.push_back(id);
    }
    for (std::uint64_t id : finished) {
      auto it = w_.downloads.find(id);
      if (it == w_.downloads.end()) continue;
      const Download d = it->second;
      if (d.kind == DownloadKind::kHelpFetch) {
        erase_download(d);
        continue;
      }
      w_.records.push_back({d.peer, d.item, d.request_s, d.completion_s, d.friend_bytes, d.non_friend_bytes,
                            d.cache_bytes, d.kind == DownloadKind::kPrefetch});
      erase_download(d);
      if (d.kind != DownloadKind::kUser) continue;
      release_helpers(d.peer, d.item);
      finish_user(d.peer, d.item, d.completion_s);
      if (!cfg_.caching()) forget(d.peer, d.item);
    }
  }

  void release_helpers(PeerId p, ItemId i) {
    auto& peer = w_.peers[p];
    auto it = peer.helpers.find(i);
    if (it == peer.helpers.end()) return;
    for (PeerId h : it->second) {
      if (Download* hd = find(h, i); hd != nullptr) {
        if (hd->kind != DownloadKind::kHelpFetch || hd->beneficiary != p) continue;
        const Download copy = *hd;
        erase_download(copy);
        if (!cfg_.caching() || w_.peers[h].cache.at(i).none()) forget(h, i);
      } else if (!cfg_.caching() && w_.peers[h].pieces(i) != nullptr) {
        forget(h, i);
      }
    }
    peer.helpers.erase(it);
  }

  void audit_ledger() {
    auto& s = w_.stats;
    if (w_.ledger.total() != w_.ledger.minted()) s.ledger_conserved = false;
    for (std::size_t p = 0; p < w_.ledger.size(); ++p) {
      s.min_balance = std::min(s.min_balance, w_.ledger.balance(static_cast<PeerId>(p)));
    }
  }
};

}  // namespace

double sample_wait(const ArrivalProcess& process, Rng& rng) {
  switch (process.distribution) {
    case WaitDistribution::kExponential: {
      // Redraw the measure-zero exact zero so samples stay strictly positive.
      double x = 0.0;
      while (!(x > 0.0)) x = rng.exponential(process.mean_wait_s);
      return x;
    }
    case WaitDistribution::kFixed: return process.mean_wait_s;
    case WaitDistribution::kUniform: return 2.0 * process.mean_wait_s * rng.uniform_open_closed();
  }
  return process.mean_wait_s;
}

World init_world(const ScenarioConfig& config) {
  if (auto v = validate(config); !v.empty()) throw ConfigError(std::move(v));
  graph::SocialGraph g;
  if (config.node_count > 0) {
    const auto seed = derive_seed(config.seed, "graph");
    g = config.graph_model == GraphModel::kBa ? graph::generate_ba(config.node_count, config.ba, seed)
                                              : graph::generate_toivonen(config.node_count, config.to, seed);
    g = graph::assign_sat_peers(std::move(g), config.sat_ratio, derive_seed(config.seed, "sat"));
  }
  return init_world(config, std::move(g));
}

World init_world(const ScenarioConfig& config, graph::SocialGraph graph) {
  if (auto v = validate(config); !v.empty()) throw ConfigError(std::move(v));
  World w;
  w.config = config;
  w.graph = std::move(graph);
  const std::size_t n = w.graph.node_count();
  const std::size_t total = n + config.seeders;

  Rng profile_rng(derive_seed(config.seed, "profiles"));
  auto init = config.profile_init;
  init.categories = config.categories;
  w.profiles = prefs::initialize_profiles(n, init, profile_rng);

  w.catalog = make_catalog(config.catalog_items, config.categories, config.file_size_bytes, config.piece_size_bytes);
  w.items_by_category.assign(config.categories, {});
  for (const auto& item : w.catalog) w.items_by_category[item.category].push_back(item.item_id);

  w.peers.resize(total);
  w.holders.assign(w.catalog.size(), {});
  w.holder_slot.assign(w.catalog.size(), std::vector<std::uint32_t>(total, kAbsent));
  for (std::size_t p = 0; p < total; ++p) {
    auto& peer = w.peers[p];
    peer.peer_id = static_cast<PeerId>(p);
    if (p < n) {
      peer.sat_enabled = w.graph.sat_enabled(static_cast<graph::NodeId>(p));
      continue;
    }
    peer.seeder = true;
    for (const auto& item : w.catalog) {
      peer.cache.emplace(item.item_id, PieceSet(item.piece_count(), true));
      peer.completed.insert(item.item_id);
      w.holder_slot[item.item_id][p] = static_cast<std::uint32_t>(w.holders[item.item_id].size());
      w.holders[item.item_id].push_back(static_cast<PeerId>(p));
    }
  }
  w.ledger = protocol::CreditLedger(total, config.credit_limit);
  w.schedule.transponder_bps = config.transponder_bps;
  w.user_download.assign(n, 0);
  w.upload_slots_used.assign(total, 0);
  w.clock = SimClock(static_cast<double>(config.step_s));
  w.link = {config.download_bps / 8.0, config.upload_bps / 8.0};
  w.arrivals = {config.wait_mean_s, config.wait_distribution};
  w.cache_capacity_bytes = std::uint64_t{config.cache_items} * config.file_size_bytes;

  w.arrival_rng = Rng(derive_seed(config.seed, "arrivals"));
  w.mi_rng = Rng(derive_seed(config.seed, "mi"));
  w.protocol_rng = Rng(derive_seed(config.seed, "protocol"));
  w.feedback_rng = Rng(derive_seed(config.seed, "feedback"));

  for (std::size_t p = 0; p < n; ++p) w.peers[p].idle_until = sample_wait(w.arrivals, w.arrival_rng);
  return w;
}

void tick(World& world) {
  Engine(world).step();
  world.clock.advance();
  ++world.stats.steps;
}

void run_simulation(World& world) {
  const double step = world.clock.step_s();
  const auto steps = static_cast<std::uint64_t>(std::ceil(world.config.duration_s / step - 1e-9));
  while (world.clock.step() < steps) tick(world);
}

}  // namespace sst::sim
