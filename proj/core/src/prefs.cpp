#include "sst/prefs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>

namespace sst::prefs {

PreferenceProfile::PreferenceProfile(std::initializer_list<Entry> entries) {
  for (const auto& e : entries) set(e.category, e.quantifier);
}

std::optional<double> PreferenceProfile::quantifier(CategoryId category) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), category,
                             [](const Entry& e, CategoryId c) { return e.category < c; });
  if (it == entries_.end() || it->category != category) return std::nullopt;
  return it->quantifier;
}

void PreferenceProfile::set(CategoryId category, double q) {
  if (!(q > 0.0 && q <= 1.0)) {
    throw std::domain_error("quantifier " + std::to_string(q) + " for category " + std::to_string(category) +
                            " outside (0, 1]");
  }
  auto it = std::lower_bound(entries_.begin(), entries_.end(), category,
                             [](const Entry& e, CategoryId c) { return e.category < c; });
  if (it != entries_.end() && it->category == category) {
    it->quantifier = q;
  } else {
    entries_.insert(it, Entry{category, q});
  }
}

NeighborhoodStats neighborhood_stats(const SocialGraph& graph, Profiles profiles, NodeId node) {
  NeighborhoodStats stats;
  for (NodeId buddy : graph.neighbors(node)) {
    for (const auto& e : profiles[buddy].entries()) {
      auto& s = stats[e.category];
      ++s.occurrences;
      s.quantifier_sum += e.quantifier;
    }
  }
  return stats;
}

std::string_view to_string(MiModel model) {
  switch (model) {
    case MiModel::kMi1: return "MI1";
    case MiModel::kMi2: return "MI2";
    case MiModel::kMi3: return "MI3";
    case MiModel::kMi4: return "MI4";
  }
  return "?";
}

std::optional<MiModel> parse_mi_model(std::string_view text) {
  if (text == "MI1" || text == "mi1") return MiModel::kMi1;
  if (text == "MI2" || text == "mi2") return MiModel::kMi2;
  if (text == "MI3" || text == "mi3") return MiModel::kMi3;
  if (text == "MI4" || text == "mi4") return MiModel::kMi4;
  return std::nullopt;
}

namespace {

struct Candidate {
  CategoryId category;
  CategoryStat stat;
};

// Applies the aggregated update: insert at the neighbourhood mean, or
// reinforce with Q_sum / F.
void influence_with(PreferenceProfile& profile, CategoryId category, double quantifier_sum,
                    std::uint32_t occurrences) {
  const double mean = quantifier_sum / static_cast<double>(occurrences);
  if (auto q = profile.quantifier(category)) {
    profile.set(category, std::min(1.0, reinforce(*q, mean)));
  } else {
    profile.set(category, std::min(1.0, mean));
  }
}

// Top three by `better`, then one of them with probability proportional to
// its occurrence count. Candidates are drawn in category order so the draw
// only depends on which categories made the cut.
template <class Better>
void influence_top_three(PreferenceProfile& profile, const NeighborhoodStats& stats, Rng& rng, Better better) {
  std::vector<Candidate> candidates;
  candidates.reserve(stats.size());
  for (const auto& [c, s] : stats) candidates.push_back({c, s});
  const std::size_t keep = std::min<std::size_t>(3, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                    candidates.end(), better);
  candidates.resize(keep);
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) { return a.category < b.category; });
  std::vector<double> weights;
  weights.reserve(keep);
  for (const auto& c : candidates) weights.push_back(static_cast<double>(c.stat.occurrences));
  const auto& chosen = candidates[rng.weighted_index(weights)];
  influence_with(profile, chosen.category, chosen.stat.quantifier_sum, chosen.stat.occurrences);
}

}  // namespace

PreferenceProfile apply_influence(MiModel model, const SocialGraph& graph, Profiles profiles, NodeId node,
                                  Rng& rng) {
  PreferenceProfile profile = profiles[node];
  const auto buddies = graph.neighbors(node);
  if (buddies.empty()) return profile;

  switch (model) {
    case MiModel::kMi1: {
      const auto stats = neighborhood_stats(graph, profiles, node);
      if (stats.empty()) return profile;
      influence_top_three(profile, stats, rng, [](const Candidate& a, const Candidate& b) {
        if (a.stat.quantifier_sum != b.stat.quantifier_sum) return a.stat.quantifier_sum > b.stat.quantifier_sum;
        return a.category < b.category;
      });
      return profile;
    }
    case MiModel::kMi2: {
      const auto stats = neighborhood_stats(graph, profiles, node);
      if (stats.empty()) return profile;
      influence_top_three(profile, stats, rng, [](const Candidate& a, const Candidate& b) {
        if (a.stat.occurrences != b.stat.occurrences) return a.stat.occurrences > b.stat.occurrences;
        if (a.stat.quantifier_sum != b.stat.quantifier_sum) return a.stat.quantifier_sum > b.stat.quantifier_sum;
        return a.category < b.category;
      });
      return profile;
    }
    case MiModel::kMi3: {
      double q_max = 0.0;
      std::vector<CategoryId> best;
      for (NodeId b : buddies) {
        for (const auto& e : profiles[b].entries()) {
          if (e.quantifier > q_max) {
            q_max = e.quantifier;
            best.assign(1, e.category);
          } else if (e.quantifier == q_max && std::find(best.begin(), best.end(), e.category) == best.end()) {
            best.push_back(e.category);
          }
        }
      }
      if (best.empty()) return profile;
      std::sort(best.begin(), best.end());
      const CategoryId c = best[rng.below(best.size())];
      if (auto q = profile.quantifier(c)) {
        profile.set(c, std::min(1.0, reinforce(*q, q_max)));
      } else {
        profile.set(c, 0.5 * q_max);
      }
      return profile;
    }
    case MiModel::kMi4: {
      const NodeId b = buddies[rng.below(buddies.size())];
      const auto entries = profiles[b].entries();
      if (entries.empty()) return profile;
      const auto& picked = entries[rng.below(entries.size())];
      if (auto q = profile.quantifier(picked.category)) {
        std::uint32_t occurrences = 0;
        for (NodeId other : buddies) occurrences += profiles[other].contains(picked.category) ? 1 : 0;
        const double influence = picked.quantifier / static_cast<double>(std::max<std::uint32_t>(1, occurrences));
        profile.set(picked.category, std::min(1.0, reinforce(*q, influence)));
      } else {
        profile.set(picked.category, 0.5 * picked.quantifier);
      }
      return profile;
    }
  }
  return profile;
}

double feedback_step(double q, double strength, bool negative, double floor) {
  const double moved = negative ? q - strength * q : q + strength * (1.0 - q);
  return std::clamp(moved, floor, 1.0);
}

PreferenceProfile apply_download_feedback(PreferenceProfile profile, CategoryId category, bool negative,
                                          const FeedbackParams& params) {
  const auto q = profile.quantifier(category);
  if (!q && negative) return profile;
  const std::size_t variety = profile.size() + (q ? 0 : 1);
  const double strength = params.base_strength / static_cast<double>(variety);
  profile.set(category, feedback_step(q.value_or(0.0), strength, negative, params.floor));
  return profile;
}

double similarity(const PreferenceProfile& a, const PreferenceProfile& b) {
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (const auto& e : a.entries()) {
    na += e.quantifier * e.quantifier;
    dot += e.quantifier * b.quantifier_or_zero(e.category);
  }
  for (const auto& e : b.entries()) nb += e.quantifier * e.quantifier;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
}

std::vector<double> category_demand(const SocialGraph& graph, Profiles profiles, NodeId node,
                                    std::uint32_t categories, const DemandWeights& weights) {
  std::vector<double> score(categories, 0.0);
  for (const auto& e : profiles[node].entries()) {
    if (e.category < categories) score[e.category] += weights.self * e.quantifier;
  }
  const auto buddies = graph.neighbors(node);
  if (!buddies.empty()) {
    const double per_buddy = weights.buddy / static_cast<double>(buddies.size());
    for (NodeId b : buddies) {
      for (const auto& e : profiles[b].entries()) {
        if (e.category < categories) score[e.category] += per_buddy * e.quantifier;
      }
    }
  }
  return score;
}

std::vector<ItemId> predict_demand(const SocialGraph& graph, Profiles profiles, NodeId node,
                                   const Catalog& catalog, std::span<const ItemId> excluded,
                                   const DemandWeights& weights) {
  CategoryId categories = 0;
  for (const auto& item : catalog) categories = std::max(categories, item.category + 1);
  const auto score = category_demand(graph, profiles, node, categories, weights);

  std::vector<std::pair<double, ItemId>> ranked;
  ranked.reserve(catalog.size());
  for (const auto& item : catalog) {
    if (std::find(excluded.begin(), excluded.end(), item.item_id) != excluded.end()) continue;
    ranked.emplace_back(score[item.category], item.item_id);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<ItemId> out;
  out.reserve(ranked.size());
  for (const auto& r : ranked) out.push_back(r.second);
  return out;
}

std::vector<PreferenceProfile> initialize_profiles(std::size_t nodes, const ProfileInit& init, Rng& rng) {
  if (init.min_entries > init.max_entries || init.max_entries > init.categories) {
    throw std::invalid_argument("initialize_profiles: inconsistent entry bounds");
  }
  std::vector<PreferenceProfile> profiles(nodes);
  std::vector<CategoryId> pool(init.categories);
  for (auto& profile : profiles) {
    const auto k = static_cast<std::size_t>(rng.between(init.min_entries, init.max_entries));
    for (CategoryId c = 0; c < init.categories; ++c) pool[c] = c;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + rng.below(pool.size() - i);
      std::swap(pool[i], pool[j]);
      profile.set(pool[i], rng.uniform_open_closed());
    }
  }
  return profiles;
}

void write_profiles(std::ostream& out, Profiles profiles) {
  out << "node,category,quantifier\n";
  char buf[64];
  for (std::size_t n = 0; n < profiles.size(); ++n) {
    for (const auto& e : profiles[n].entries()) {
      std::snprintf(buf, sizeof buf, "%zu,%u,%.6f\n", n, e.category, e.quantifier);
      out << buf;
    }
  }
}

}  // namespace sst::prefs
