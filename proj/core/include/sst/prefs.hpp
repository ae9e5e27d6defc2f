#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sst/content.hpp"
#include "sst/graph.hpp"
#include "sst/rng.hpp"

namespace sst::prefs {

using graph::NodeId;
using graph::SocialGraph;

// Map from category to quantifier Q with 0 < Q <= 1. Stored sorted by
// category.
class PreferenceProfile {
 public:
  struct Entry {
    CategoryId category;
    double quantifier;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  PreferenceProfile() = default;
  PreferenceProfile(std::initializer_list<Entry> entries);

  std::optional<double> quantifier(CategoryId category) const;
  double quantifier_or_zero(CategoryId category) const { return quantifier(category).value_or(0.0); }
  bool contains(CategoryId category) const { return quantifier(category).has_value(); }

  // Inserts or overwrites. Throws std::domain_error unless 0 < q <= 1.
  void set(CategoryId category, double q);

  std::span<const Entry> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  friend bool operator==(const PreferenceProfile&, const PreferenceProfile&) = default;

 private:
  std::vector<Entry> entries_;
};

using Profiles = std::span<const PreferenceProfile>;

struct CategoryStat {
  std::uint32_t occurrences = 0;  // F(C, n): buddies holding C
  double quantifier_sum = 0.0;    // Q_sum(C, n)
};
using NeighborhoodStats = std::map<CategoryId, CategoryStat>;

NeighborhoodStats neighborhood_stats(const SocialGraph& graph, Profiles profiles, NodeId node);

enum class MiModel { kMi1, kMi2, kMi3, kMi4 };

std::string_view to_string(MiModel model);
std::optional<MiModel> parse_mi_model(std::string_view text);

// Q + influence * (1 - Q). The influence term is Q_sum / F for the
// aggregated rules and Q(C, b) / F for the random-buddy rule.
inline double reinforce(double q, double influence) { return q + influence * (1.0 - q); }

// Unconditional mutual-influence update of `node` from its buddies. A node
// without buddies is returned unchanged.
PreferenceProfile apply_influence(MiModel model, const SocialGraph& graph, Profiles profiles, NodeId node,
                                  Rng& rng);

struct FeedbackParams {
  double base_strength = 0.5;  // s0; the step is s0 / |entries|
  double floor = 1e-6;         // lower clamp keeping Q > 0
};

// One feedback move: toward 1 by strength * (1 - q), or toward 0 by
// strength * q, clamped to [floor, 1].
double feedback_step(double q, double strength, bool negative, double floor);

// Post-download opinion change for `category`. A positive change on a
// category the profile lacks inserts it at the step size; a negative one is
// ignored.
PreferenceProfile apply_download_feedback(PreferenceProfile profile, CategoryId category, bool negative,
                                          const FeedbackParams& params);

// Cosine similarity of the quantifier vectors.
double similarity(const PreferenceProfile& a, const PreferenceProfile& b);

struct DemandWeights {
  double self = 0.7;
  double buddy = 0.3;
};

// Per-category demand score: self * Q(C, node) + buddy * mean over buddies
// of Q(C, buddy), missing entries counting as 0.
std::vector<double> category_demand(const SocialGraph& graph, Profiles profiles, NodeId node,
                                    std::uint32_t categories, const DemandWeights& weights);

// Catalog items by descending demand score, ties by ascending id, skipping
// `excluded`.
std::vector<ItemId> predict_demand(const SocialGraph& graph, Profiles profiles, NodeId node,
                                   const Catalog& catalog, std::span<const ItemId> excluded,
                                   const DemandWeights& weights);

struct ProfileInit {
  std::uint32_t categories = 100;
  std::uint32_t min_entries = 3;
  std::uint32_t max_entries = 10;
};

// Each profile gets k ~ U{min, max} distinct categories with Q ~ U(0, 1].
std::vector<PreferenceProfile> initialize_profiles(std::size_t nodes, const ProfileInit& init, Rng& rng);

// "node,category,quantifier" rows, quantifier with 6 decimals.
void write_profiles(std::ostream& out, Profiles profiles);

}  // namespace sst::prefs
