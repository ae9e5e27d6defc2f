#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

namespace sst {

using ItemId = std::uint32_t;
using CategoryId = std::uint32_t;

inline constexpr std::uint64_t kMiB = std::uint64_t{1} << 20;

struct ContentItem {
  ItemId item_id = 0;
  CategoryId category = 0;
  std::uint64_t size_bytes = 100 * kMiB;
  std::uint64_t piece_size_bytes = kMiB;

  std::uint32_t piece_count() const {
    return static_cast<std::uint32_t>((size_bytes + piece_size_bytes - 1) / piece_size_bytes);
  }
  // The last piece may be short.
  std::uint64_t piece_bytes(std::uint32_t piece) const {
    const std::uint64_t start = static_cast<std::uint64_t>(piece) * piece_size_bytes;
    return std::min(piece_size_bytes, size_bytes - start);
  }
};

using Catalog = std::vector<ContentItem>;

// Items spread round-robin over the categories: item i belongs to category
// i % categories.
inline Catalog make_catalog(std::uint32_t items, std::uint32_t categories, std::uint64_t size_bytes,
                            std::uint64_t piece_size_bytes) {
  Catalog catalog;
  catalog.reserve(items);
  for (std::uint32_t i = 0; i < items; ++i) {
    catalog.push_back(ContentItem{i, i % categories, size_bytes, piece_size_bytes});
  }
  return catalog;
}

}  // namespace sst
