#include "sst/bandwidth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <tuple>

namespace sst::sim {

namespace {

// Progressive filling over one class of flows. Every unfrozen flow rises at
// the same water level; a resource saturates at
//   level = (capacity - frozen usage) / unfrozen flows through it,
// and the lowest such level freezes that resource's flows. Stale heap
// entries are skipped by version number.
void fill_class(std::span<const FlowRequest> flows, std::span<const std::uint32_t> members,
                std::vector<double>& upload, std::vector<double>& download, std::vector<double>& group,
                std::vector<double>& rates) {
  if (members.empty()) return;
  const std::size_t nu = upload.size();
  const std::size_t nd = download.size();
  const std::size_t ng = group.size();
  const std::size_t base_flow = nu + nd + ng;
  const std::size_t resources = base_flow + members.size();

  auto capacity_of = [&](std::size_t r) -> double& {
    if (r < nu) return upload[r];
    if (r < nu + nd) return download[r - nu];
    return group[r - nu - nd];
  };

  // CSR adjacency resource -> member slots.
  std::vector<std::uint32_t> degree(resources, 0);
  std::vector<std::array<std::uint32_t, 4>> touches(members.size());
  std::vector<std::uint8_t> touch_count(members.size(), 0);
  for (std::size_t k = 0; k < members.size(); ++k) {
    const auto& f = flows[members[k]];
    if (f.uploader >= nu || f.downloader >= nd) throw std::out_of_range("flow endpoint beyond caps");
    auto& t = touches[k];
    std::uint8_t c = 0;
    t[c++] = f.uploader;
    t[c++] = static_cast<std::uint32_t>(nu + f.downloader);
    if (f.group != kNoGroup) {
      if (f.group >= ng) throw std::out_of_range("flow group beyond caps");
      t[c++] = static_cast<std::uint32_t>(nu + nd + f.group);
    }
    if (std::isfinite(f.cap)) t[c++] = static_cast<std::uint32_t>(base_flow + k);
    touch_count[k] = c;
    for (std::uint8_t i = 0; i < c; ++i) ++degree[t[i]];
  }
  std::vector<std::uint32_t> offset(resources + 1, 0);
  for (std::size_t r = 0; r < resources; ++r) offset[r + 1] = offset[r] + degree[r];
  std::vector<std::uint32_t> slots(offset.back());
  std::vector<std::uint32_t> cursor(offset.begin(), offset.end() - 1);
  for (std::size_t k = 0; k < members.size(); ++k) {
    for (std::uint8_t i = 0; i < touch_count[k]; ++i) slots[cursor[touches[k][i]]++] = static_cast<std::uint32_t>(k);
  }

  std::vector<double> cap(resources);
  for (std::size_t r = 0; r < base_flow; ++r) cap[r] = std::max(0.0, capacity_of(r));
  for (std::size_t k = 0; k < members.size(); ++k) cap[base_flow + k] = std::max(0.0, flows[members[k]].cap);
  std::vector<double> frozen_use(resources, 0.0);
  std::vector<std::uint32_t> active(degree.begin(), degree.end());
  std::vector<std::uint32_t> version(resources, 0);
  std::vector<std::uint8_t> frozen(members.size(), 0);

  using Entry = std::tuple<double, std::uint32_t, std::uint32_t>;  // level, resource, version
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  auto level_of = [&](std::size_t r) { return std::max(0.0, cap[r] - frozen_use[r]) / active[r]; };
  for (std::size_t r = 0; r < resources; ++r) {
    if (active[r] > 0) heap.emplace(level_of(r), static_cast<std::uint32_t>(r), 0);
  }

  double level = 0.0;
  while (!heap.empty()) {
    auto [at, r, ver] = heap.top();
    heap.pop();
    if (ver != version[r] || active[r] == 0) continue;
    level = std::max(level, at);
    for (std::uint32_t s = offset[r]; s < offset[r + 1]; ++s) {
      const std::uint32_t k = slots[s];
      if (frozen[k]) continue;
      frozen[k] = 1;
      rates[members[k]] = level;
      for (std::uint8_t i = 0; i < touch_count[k]; ++i) {
        const std::uint32_t other = touches[k][i];
        frozen_use[other] += level;
        --active[other];
        ++version[other];
        if (other != r && active[other] > 0) heap.emplace(level_of(other), other, version[other]);
      }
    }
  }

  for (std::size_t r = 0; r < base_flow; ++r) capacity_of(r) = std::max(0.0, capacity_of(r) - frozen_use[r]);
}

}  // namespace

std::vector<double> allocate_bandwidth(std::span<const FlowRequest> flows, const BandwidthCaps& caps) {
  std::vector<double> rates(flows.size(), 0.0);
  std::vector<double> upload = caps.upload;
  std::vector<double> download = caps.download;
  std::vector<double> group = caps.group;
  std::vector<std::uint32_t> first, rest;
  for (std::size_t i = 0; i < flows.size(); ++i) {
    (flows[i].priority ? first : rest).push_back(static_cast<std::uint32_t>(i));
  }
  fill_class(flows, first, upload, download, group, rates);
  fill_class(flows, rest, upload, download, group, rates);
  return rates;
}

}  // namespace sst::sim
