#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace sst::sim {

inline constexpr std::uint32_t kNoGroup = 0xffffffffu;

// One unicast stream from an uploader to a downloader. `group` ties several
// flows to a shared budget (e.g. the bytes a download still needs); `cap`
// bounds the flow alone.
struct FlowRequest {
  std::uint32_t uploader = 0;
  std::uint32_t downloader = 0;
  std::uint32_t group = kNoGroup;
  double cap = std::numeric_limits<double>::infinity();
  bool priority = false;
};

struct BandwidthCaps {
  std::vector<double> upload;    // per peer
  std::vector<double> download;  // per peer
  std::vector<double> group;     // per group id
};

// Max-min fair rates under the upload, download, group and per-flow caps.
// Priority flows are filled first; the rest share what remains.
std::vector<double> allocate_bandwidth(std::span<const FlowRequest> flows, const BandwidthCaps& caps);

}  // namespace sst::sim
