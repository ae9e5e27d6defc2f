#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "sst/bandwidth.hpp"
#include "sst/rng.hpp"

namespace {

using namespace sst::sim;

// Textbook water-filling: raise every live flow by the smallest headroom
// share, freeze flows on exhausted resources, repeat.
void reference_class(const std::vector<FlowRequest>& flows, const std::vector<std::size_t>& members,
                     std::vector<double>& up, std::vector<double>& down, std::vector<double>& grp,
                     std::vector<double>& rates) {
  std::vector<bool> live(flows.size(), false);
  std::vector<double> own(flows.size(), 0.0);
  for (auto i : members) live[i] = true;
  for (auto i : members) own[i] = flows[i].cap;
  const double eps = 1e-9;
  while (true) {
    std::vector<int> nu(up.size(), 0), nd(down.size(), 0), ng(grp.size(), 0);
    int any = 0;
    for (auto i : members) {
      if (!live[i]) continue;
      ++any;
      ++nu[flows[i].uploader];
      ++nd[flows[i].downloader];
      if (flows[i].group != kNoGroup) ++ng[flows[i].group];
    }
    if (!any) break;
    double delta = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < up.size(); ++r) if (nu[r]) delta = std::min(delta, up[r] / nu[r]);
    for (std::size_t r = 0; r < down.size(); ++r) if (nd[r]) delta = std::min(delta, down[r] / nd[r]);
    for (std::size_t r = 0; r < grp.size(); ++r) if (ng[r]) delta = std::min(delta, grp[r] / ng[r]);
    for (auto i : members) if (live[i]) delta = std::min(delta, own[i]);
    delta = std::max(0.0, delta);
    for (auto i : members) {
      if (!live[i]) continue;
      rates[i] += delta;
      own[i] -= delta;
      up[flows[i].uploader] -= delta;
      down[flows[i].downloader] -= delta;
      if (flows[i].group != kNoGroup) grp[flows[i].group] -= delta;
    }
    for (auto i : members) {
      if (!live[i]) continue;
      const auto& f = flows[i];
      if (own[i] <= eps || up[f.uploader] <= eps || down[f.downloader] <= eps ||
          (f.group != kNoGroup && grp[f.group] <= eps)) {
        live[i] = false;
      }
    }
  }
}

std::vector<double> reference(const std::vector<FlowRequest>& flows, const BandwidthCaps& caps) {
  std::vector<double> rates(flows.size(), 0.0);
  auto up = caps.upload, down = caps.download, grp = caps.group;
  std::vector<std::size_t> first, rest;
  for (std::size_t i = 0; i < flows.size(); ++i) (flows[i].priority ? first : rest).push_back(i);
  reference_class(flows, first, up, down, grp, rates);
  reference_class(flows, rest, up, down, grp, rates);
  return rates;
}

TEST(Allocate, OneUploaderTwoDownloaders) {
  const std::vector<FlowRequest> flows{{0, 1}, {0, 2}};
  BandwidthCaps caps{{125000, 1e9, 1e9}, {1e6, 1e6, 1e6}, {}};
  const auto r = allocate_bandwidth(flows, caps);
  EXPECT_DOUBLE_EQ(r[0], 62500);
  EXPECT_DOUBLE_EQ(r[1], 62500);
}

TEST(Allocate, DownloaderCapsEightUploaders) {
  std::vector<FlowRequest> flows;
  BandwidthCaps caps;
  caps.upload.assign(10, 125000.0 * 2);
  caps.download.assign(10, 1e6);
  for (std::uint32_t u = 1; u <= 9; ++u) flows.push_back({u, 0});
  const auto r = allocate_bandwidth(flows, caps);
  double total = 0.0;
  for (double x : r) total += x;
  EXPECT_NEAR(total, 1e6, 1e-6);
}

TEST(Allocate, TwoHelpersPlusSourcesCappedAtDownlink) {
  // 2 helpers at full 1 Mbit upload plus 10 other sources into an 8 Mbit
  // downlink.
  std::vector<FlowRequest> flows;
  BandwidthCaps caps;
  caps.upload.assign(13, 125000.0);
  caps.download.assign(13, 1e6);
  flows.push_back({1, 0, kNoGroup, std::numeric_limits<double>::infinity(), true});
  flows.push_back({2, 0, kNoGroup, std::numeric_limits<double>::infinity(), true});
  for (std::uint32_t u = 3; u < 13; ++u) flows.push_back({u, 0});
  const auto r = allocate_bandwidth(flows, caps);
  EXPECT_DOUBLE_EQ(r[0], 125000.0);
  EXPECT_DOUBLE_EQ(r[1], 125000.0);
  double total = 0.0;
  for (double x : r) total += x;
  EXPECT_NEAR(total, 1e6, 1e-6);
}

TEST(Allocate, GroupAndFlowCaps) {
  const std::vector<FlowRequest> flows{{0, 2, 0}, {1, 2, 0}, {0, 3, kNoGroup, 10.0}};
  BandwidthCaps caps{{100, 100, 0, 0}, {0, 0, 1000, 1000}, {30}};
  const auto r = allocate_bandwidth(flows, caps);
  EXPECT_DOUBLE_EQ(r[0], 15);
  EXPECT_DOUBLE_EQ(r[1], 15);
  EXPECT_DOUBLE_EQ(r[2], 10);
}

TEST(Allocate, EmptyInput) {
  EXPECT_TRUE(allocate_bandwidth({}, BandwidthCaps{}).empty());
}

TEST(Allocate, MatchesWaterFillingOracle) {
  sst::Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t peers = 4 + rng.below(8);
    const std::size_t groups = rng.below(4);
    BandwidthCaps caps;
    for (std::size_t p = 0; p < peers; ++p) {
      caps.upload.push_back(10 + rng.below(200));
      caps.download.push_back(50 + rng.below(800));
    }
    for (std::size_t g = 0; g < groups; ++g) caps.group.push_back(5 + rng.below(300));
    std::vector<FlowRequest> flows;
    const std::size_t n = 20;
    for (std::size_t i = 0; i < n; ++i) {
      FlowRequest f;
      f.uploader = static_cast<std::uint32_t>(rng.below(peers));
      do f.downloader = static_cast<std::uint32_t>(rng.below(peers));
      while (f.downloader == f.uploader);
      if (groups && rng.bernoulli(0.5)) f.group = static_cast<std::uint32_t>(rng.below(groups));
      if (rng.bernoulli(0.3)) f.cap = 1 + rng.below(100);
      f.priority = rng.bernoulli(0.15);
      flows.push_back(f);
    }
    const auto got = allocate_bandwidth(flows, caps);
    const auto want = reference(flows, caps);
    for (std::size_t i = 0; i < n; ++i) ASSERT_NEAR(got[i], want[i], 1e-7 * (1 + want[i])) << "trial " << trial;

    // caps hold
    std::vector<double> up(peers, 0), down(peers, 0);
    for (std::size_t i = 0; i < n; ++i) {
      up[flows[i].uploader] += got[i];
      down[flows[i].downloader] += got[i];
      ASSERT_LE(got[i], flows[i].cap + 1e-9);
    }
    for (std::size_t p = 0; p < peers; ++p) {
      ASSERT_LE(up[p], caps.upload[p] * (1 + 1e-12));
      ASSERT_LE(down[p], caps.download[p] * (1 + 1e-12));
    }
  }
}

TEST(Allocate, WorkConserving) {
  // Every flow ends with at least one saturated constraint.
  sst::Rng rng(5);
  BandwidthCaps caps;
  for (int p = 0; p < 6; ++p) {
    caps.upload.push_back(100 + rng.below(100));
    caps.download.push_back(100 + rng.below(300));
  }
  std::vector<FlowRequest> flows;
  for (std::uint32_t u = 0; u < 6; ++u)
    for (std::uint32_t d = 0; d < 6; ++d)
      if (u != d && rng.bernoulli(0.5)) flows.push_back({u, d});
  const auto r = allocate_bandwidth(flows, caps);
  std::vector<double> up(6, 0), down(6, 0);
  for (std::size_t i = 0; i < flows.size(); ++i) {
    up[flows[i].uploader] += r[i];
    down[flows[i].downloader] += r[i];
  }
  for (std::size_t i = 0; i < flows.size(); ++i) {
    EXPECT_GT(r[i], 0.0);
    const bool bottleneck = std::abs(up[flows[i].uploader] - caps.upload[flows[i].uploader]) < 1e-6 ||
                            std::abs(down[flows[i].downloader] - caps.download[flows[i].downloader]) < 1e-6;
    EXPECT_TRUE(bottleneck);
  }
}

}  // namespace
