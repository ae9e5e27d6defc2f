#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sst/content.hpp"
#include "sst/graph.hpp"
#include "sst/protocol.hpp"

namespace sst::metrics {

using protocol::PeerId;

struct DownloadRecord {
  PeerId peer_id = 0;
  ItemId item_id = 0;
  double request_time = 0.0;
  double completion_time = 0.0;
  std::uint64_t bytes_from_friends = 0;
  std::uint64_t bytes_from_non_friends = 0;
  // Pieces already cached at request time plus satellite deliveries.
  std::uint64_t bytes_from_broadcast_cache = 0;
  bool was_prefetch = false;

  double duration() const { return completion_time - request_time; }
  std::uint64_t total_bytes() const {
    return bytes_from_friends + bytes_from_non_friends + bytes_from_broadcast_cache;
  }
  friend bool operator==(const DownloadRecord&, const DownloadRecord&) = default;
};

struct TimeSeriesPoint {
  double bucket_end_time = 0.0;
  std::optional<double> mean_duration_seconds;  // empty when no completions
  std::uint64_t non_friend_bytes = 0;
  std::uint64_t completed_count = 0;
};

// Mean duration of user downloads completed in each bucket. Prefetch records
// are skipped. The series spans from 0 to the last completion.
std::vector<TimeSeriesPoint> duration_series(std::span<const DownloadRecord> records, double bucket_seconds);

// Bytes of unicast transfers between non-buddies per bucket. Broadcast
// deliveries are excluded. `horizon` extends the series with empty buckets.
std::vector<TimeSeriesPoint> non_friend_upload_series(std::span<const protocol::TransferRecord> log,
                                                      double bucket_seconds, double horizon = 0.0);

struct FilesPerUserPoint {
  double bucket_end_time = 0.0;
  double mean_files = 0.0;
};

// Cumulative completed user downloads per peer, bucketed.
std::vector<FilesPerUserPoint> files_per_user(std::span<const DownloadRecord> records, std::size_t peers,
                                              double bucket_seconds, double horizon = 0.0);
double files_per_user_total(std::span<const DownloadRecord> records, std::size_t peers);

// Product-moment correlation. Empty for mismatched or short input and for
// zero variance in either series.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

struct SatCorrelations {
  std::optional<double> duration_vs_sat_flag;
  std::optional<double> duration_vs_sat_friend_count;
};

SatCorrelations sat_correlations(std::span<const DownloadRecord> records, const graph::SocialGraph& graph);

double mean_duration(std::span<const DownloadRecord> records);

// Least-squares slope of bucket mean durations whose bucket end lies after
// `from_time`. Empty when fewer than two such buckets have data.
std::optional<double> duration_slope(std::span<const TimeSeriesPoint> series, double from_time);

struct TrafficTotals {
  std::uint64_t total = 0;
  std::uint64_t friend_unicast = 0;
  std::uint64_t non_friend_unicast = 0;
  std::uint64_t broadcast = 0;
};
TrafficTotals traffic_totals(std::span<const protocol::TransferRecord> log);

// Log replay checks.
struct AuditInput {
  std::size_t social_peers = 0;
  std::size_t seeders = 0;
  const Catalog* catalog = nullptr;
  double step_s = 60.0;
  double upload_bytes_per_s = 0.0;
  double download_bytes_per_s = 0.0;
};

struct AuditReport {
  bool piece_conservation = true;
  bool bandwidth_caps = true;
  bool byte_accounting = true;
  std::vector<std::string> violations;
  bool ok() const { return piece_conservation && bandwidth_caps && byte_accounting; }
};

AuditReport audit(std::span<const protocol::TransferRecord> log, std::span<const DownloadRecord> records,
                  const AuditInput& input);

// CSV writers and readers. Header row, comma-separated, LF endings.
void write_durations_csv(std::ostream& out, std::span<const TimeSeriesPoint> series);
void write_nonfriend_csv(std::ostream& out, std::span<const TimeSeriesPoint> series);
void write_files_per_user_csv(std::ostream& out, std::span<const FilesPerUserPoint> series);
void write_transfer_log_csv(std::ostream& out, std::span<const protocol::TransferRecord> log);
void write_downloads_csv(std::ostream& out, std::span<const DownloadRecord> records);
protocol::TransferLog read_transfer_log_csv(std::istream& in);
std::vector<DownloadRecord> read_downloads_csv(std::istream& in);

std::string format_number(double value);
std::string format_optional(const std::optional<double>& value);

}  // namespace sst::metrics
