#include "sst/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "sst/errors.hpp"

namespace sst::metrics {

namespace {

using protocol::PieceSet;
using protocol::TransferKind;

// Bucket b covers (b*width, (b+1)*width]; an event stamped at a bucket's end
// time belongs to that bucket.
std::size_t bucket_of(double t, double width) {
  return t <= 0.0 ? 0 : static_cast<std::size_t>(std::ceil(t / width)) - 1;
}

std::size_t buckets_for(double horizon, double width) {
  return horizon <= 0.0 ? 0 : static_cast<std::size_t>(std::ceil(horizon / width - 1e-9));
}

void require_width(double width) {
  if (!(width > 0.0)) throw std::invalid_argument("bucket width must be positive");
}

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
T parse_int(const std::string& s, std::size_t line) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) throw ParseError(line, "bad integer '" + s + "'");
  return v;
}

double parse_real(const std::string& s, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw ParseError(line, "bad number '" + s + "'");
  return v;
}

bool parse_bool(const std::string& s, std::size_t line) {
  if (s == "1" || s == "true") return true;
  if (s == "0" || s == "false") return false;
  throw ParseError(line, "bad flag '" + s + "'");
}

}  // namespace

std::vector<TimeSeriesPoint> duration_series(std::span<const DownloadRecord> records, double bucket_seconds) {
  require_width(bucket_seconds);
  std::vector<double> sum;
  std::vector<std::uint64_t> count;
  for (const auto& r : records) {
    if (r.was_prefetch) continue;
    const std::size_t b = bucket_of(r.completion_time, bucket_seconds);
    if (b >= sum.size()) {
      sum.resize(b + 1, 0.0);
      count.resize(b + 1, 0);
    }
    sum[b] += r.duration();
    ++count[b];
  }
  std::vector<TimeSeriesPoint> out(sum.size());
  for (std::size_t b = 0; b < sum.size(); ++b) {
    out[b].bucket_end_time = static_cast<double>(b + 1) * bucket_seconds;
    out[b].completed_count = count[b];
    if (count[b] > 0) out[b].mean_duration_seconds = sum[b] / static_cast<double>(count[b]);
  }
  return out;
}

std::vector<TimeSeriesPoint> non_friend_upload_series(std::span<const protocol::TransferRecord> log,
                                                      double bucket_seconds, double horizon) {
  require_width(bucket_seconds);
  std::vector<std::uint64_t> bytes(buckets_for(horizon, bucket_seconds), 0);
  for (const auto& r : log) {
    if (r.kind == TransferKind::kBroadcast || r.friend_link) continue;
    const std::size_t b = bucket_of(r.time_s, bucket_seconds);
    if (b >= bytes.size()) bytes.resize(b + 1, 0);
    bytes[b] += r.bytes;
  }
  std::vector<TimeSeriesPoint> out(bytes.size());
  for (std::size_t b = 0; b < bytes.size(); ++b) {
    out[b].bucket_end_time = static_cast<double>(b + 1) * bucket_seconds;
    out[b].non_friend_bytes = bytes[b];
  }
  return out;
}

std::vector<FilesPerUserPoint> files_per_user(std::span<const DownloadRecord> records, std::size_t peers,
                                              double bucket_seconds, double horizon) {
  require_width(bucket_seconds);
  std::vector<std::uint64_t> count(buckets_for(horizon, bucket_seconds), 0);
  for (const auto& r : records) {
    if (r.was_prefetch) continue;
    const std::size_t b = bucket_of(r.completion_time, bucket_seconds);
    if (b >= count.size()) count.resize(b + 1, 0);
    ++count[b];
  }
  std::vector<FilesPerUserPoint> out(count.size());
  std::uint64_t running = 0;
  for (std::size_t b = 0; b < count.size(); ++b) {
    running += count[b];
    out[b].bucket_end_time = static_cast<double>(b + 1) * bucket_seconds;
    out[b].mean_files = peers == 0 ? 0.0 : static_cast<double>(running) / static_cast<double>(peers);
  }
  return out;
}

double files_per_user_total(std::span<const DownloadRecord> records, std::size_t peers) {
  if (peers == 0) return 0.0;
  const auto n = std::count_if(records.begin(), records.end(), [](const auto& r) { return !r.was_prefetch; });
  return static_cast<double>(n) / static_cast<double>(peers);
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

SatCorrelations sat_correlations(std::span<const DownloadRecord> records, const graph::SocialGraph& graph) {
  std::vector<double> duration, flag, friends;
  for (const auto& r : records) {
    if (r.was_prefetch || r.peer_id >= graph.node_count()) continue;
    duration.push_back(r.duration());
    flag.push_back(graph.sat_enabled(r.peer_id) ? 1.0 : 0.0);
    friends.push_back(static_cast<double>(graph.sat_neighbor_count(r.peer_id)));
  }
  return {pearson(duration, flag), pearson(duration, friends)};
}

double mean_duration(std::span<const DownloadRecord> records) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : records) {
    if (r.was_prefetch) continue;
    sum += r.duration();
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

std::optional<double> duration_slope(std::span<const TimeSeriesPoint> series, double from_time) {
  std::vector<double> x, y;
  for (const auto& p : series) {
    if (p.bucket_end_time > from_time && p.mean_duration_seconds) {
      x.push_back(p.bucket_end_time);
      y.push_back(*p.mean_duration_seconds);
    }
  }
  if (x.size() < 2) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

TrafficTotals traffic_totals(std::span<const protocol::TransferRecord> log) {
  TrafficTotals t;
  for (const auto& r : log) {
    t.total += r.bytes;
    if (r.kind == TransferKind::kBroadcast) {
      t.broadcast += r.bytes;
    } else if (r.friend_link) {
      t.friend_unicast += r.bytes;
    } else {
      t.non_friend_unicast += r.bytes;
    }
  }
  return t;
}

AuditReport audit(std::span<const protocol::TransferRecord> log, std::span<const DownloadRecord> records,
                  const AuditInput& input) {
  if (input.catalog == nullptr) throw std::invalid_argument("audit needs the catalog");
  const Catalog& catalog = *input.catalog;
  const std::size_t peers = input.social_peers + input.seeders;
  AuditReport report;
  auto fail = [&](bool& flag, std::string what) {
    flag = false;
    if (report.violations.size() < 20) report.violations.push_back(std::move(what));
  };

  // Pieces each peer has ever held. Evictions are not logged, so this is an
  // upper bound on what a peer may upload.
  std::unordered_map<std::uint64_t, PieceSet> held;
  auto slot = [&](PeerId p, ItemId i) -> PieceSet& {
    const std::uint64_t key = std::uint64_t{p} * catalog.size() + i;
    auto it = held.find(key);
    if (it == held.end()) it = held.emplace(key, PieceSet(catalog[i].piece_count(), p >= input.social_peers)).first;
    return it->second;
  };

  // Per step, per uploader and downloader: bytes moved and the distinct
  // (counterpart, item) streams. Each stream may bank at most one piece of
  // granted-but-unused bandwidth from earlier steps.
  struct Usage {
    double bytes = 0.0;
    std::set<std::pair<PeerId, ItemId>> streams;
  };
  std::map<std::pair<std::uint64_t, PeerId>, Usage> up, down;
  std::vector<double> up_total(peers, 0.0), down_total(peers, 0.0);
  std::vector<std::uint64_t> last_step(peers, 0);
  double max_piece = 0.0;
  for (const auto& item : catalog) max_piece = std::max(max_piece, static_cast<double>(item.piece_size_bytes));

  for (std::size_t k = 0; k < log.size(); ++k) {
    const auto& r = log[k];
    const std::string where = "record " + std::to_string(k);
    if (r.item >= catalog.size() || r.to >= peers) {
      fail(report.piece_conservation, where + ": unknown peer or item");
      continue;
    }
    const ContentItem& item = catalog[r.item];
    PieceSet& dst = slot(r.to, r.item);
    if (r.kind == TransferKind::kBroadcast) {
      if (r.from != protocol::kTransponder) fail(report.piece_conservation, where + ": broadcast not from transponder");
      dst.fill();
      continue;
    }
    if (r.from >= peers || r.from == r.to) {
      fail(report.piece_conservation, where + ": bad sender");
      continue;
    }
    if (r.piece_count == 0 || std::uint64_t{r.piece} + r.piece_count > item.piece_count()) {
      fail(report.piece_conservation, where + ": piece range outside item");
      continue;
    }
    const PieceSet& src = slot(r.from, r.item);
    std::uint64_t bytes = 0;
    for (std::uint32_t p = r.piece; p < r.piece + r.piece_count; ++p) {
      if (!src.test(p)) fail(report.piece_conservation, where + ": sender never held piece " + std::to_string(p));
      bytes += item.piece_bytes(p);
    }
    if (bytes != r.bytes) fail(report.piece_conservation, where + ": byte count does not match pieces");
    for (std::uint32_t p = r.piece; p < r.piece + r.piece_count; ++p) dst.set(p);

    const auto step = static_cast<std::uint64_t>(std::floor(std::max(0.0, r.time_s) / input.step_s));
    auto& u = up[{step, r.from}];
    u.bytes += static_cast<double>(r.bytes);
    u.streams.emplace(r.to, r.item);
    auto& d = down[{step, r.to}];
    d.bytes += static_cast<double>(r.bytes);
    d.streams.emplace(r.from, r.item);
    up_total[r.from] += static_cast<double>(r.bytes);
    down_total[r.to] += static_cast<double>(r.bytes);
    last_step[r.from] = std::max(last_step[r.from], step);
    last_step[r.to] = std::max(last_step[r.to], step);
  }

  const double tol = 1e-6;
  auto check = [&](const auto& usage, double rate, const char* what) {
    for (const auto& [key, u] : usage) {
      const double limit = rate * input.step_s + max_piece * static_cast<double>(u.streams.size());
      if (u.bytes > limit * (1 + tol)) {
        fail(report.bandwidth_caps, std::string(what) + " cap exceeded by peer " + std::to_string(key.second) +
                                        " in step " + std::to_string(key.first));
      }
    }
  };
  check(up, input.upload_bytes_per_s, "upload");
  check(down, input.download_bytes_per_s, "download");
  for (std::size_t p = 0; p < peers; ++p) {
    const double horizon = static_cast<double>(last_step[p] + 1) * input.step_s;
    if (up_total[p] > input.upload_bytes_per_s * horizon * (1 + tol) ||
        down_total[p] > input.download_bytes_per_s * horizon * (1 + tol)) {
      fail(report.bandwidth_caps, "cumulative traffic of peer " + std::to_string(p) + " exceeds its link");
    }
  }

  for (std::size_t k = 0; k < records.size(); ++k) {
    const auto& r = records[k];
    const std::string where = "download " + std::to_string(k);
    if (r.item_id >= catalog.size()) {
      fail(report.byte_accounting, where + ": unknown item");
      continue;
    }
    if (r.total_bytes() != catalog[r.item_id].size_bytes) fail(report.byte_accounting, where + ": bytes do not sum to size");
    if (r.completion_time < r.request_time) fail(report.byte_accounting, where + ": completes before request");
    const double floor = static_cast<double>(r.bytes_from_friends + r.bytes_from_non_friends) /
                         input.download_bytes_per_s;
    if (r.duration() + 1e-6 < floor * (1 - tol)) fail(report.byte_accounting, where + ": faster than the link");
  }
  return report;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

std::string format_optional(const std::optional<double>& value) { return value ? format_number(*value) : "nan"; }

void write_durations_csv(std::ostream& out, std::span<const TimeSeriesPoint> series) {
  out << "bucket_end_s,mean_duration_s,completed_count\n";
  for (const auto& p : series) {
    out << format_number(p.bucket_end_time) << ',' << format_optional(p.mean_duration_seconds) << ','
        << p.completed_count << '\n';
  }
}

void write_nonfriend_csv(std::ostream& out, std::span<const TimeSeriesPoint> series) {
  out << "bucket_end_s,non_friend_bytes\n";
  for (const auto& p : series) out << format_number(p.bucket_end_time) << ',' << p.non_friend_bytes << '\n';
}

void write_files_per_user_csv(std::ostream& out, std::span<const FilesPerUserPoint> series) {
  out << "bucket_end_s,mean_files\n";
  for (const auto& p : series) out << format_number(p.bucket_end_time) << ',' << format_number(p.mean_files) << '\n';
}

void write_transfer_log_csv(std::ostream& out, std::span<const protocol::TransferRecord> log) {
  out << "time_s,from,to,item,piece,piece_count,bytes,kind,friend\n";
  for (const auto& r : log) {
    out << exact(r.time_s) << ',';
    if (r.from == protocol::kTransponder) {
      out << "transponder";
    } else {
      out << r.from;
    }
    out << ',' << r.to << ',' << r.item << ',' << r.piece << ',' << r.piece_count << ',' << r.bytes << ','
        << protocol::to_string(r.kind) << ',' << (r.friend_link ? 1 : 0) << '\n';
  }
}

void write_downloads_csv(std::ostream& out, std::span<const DownloadRecord> records) {
  out << "peer,item,request_s,completion_s,bytes_friends,bytes_non_friends,bytes_broadcast_cache,prefetch\n";
  for (const auto& r : records) {
    out << r.peer_id << ',' << r.item_id << ',' << exact(r.request_time) << ',' << exact(r.completion_time) << ','
        << r.bytes_from_friends << ',' << r.bytes_from_non_friends << ',' << r.bytes_from_broadcast_cache << ','
        << (r.was_prefetch ? 1 : 0) << '\n';
  }
}

protocol::TransferLog read_transfer_log_csv(std::istream& in) {
  protocol::TransferLog log;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (n == 1) continue;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 9) throw ParseError(n, "expected 9 fields");
    protocol::TransferRecord r;
    r.time_s = parse_real(f[0], n);
    r.from = f[1] == "transponder" ? protocol::kTransponder : parse_int<PeerId>(f[1], n);
    r.to = parse_int<PeerId>(f[2], n);
    r.item = parse_int<ItemId>(f[3], n);
    r.piece = parse_int<std::uint32_t>(f[4], n);
    r.piece_count = parse_int<std::uint32_t>(f[5], n);
    r.bytes = parse_int<std::uint64_t>(f[6], n);
    const auto kind = protocol::parse_transfer_kind(f[7]);
    if (!kind) throw ParseError(n, "unknown transfer kind '" + f[7] + "'");
    r.kind = *kind;
    r.friend_link = parse_bool(f[8], n);
    log.push_back(r);
  }
  return log;
}

std::vector<DownloadRecord> read_downloads_csv(std::istream& in) {
  std::vector<DownloadRecord> records;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (n == 1) continue;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 8) throw ParseError(n, "expected 8 fields");
    DownloadRecord r;
    r.peer_id = parse_int<PeerId>(f[0], n);
    r.item_id = parse_int<ItemId>(f[1], n);
    r.request_time = parse_real(f[2], n);
    r.completion_time = parse_real(f[3], n);
    r.bytes_from_friends = parse_int<std::uint64_t>(f[4], n);
    r.bytes_from_non_friends = parse_int<std::uint64_t>(f[5], n);
    r.bytes_from_broadcast_cache = parse_int<std::uint64_t>(f[6], n);
    r.was_prefetch = parse_bool(f[7], n);
    records.push_back(r);
  }
  return records;
}

}  // namespace sst::metrics
