#include "sst/scenario.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "sst/errors.hpp"

namespace sst {

std::vector<std::string> validate(const ScenarioConfig& c) {
  std::vector<std::string> v;
  auto need = [&](bool ok, std::string msg) {
    if (!ok) v.push_back(std::move(msg));
  };
  if (c.graph_model == GraphModel::kBa) {
    need(c.ba.initial_nodes >= 2, "ba_initial_nodes must be at least 2");
    need(c.ba.edges_per_node >= 1 && c.ba.edges_per_node <= c.ba.initial_nodes,
         "ba_edges_per_node must lie in [1, ba_initial_nodes]");
    need(c.node_count == 0 || c.node_count >= c.ba.initial_nodes, "node_count must be 0 or at least ba_initial_nodes");
  } else {
    std::size_t r_max = 0;
    double total = 0.0;
    bool counts_ok = true;
    for (const auto& [r, w] : c.to.initial_contacts) {
      r_max = std::max(r_max, r);
      counts_ok = counts_ok && r >= 1 && w >= 0.0;
      total += w;
    }
    need(!c.to.initial_contacts.empty() && counts_ok && total > 0.0,
         "to_initial_contacts needs counts >= 1 with non-negative weights summing above 0");
    need(c.to.secondary_mean >= 0.0, "to_secondary_mean must be non-negative");
    need(c.node_count == 0 || c.node_count >= 2 + r_max, "node_count must be 0 or exceed the largest contact count + 1");
  }
  need(c.sat_ratio >= 0.0 && c.sat_ratio <= 1.0, "sat_ratio must lie in [0, 1]");
  need(c.p_mi >= 0.0 && c.p_mi <= 1.0, "p_mi must lie in [0, 1]");
  need(c.negative_feedback_prob >= 0.0 && c.negative_feedback_prob <= 1.0,
       "negative_feedback_prob must lie in [0, 1]");
  need(c.feedback.base_strength > 0.0 && c.feedback.base_strength <= 1.0, "feedback_strength must lie in (0, 1]");
  need(c.feedback.floor > 0.0 && c.feedback.floor < 1.0, "feedback_floor must lie in (0, 1)");
  need(c.demand_weights.self >= 0.0 && c.demand_weights.buddy >= 0.0, "demand weights must be non-negative");
  need(c.categories >= 1, "categories must be positive");
  need(c.profile_init.min_entries >= 1 && c.profile_init.min_entries <= c.profile_init.max_entries &&
           c.profile_init.max_entries <= c.categories,
       "profile entries need 1 <= profile_min_entries <= profile_max_entries <= categories");
  need(!c.features.prefetch_cap || c.features.prefetch, "prefetch_cap requires prefetch");
  need(!(c.features.locality_only && c.features.buddy_help), "locality_only excludes buddy_help");
  need(c.catalog_items >= 1, "catalog_items must be positive");
  need(c.file_size_bytes > 0, "file_size_bytes must be positive");
  need(c.piece_size_bytes > 0 && c.piece_size_bytes <= c.file_size_bytes,
       "piece_size_bytes must be positive and no larger than file_size_bytes");
  need(c.cache_items >= 1, "cache_items must be positive");
  need(c.credit_limit >= 0, "credit_limit must be non-negative");
  need(c.max_connections >= 1, "max_connections must be positive");
  need(c.upload_slots >= 1, "upload_slots must be positive");
  need(c.tracker_sample >= 1, "tracker_sample must be positive");
  need(c.broadcast_threshold >= 1, "broadcast_threshold must be positive");
  need(c.broadcast_cooldown_s >= 0.0, "broadcast_cooldown_s must be non-negative");
  need(c.transponder_bps > 0, "transponder_bps must be positive");
  need(c.buddycast_interval_s > 0.0, "buddycast_interval_s must be positive");
  need(c.prefetch_interval_s > 0.0, "prefetch_interval_s must be positive");
  need(c.download_bps > 0.0, "download_bps must be positive");
  need(c.upload_bps > 0.0, "upload_bps must be positive");
  need(c.wait_mean_s > 0.0, "wait_mean_s must be positive");
  need(c.duration_s >= 0.0, "duration_s must be non-negative");
  need(c.step_s >= 1, "step_s must be at least 1");
  need(c.bucket_s > 0.0, "bucket_s must be positive");
  need(c.replications >= 1, "replications must be positive");
  return v;
}

std::vector<std::string> warnings(const ScenarioConfig& c) {
  std::vector<std::string> w;
  if (c.upload_bps > c.download_bps) w.emplace_back("upload_bps exceeds download_bps");
  if (c.cache_items * c.file_size_bytes < c.file_size_bytes) w.emplace_back("cache cannot hold a single item");
  return w;
}

}  // namespace sst

namespace sst::scenario {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad(std::string_view key, std::string_view value, std::string_view why) {
  throw ConfigError(std::string(key) + ": " + std::string(why) + " '" + std::string(value) + "'");
}

template <typename T>
T to_int(std::string_view key, std::string_view s) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || p != s.data() + s.size()) bad(key, s, "expected an integer, got");
  return v;
}

double to_real(std::string_view key, std::string_view s) {
  const std::string str(s);
  char* end = nullptr;
  const double v = std::strtod(str.c_str(), &end);
  if (str.empty() || end != str.c_str() + str.size() || !std::isfinite(v)) bad(key, s, "expected a number, got");
  return v;
}

bool to_bool(std::string_view key, std::string_view s) {
  if (s == "true" || s == "1" || s == "on" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "off" || s == "no") return false;
  bad(key, s, "expected true/false, got");
}

std::string real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string_view wait_name(WaitDistribution d) {
  switch (d) {
    case WaitDistribution::kExponential: return "exponential";
    case WaitDistribution::kFixed: return "fixed";
    case WaitDistribution::kUniform: return "uniform";
  }
  return "exponential";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

template <typename Fn>
void write_csv(const std::filesystem::path& path, Fn&& fn) {
  std::ostringstream s;
  fn(s);
  write_text(path, s.str());
}

std::string mi_name(const ScenarioConfig& c) {
  return c.mi_model ? std::string(prefs::to_string(*c.mi_model)) : "off";
}

}  // namespace

char to_char(PresetId id) { return static_cast<char>('a' + static_cast<int>(id)); }

std::optional<PresetId> parse_preset(std::string_view text) {
  if (text.size() != 1 || text[0] < 'a' || text[0] > 'i') return std::nullopt;
  return static_cast<PresetId>(text[0] - 'a');
}

ScenarioConfig expand_preset(PresetId id, ScenarioConfig base) {
  FeatureFlags f;
  switch (id) {
    case PresetId::kA: f.credits = false; break;
    case PresetId::kB: f.buddy_help = true; break;
    case PresetId::kC: f.buddy_help = f.prefetch = true; break;
    case PresetId::kD:
      f.buddy_help = f.prefetch = true;
      f.prefetch_cap = 10;
      break;
    case PresetId::kE:
      f.buddy_help = f.prefetch = f.broadcast = true;
      f.prefetch_cap = 10;
      break;
    case PresetId::kF: f.buddy_help = f.prefetch = f.broadcast = true; break;
    case PresetId::kG: f.buddy_help = f.broadcast = true; break;
    case PresetId::kH: f.broadcast = f.locality_only = f.prefetch = true; break;
    case PresetId::kI:
      f.broadcast = true;
      f.credits = false;
      break;
  }
  base.features = f;
  return base;
}

std::string_view to_string(GraphModel model) { return model == GraphModel::kBa ? "BA" : "TO"; }

std::optional<GraphModel> parse_graph_model(std::string_view text) {
  if (text == "BA" || text == "ba") return GraphModel::kBa;
  if (text == "TO" || text == "to") return GraphModel::kTo;
  return std::nullopt;
}

void apply_setting(ScenarioConfig& c, std::string_view key, std::string_view value) {
  using U32 = std::uint32_t;
  const std::map<std::string_view, std::function<void(std::string_view)>> setters = {
      {"graph_model",
       [&](auto s) {
         auto m = parse_graph_model(s);
         if (!m) bad(key, s, "expected BA or TO, got");
         c.graph_model = *m;
       }},
      {"node_count", [&](auto s) { c.node_count = to_int<U32>(key, s); }},
      {"ba_initial_nodes", [&](auto s) { c.ba.initial_nodes = to_int<std::size_t>(key, s); }},
      {"ba_edges_per_node", [&](auto s) { c.ba.edges_per_node = to_int<std::size_t>(key, s); }},
      {"to_initial_contacts",
       [&](auto s) {
         // "count:weight" pairs separated by spaces or commas.
         std::vector<std::pair<std::size_t, double>> dist;
         std::string text(s);
         for (char& ch : text) {
           if (ch == ',') ch = ' ';
         }
         std::istringstream in(text);
         std::string tok;
         while (in >> tok) {
           const auto colon = tok.find(':');
           if (colon == std::string::npos) bad(key, tok, "expected count:weight, got");
           dist.emplace_back(to_int<std::size_t>(key, std::string_view(tok).substr(0, colon)),
                             to_real(key, std::string_view(tok).substr(colon + 1)));
         }
         c.to.initial_contacts = std::move(dist);
       }},
      {"to_secondary_mean", [&](auto s) { c.to.secondary_mean = to_real(key, s); }},
      {"sat_ratio", [&](auto s) { c.sat_ratio = to_real(key, s); }},
      {"mi_model",
       [&](auto s) {
         if (s == "off" || s == "none") {
           c.mi_model.reset();
           return;
         }
         auto m = prefs::parse_mi_model(s);
         if (!m) bad(key, s, "expected MI1..MI4 or off, got");
         c.mi_model = *m;
       }},
      {"p_mi", [&](auto s) { c.p_mi = to_real(key, s); }},
      {"profile_min_entries", [&](auto s) { c.profile_init.min_entries = to_int<U32>(key, s); }},
      {"profile_max_entries", [&](auto s) { c.profile_init.max_entries = to_int<U32>(key, s); }},
      {"feedback_strength", [&](auto s) { c.feedback.base_strength = to_real(key, s); }},
      {"feedback_floor", [&](auto s) { c.feedback.floor = to_real(key, s); }},
      {"negative_feedback_prob", [&](auto s) { c.negative_feedback_prob = to_real(key, s); }},
      {"demand_self_weight", [&](auto s) { c.demand_weights.self = to_real(key, s); }},
      {"demand_buddy_weight", [&](auto s) { c.demand_weights.buddy = to_real(key, s); }},
      {"buddy_help", [&](auto s) { c.features.buddy_help = to_bool(key, s); }},
      {"prefetch", [&](auto s) { c.features.prefetch = to_bool(key, s); }},
      {"prefetch_cap",
       [&](auto s) {
         if (s == "none" || s == "off") {
           c.features.prefetch_cap.reset();
         } else {
           c.features.prefetch_cap = to_int<U32>(key, s);
         }
       }},
      {"broadcast", [&](auto s) { c.features.broadcast = to_bool(key, s); }},
      {"locality_only", [&](auto s) { c.features.locality_only = to_bool(key, s); }},
      {"credits", [&](auto s) { c.features.credits = to_bool(key, s); }},
      {"categories", [&](auto s) { c.categories = to_int<U32>(key, s); }},
      {"catalog_items", [&](auto s) { c.catalog_items = to_int<U32>(key, s); }},
      {"file_size_bytes", [&](auto s) { c.file_size_bytes = to_int<std::uint64_t>(key, s); }},
      {"piece_size_bytes", [&](auto s) { c.piece_size_bytes = to_int<std::uint64_t>(key, s); }},
      {"seeders", [&](auto s) { c.seeders = to_int<U32>(key, s); }},
      {"cache_items", [&](auto s) { c.cache_items = to_int<U32>(key, s); }},
      {"credit_limit", [&](auto s) { c.credit_limit = to_int<std::int64_t>(key, s); }},
      {"max_helpers", [&](auto s) { c.max_helpers = to_int<U32>(key, s); }},
      {"max_connections", [&](auto s) { c.max_connections = to_int<U32>(key, s); }},
      {"upload_slots", [&](auto s) { c.upload_slots = to_int<U32>(key, s); }},
      {"tracker_sample", [&](auto s) { c.tracker_sample = to_int<U32>(key, s); }},
      {"broadcast_threshold", [&](auto s) { c.broadcast_threshold = to_int<U32>(key, s); }},
      {"broadcast_cooldown_s", [&](auto s) { c.broadcast_cooldown_s = to_real(key, s); }},
      {"transponder_bps", [&](auto s) { c.transponder_bps = to_int<std::uint64_t>(key, s); }},
      {"buddycast_interval_s", [&](auto s) { c.buddycast_interval_s = to_real(key, s); }},
      {"prefetch_interval_s", [&](auto s) { c.prefetch_interval_s = to_real(key, s); }},
      {"download_bps", [&](auto s) { c.download_bps = to_real(key, s); }},
      {"upload_bps", [&](auto s) { c.upload_bps = to_real(key, s); }},
      {"wait_mean_s", [&](auto s) { c.wait_mean_s = to_real(key, s); }},
      {"wait_distribution",
       [&](auto s) {
         if (s == "exponential") {
           c.wait_distribution = WaitDistribution::kExponential;
         } else if (s == "fixed") {
           c.wait_distribution = WaitDistribution::kFixed;
         } else if (s == "uniform") {
           c.wait_distribution = WaitDistribution::kUniform;
         } else {
           bad(key, s, "expected exponential, fixed or uniform, got");
         }
       }},
      {"duration_s", [&](auto s) { c.duration_s = to_real(key, s); }},
      {"step_s", [&](auto s) { c.step_s = to_int<U32>(key, s); }},
      {"bucket_s", [&](auto s) { c.bucket_s = to_real(key, s); }},
      {"seed", [&](auto s) { c.seed = to_int<std::uint64_t>(key, s); }},
      {"replications", [&](auto s) { c.replications = to_int<U32>(key, s); }},
      {"output_dir", [&](auto s) { c.output_dir = std::string(s); }},
      {"write_transfer_log", [&](auto s) { c.write_transfer_log = to_bool(key, s); }},
  };
  auto it = setters.find(key);
  if (it == setters.end()) throw ConfigError("unknown setting '" + std::string(key) + "'");
  it->second(value);
}

ScenarioConfig parse_config(std::istream& in, ScenarioConfig base) {
  std::string line;
  std::size_t n = 0;
  std::optional<PresetId> preset;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError(n, "expected key = value");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw ParseError(n, "missing key");
    if (key == "preset") {
      preset = parse_preset(value);
      if (!preset) throw ParseError(n, "unknown preset '" + value + "'");
      continue;
    }
    try {
      apply_setting(base, key, value);
    } catch (const ConfigError& e) {
      throw ParseError(n, e.what());
    }
  }
  if (preset) base = expand_preset(*preset, std::move(base));
  return base;
}

ScenarioConfig load_config(const std::filesystem::path& path, ScenarioConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  return parse_config(in, std::move(base));
}

std::string dump_config(const ScenarioConfig& c) {
  std::ostringstream o;
  auto kv = [&](std::string_view k, const auto& v) { o << k << " = " << v << '\n'; };
  auto flag = [](bool b) { return b ? "true" : "false"; };
  kv("graph_model", to_string(c.graph_model));
  kv("node_count", c.node_count);
  kv("ba_initial_nodes", c.ba.initial_nodes);
  kv("ba_edges_per_node", c.ba.edges_per_node);
  std::string contacts;
  for (const auto& [r, w] : c.to.initial_contacts) {
    if (!contacts.empty()) contacts += ' ';
    contacts += std::to_string(r) + ':' + real(w);
  }
  kv("to_initial_contacts", contacts);
  kv("to_secondary_mean", real(c.to.secondary_mean));
  kv("sat_ratio", real(c.sat_ratio));
  kv("mi_model", mi_name(c));
  kv("p_mi", real(c.p_mi));
  kv("profile_min_entries", c.profile_init.min_entries);
  kv("profile_max_entries", c.profile_init.max_entries);
  kv("feedback_strength", real(c.feedback.base_strength));
  kv("feedback_floor", real(c.feedback.floor));
  kv("negative_feedback_prob", real(c.negative_feedback_prob));
  kv("demand_self_weight", real(c.demand_weights.self));
  kv("demand_buddy_weight", real(c.demand_weights.buddy));
  kv("buddy_help", flag(c.features.buddy_help));
  kv("prefetch", flag(c.features.prefetch));
  kv("prefetch_cap", c.features.prefetch_cap ? std::to_string(*c.features.prefetch_cap) : "none");
  kv("broadcast", flag(c.features.broadcast));
  kv("locality_only", flag(c.features.locality_only));
  kv("credits", flag(c.features.credits));
  kv("categories", c.categories);
  kv("catalog_items", c.catalog_items);
  kv("file_size_bytes", c.file_size_bytes);
  kv("piece_size_bytes", c.piece_size_bytes);
  kv("seeders", c.seeders);
  kv("cache_items", c.cache_items);
  kv("credit_limit", c.credit_limit);
  kv("max_helpers", c.max_helpers);
  kv("max_connections", c.max_connections);
  kv("upload_slots", c.upload_slots);
  kv("tracker_sample", c.tracker_sample);
  kv("broadcast_threshold", c.broadcast_threshold);
  kv("broadcast_cooldown_s", real(c.broadcast_cooldown_s));
  kv("transponder_bps", c.transponder_bps);
  kv("buddycast_interval_s", real(c.buddycast_interval_s));
  kv("prefetch_interval_s", real(c.prefetch_interval_s));
  kv("download_bps", real(c.download_bps));
  kv("upload_bps", real(c.upload_bps));
  kv("wait_mean_s", real(c.wait_mean_s));
  kv("wait_distribution", wait_name(c.wait_distribution));
  kv("duration_s", real(c.duration_s));
  kv("step_s", c.step_s);
  kv("bucket_s", real(c.bucket_s));
  kv("seed", c.seed);
  kv("replications", c.replications);
  if (!c.output_dir.empty()) kv("output_dir", c.output_dir);
  kv("write_transfer_log", flag(c.write_transfer_log));
  return o.str();
}

std::string_view version() { return "0.1.0"; }

std::uint64_t replication_seed(std::uint64_t master, std::uint32_t k) { return master + k; }

Outcome simulate(const ScenarioConfig& config) {
  sim::World world = sim::init_world(config);
  sim::run_simulation(world);
  Outcome o;
  o.config = config;
  o.stats = world.stats;
  o.ledger_total = world.ledger.total();
  o.ledger_minted = world.ledger.minted();
  metrics::AuditInput input;
  input.social_peers = world.social_count();
  input.seeders = config.seeders;
  input.catalog = &world.catalog;
  input.step_s = world.clock.step_s();
  input.upload_bytes_per_s = world.link.upload_bytes_per_s;
  input.download_bytes_per_s = world.link.download_bytes_per_s;
  o.audit = metrics::audit(world.log, world.records, input);
  o.graph = std::move(world.graph);
  o.log = std::move(world.log);
  o.records = std::move(world.records);
  return o;
}

Summary summarize(const Outcome& o, std::string label) {
  Summary s;
  s.label = std::move(label);
  s.seed = o.config.seed;
  s.mean_duration_s = metrics::mean_duration(o.records);
  s.user_downloads = static_cast<std::size_t>(
      std::count_if(o.records.begin(), o.records.end(), [](const auto& r) { return !r.was_prefetch; }));
  s.files_per_user = metrics::files_per_user_total(o.records, o.graph.node_count());
  const auto corr = metrics::sat_correlations(o.records, o.graph);
  s.corr_sat_flag = corr.duration_vs_sat_flag;
  s.corr_sat_friend_count = corr.duration_vs_sat_friend_count;
  s.p_nsn = o.graph.empty() ? 0.0 : graph::p_nsn(o.graph);
  s.non_friend_bytes = metrics::traffic_totals(o.log).non_friend_unicast;
  s.broadcasts = o.stats.broadcasts;
  s.audit_ok = o.audit.ok() && o.stats.ledger_conserved && o.stats.min_balance >= -o.config.credit_limit;
  return s;
}

namespace {

const char* kSummaryHeader =
    "label,seed,mean_duration_s,user_downloads,files_per_user,corr_sat_flag,corr_sat_friend_count,p_nsn,"
    "non_friend_bytes,broadcasts,audit_ok\n";

void summary_row(std::ostream& out, const Summary& s) {
  out << s.label << ',' << s.seed << ',' << metrics::format_number(s.mean_duration_s) << ',' << s.user_downloads
      << ',' << metrics::format_number(s.files_per_user) << ',' << metrics::format_optional(s.corr_sat_flag) << ','
      << metrics::format_optional(s.corr_sat_friend_count) << ',' << metrics::format_number(s.p_nsn) << ','
      << s.non_friend_bytes << ',' << s.broadcasts << ',' << (s.audit_ok ? 1 : 0) << '\n';
}

}  // namespace

void write_bundle(const Outcome& o, const std::filesystem::path& dir, std::string_view note) {
  std::filesystem::create_directories(dir);
  const auto& c = o.config;
  std::string manifest = "# sst results manifest, version " + std::string(version()) + "\n";
  if (!note.empty()) manifest += "# " + std::string(note) + "\n";
  ScenarioConfig resolved = c;
  resolved.replications = 1;
  resolved.output_dir.clear();
  manifest += dump_config(resolved);
  write_text(dir / "manifest.txt", manifest);

  const double horizon = c.duration_s;
  write_csv(dir / "downloads.csv", [&](auto& s) { metrics::write_downloads_csv(s, o.records); });
  write_csv(dir / "durations.csv",
            [&](auto& s) { metrics::write_durations_csv(s, metrics::duration_series(o.records, c.bucket_s)); });
  write_csv(dir / "nonfriend.csv", [&](auto& s) {
    metrics::write_nonfriend_csv(s, metrics::non_friend_upload_series(o.log, c.bucket_s, horizon));
  });
  write_csv(dir / "files_per_user.csv", [&](auto& s) {
    metrics::write_files_per_user_csv(s, metrics::files_per_user(o.records, o.graph.node_count(), c.bucket_s, horizon));
  });
  const auto corr = metrics::sat_correlations(o.records, o.graph);
  write_csv(dir / "correlations.csv", [&](auto& s) {
    s << "mi_model,corr_sat_flag,corr_sat_friend_count\n"
      << mi_name(c) << ',' << metrics::format_optional(corr.duration_vs_sat_flag) << ','
      << metrics::format_optional(corr.duration_vs_sat_friend_count) << '\n';
  });
  write_csv(dir / "graph_props.csv", [&](auto& s) {
    s << "model,nodes,edges,avg_degree,diameter,avg_clustering,avg_path_len,triangles\n";
    if (o.graph.empty()) return;
    const auto p = graph::graph_properties(o.graph);
    s << to_string(c.graph_model) << ',' << p.node_count << ',' << p.edge_count << ','
      << metrics::format_number(p.average_degree) << ',' << p.diameter << ','
      << metrics::format_number(p.average_clustering_coefficient) << ','
      << metrics::format_number(p.average_path_length) << ',' << p.total_triangles << '\n';
  });
  write_csv(dir / "pnsn.csv", [&](auto& s) {
    s << "model,ratio_or_nodes,p_nsn\n";
    if (o.graph.empty()) return;
    s << to_string(c.graph_model) << ',' << metrics::format_number(c.sat_ratio) << ','
      << metrics::format_number(graph::p_nsn(o.graph)) << '\n';
  });
  write_csv(dir / "summary.csv", [&](auto& s) {
    s << kSummaryHeader;
    summary_row(s, summarize(o, std::string(note)));
  });
  if (c.write_transfer_log) {
    write_csv(dir / "transfer_log.csv", [&](auto& s) { metrics::write_transfer_log_csv(s, o.log); });
  }
}

std::vector<Summary> run(const ScenarioConfig& config, const std::filesystem::path& out, std::string_view note) {
  if (auto v = validate(config); !v.empty()) throw ConfigError(std::move(v));
  std::vector<Summary> summaries;
  for (std::uint32_t k = 0; k < config.replications; ++k) {
    ScenarioConfig rep = config;
    rep.seed = replication_seed(config.seed, k);
    rep.replications = 1;
    const Outcome o = simulate(rep);
    write_bundle(o, out / ("rep-" + std::to_string(k)), note);
    summaries.push_back(summarize(o, std::string(note)));
  }
  return summaries;
}

std::optional<SweepDimension> parse_dimension(std::string_view text) {
  if (text == "sat_ratio") return SweepDimension::kSatRatio;
  if (text == "node_count") return SweepDimension::kNodeCount;
  if (text == "mi_model") return SweepDimension::kMiModel;
  if (text == "preset") return SweepDimension::kPreset;
  return std::nullopt;
}

std::vector<SweepFailure> sweep(const SweepRequest& request, const ScenarioConfig& base,
                                const std::filesystem::path& out) {
  if (request.values.empty()) throw ConfigError("sweep needs at least one value");
  std::filesystem::create_directories(out);
  std::vector<SweepFailure> failures;
  const std::vector<GraphModel> models = request.models.empty() ? std::vector<GraphModel>{base.graph_model}
                                                                : request.models;
  std::ostringstream pnsn, corr, summary;
  pnsn << "model,ratio_or_nodes,p_nsn\n";
  corr << "mi_model,corr_sat_flag,corr_sat_friend_count\n";
  summary << kSummaryHeader;

  auto mean_of = [](const std::vector<std::optional<double>>& xs) -> std::optional<double> {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& x : xs) {
      if (x) {
        sum += *x;
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  };

  for (GraphModel model : models) {
    for (const std::string& value : request.values) {
      ScenarioConfig cfg = base;
      cfg.graph_model = model;
      try {
        switch (request.dimension) {
          case SweepDimension::kSatRatio: apply_setting(cfg, "sat_ratio", value); break;
          case SweepDimension::kNodeCount: apply_setting(cfg, "node_count", value); break;
          case SweepDimension::kMiModel: apply_setting(cfg, "mi_model", value); break;
          case SweepDimension::kPreset: {
            const auto id = parse_preset(value);
            if (!id) throw ConfigError("unknown preset '" + value + "'");
            cfg = expand_preset(*id, cfg);
            break;
          }
        }
        if (auto v = validate(cfg); !v.empty()) throw ConfigError(std::move(v));
      } catch (const std::exception& e) {
        failures.push_back({value, e.what()});
        continue;
      }

      std::vector<std::optional<double>> flag, friends, nsn;
      for (std::uint32_t k = 0; k < cfg.replications; ++k) {
        ScenarioConfig rep = cfg;
        rep.seed = replication_seed(cfg.seed, k);
        rep.replications = 1;
        const std::string label = std::string(to_string(model)) + ":" + value;
        try {
          if (request.graph_only) {
            auto g = model == GraphModel::kBa ? graph::generate_ba(rep.node_count, rep.ba, derive_seed(rep.seed, "graph"))
                                              : graph::generate_toivonen(rep.node_count, rep.to,
                                                                         derive_seed(rep.seed, "graph"));
            g = graph::assign_sat_peers(std::move(g), rep.sat_ratio, derive_seed(rep.seed, "sat"));
            nsn.push_back(graph::p_nsn(g));
            continue;
          }
          const Outcome o = simulate(rep);
          write_bundle(o, out / (std::string(to_string(model)) + "-" + value) / ("rep-" + std::to_string(k)), label);
          const Summary s = summarize(o, label);
          summary_row(summary, s);
          flag.push_back(s.corr_sat_flag);
          friends.push_back(s.corr_sat_friend_count);
          nsn.push_back(s.p_nsn);
        } catch (const std::exception& e) {
          failures.push_back({value, e.what()});
        }
      }
      const std::string column = request.dimension == SweepDimension::kNodeCount
                                     ? std::to_string(cfg.node_count)
                                     : metrics::format_number(cfg.sat_ratio);
      pnsn << to_string(model) << ',' << column << ',' << metrics::format_optional(mean_of(nsn)) << '\n';
      if (!request.graph_only) {
        corr << mi_name(cfg) << ',' << metrics::format_optional(mean_of(flag)) << ','
             << metrics::format_optional(mean_of(friends)) << '\n';
      }
    }
  }
  write_text(out / "pnsn.csv", pnsn.str());
  if (!request.graph_only) {
    write_text(out / "correlations.csv", corr.str());
    write_text(out / "summary.csv", summary.str());
  }
  if (!failures.empty()) {
    std::ostringstream f;
    f << "value,error\n";
    for (const auto& x : failures) f << x.value << ',' << '"' << x.message << '"' << '\n';
    write_text(out / "failures.csv", f.str());
  }
  return failures;
}

}  // namespace sst::scenario
