#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sst/errors.hpp"
#include "sst/scenario.hpp"

namespace {

using namespace sst;
using namespace sst::scenario;
namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sst_test_" + name);
  fs::remove_all(p);
  return p;
}

ScenarioConfig tiny() {
  ScenarioConfig c;
  c.node_count = 80;
  c.categories = 10;
  c.catalog_items = 20;
  c.file_size_bytes = 10 * kMiB;
  c.cache_items = 4;
  c.duration_s = 3 * 3600.0;
  c.wait_mean_s = 1800.0;
  return c;
}

TEST(Presets, FeatureTable) {
  struct Row {
    char id;
    bool help, prefetch, broadcast, locality, credits;
    std::optional<std::uint32_t> cap;
  };
  const Row rows[] = {
      {'a', false, false, false, false, false, {}}, {'b', true, false, false, false, true, {}},
      {'c', true, true, false, false, true, {}},    {'d', true, true, false, false, true, 10},
      {'e', true, true, true, false, true, 10},     {'f', true, true, true, false, true, {}},
      {'g', true, false, true, false, true, {}},    {'h', false, true, true, true, true, {}},
      {'i', false, false, true, false, false, {}},
  };
  for (const auto& r : rows) {
    const auto id = parse_preset(std::string(1, r.id));
    ASSERT_TRUE(id.has_value()) << r.id;
    EXPECT_EQ(to_char(*id), r.id);
    ScenarioConfig base = tiny();
    base.node_count = 1234;
    const auto c = expand_preset(*id, base);
    EXPECT_EQ(c.features.buddy_help, r.help) << r.id;
    EXPECT_EQ(c.features.prefetch, r.prefetch) << r.id;
    EXPECT_EQ(c.features.broadcast, r.broadcast) << r.id;
    EXPECT_EQ(c.features.locality_only, r.locality) << r.id;
    EXPECT_EQ(c.features.credits, r.credits) << r.id;
    EXPECT_EQ(c.features.prefetch_cap, r.cap) << r.id;
    EXPECT_EQ(c.node_count, 1234u);
    EXPECT_TRUE(validate(c).empty()) << r.id;
  }
  EXPECT_FALSE(parse_preset("z").has_value());
}

TEST(Config, ParsesCommentsAndAppliesPresetLast) {
  std::istringstream in(
      "# experiment\n"
      "preset = b\n"
      "node_count = 500   # trailing\n"
      "\n"
      "prefetch = true\n"
      "sat_ratio=0.45\n"
      "mi_model = MI3\n"
      "graph_model = TO\n");
  const auto c = parse_config(in);
  EXPECT_EQ(c.node_count, 500u);
  EXPECT_DOUBLE_EQ(c.sat_ratio, 0.45);
  EXPECT_EQ(c.mi_model, prefs::MiModel::kMi3);
  EXPECT_EQ(c.graph_model, GraphModel::kTo);
  EXPECT_FALSE(c.features.prefetch);  // preset overrides the flag
  EXPECT_TRUE(c.features.buddy_help);
}

TEST(Config, ErrorsCarryLineNumbers) {
  auto line_of = [](const std::string& text) -> std::size_t {
    std::istringstream in(text);
    try {
      parse_config(in);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of("seed = 1\nnode_count = 10\nbogus = 3\n"), 3u);
  EXPECT_EQ(line_of("seed = 1\nno equals sign\n"), 2u);
  EXPECT_EQ(line_of("node_count = -4\n"), 1u);
  EXPECT_EQ(line_of("sat_ratio = abc\n"), 1u);
  EXPECT_EQ(line_of("# c\n\npreset = q\n"), 3u);
  EXPECT_EQ(line_of("seed = 1\n"), 0u);
  EXPECT_THROW(load_config("/nonexistent/sst.cfg"), ConfigError);
}

TEST(Config, DumpParseRoundTrip) {
  ScenarioConfig c = tiny();
  c.graph_model = GraphModel::kTo;
  c.sat_ratio = 0.1 + 0.2;
  c.p_mi = 1.0 / 3.0;
  c.mi_model = prefs::MiModel::kMi4;
  c.features.prefetch = true;
  c.features.prefetch_cap = 7;
  c.wait_distribution = WaitDistribution::kUniform;
  c.seed = 987654321;
  c.output_dir = "out/x";
  std::istringstream in(dump_config(c));
  const auto back = parse_config(in);
  EXPECT_EQ(dump_config(back), dump_config(c));
  EXPECT_EQ(back.sat_ratio, c.sat_ratio);
  EXPECT_EQ(back.p_mi, c.p_mi);
  EXPECT_EQ(back.features, c.features);
  EXPECT_EQ(back.to.initial_contacts, c.to.initial_contacts);

  c.mi_model.reset();
  std::istringstream none(dump_config(c));
  EXPECT_FALSE(parse_config(none).mi_model.has_value());
}

TEST(Config, ValidateCollectsEveryViolation) {
  ScenarioConfig c = tiny();
  c.features.locality_only = true;
  c.features.buddy_help = true;
  c.features.prefetch_cap = 3;
  c.sat_ratio = 1.5;
  const auto v = validate(c);
  EXPECT_EQ(v.size(), 3u);
  try {
    run(c, scratch("invalid"));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.violations().size(), 3u);
  }
  EXPECT_FALSE(fs::exists(scratch("invalid") / "rep-0"));
}

TEST(Config, UnknownSettingThrows) {
  ScenarioConfig c;
  EXPECT_THROW(apply_setting(c, "warp_drive", "1"), ConfigError);
  EXPECT_THROW(apply_setting(c, "credits", "maybe"), ConfigError);
  apply_setting(c, "credits", "false");
  EXPECT_FALSE(c.features.credits);
}

TEST(Seeds, ReplicationSeeds) {
  EXPECT_EQ(replication_seed(10, 0), 10u);
  EXPECT_EQ(replication_seed(10, 3), 13u);
}

TEST(Names, RoundTrip) {
  for (auto m : {GraphModel::kBa, GraphModel::kTo}) EXPECT_EQ(parse_graph_model(to_string(m)), m);
  EXPECT_EQ(parse_dimension("sat_ratio"), SweepDimension::kSatRatio);
  EXPECT_EQ(parse_dimension("preset"), SweepDimension::kPreset);
  EXPECT_FALSE(parse_dimension("colour").has_value());
}

TEST(Simulate, OutcomeIsSelfConsistent) {
  const auto c = expand_preset(PresetId::kF, tiny());
  const auto o = simulate(c);
  EXPECT_TRUE(o.audit.ok());
  EXPECT_EQ(o.ledger_total, o.ledger_minted);
  EXPECT_EQ(o.graph.node_count(), c.node_count);
  const auto s = summarize(o, "f");
  EXPECT_TRUE(s.audit_ok);
  EXPECT_EQ(s.seed, c.seed);
  EXPECT_GT(s.user_downloads, 0u);
  EXPECT_DOUBLE_EQ(s.files_per_user, static_cast<double>(s.user_downloads) / c.node_count);
}

TEST(Bundle, WritesEveryFile) {
  const auto dir = scratch("bundle");
  auto c = expand_preset(PresetId::kE, tiny());
  c.replications = 2;
  const auto sums = run(c, dir, "note");
  ASSERT_EQ(sums.size(), 2u);
  EXPECT_EQ(sums[0].seed, c.seed);
  EXPECT_EQ(sums[1].seed, c.seed + 1);
  for (const char* f : {"manifest.txt", "downloads.csv", "durations.csv", "nonfriend.csv", "files_per_user.csv",
                        "correlations.csv", "graph_props.csv", "pnsn.csv", "summary.csv", "transfer_log.csv"}) {
    EXPECT_TRUE(fs::exists(dir / "rep-0" / f)) << f;
    EXPECT_TRUE(fs::exists(dir / "rep-1" / f)) << f;
  }
  const auto manifest = slurp(dir / "rep-1" / "manifest.txt");
  EXPECT_NE(manifest.find("seed = " + std::to_string(c.seed + 1)), std::string::npos);
  EXPECT_NE(manifest.find("replications = 1"), std::string::npos);
}

TEST(Bundle, ManifestRerunIsByteIdentical) {
  const auto first = scratch("rerun_a");
  const auto second = scratch("rerun_b");
  auto c = expand_preset(PresetId::kC, tiny());
  c.seed = 17;
  c.replications = 2;
  run(c, first);
  const auto again = load_config(first / "rep-1" / "manifest.txt");
  run(again, second);
  for (const char* f : {"downloads.csv", "durations.csv", "nonfriend.csv", "files_per_user.csv", "correlations.csv",
                        "graph_props.csv", "pnsn.csv", "summary.csv", "transfer_log.csv", "manifest.txt"}) {
    EXPECT_EQ(slurp(first / "rep-1" / f), slurp(second / "rep-0" / f)) << f;
  }
}

TEST(Bundle, TransferLogOptional) {
  const auto dir = scratch("nolog");
  auto c = expand_preset(PresetId::kB, tiny());
  c.write_transfer_log = false;
  run(c, dir);
  EXPECT_FALSE(fs::exists(dir / "rep-0" / "transfer_log.csv"));
  EXPECT_TRUE(fs::exists(dir / "rep-0" / "downloads.csv"));
}

TEST(Sweep, GraphOnlyWritesPnsn) {
  const auto dir = scratch("sweep");
  SweepRequest req;
  req.dimension = SweepDimension::kSatRatio;
  req.values = {"0", "0.5", "1", "2"};
  req.models = {GraphModel::kBa, GraphModel::kTo};
  req.graph_only = true;
  auto base = tiny();
  base.replications = 3;
  const auto failures = sweep(req, base, dir);
  ASSERT_EQ(failures.size(), 2u);  // ratio 2 under both models
  EXPECT_EQ(failures[0].value, "2");
  std::istringstream in(slurp(dir / "pnsn.csv"));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "model,ratio_or_nodes,p_nsn");
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0], "BA,0.000000,1.000000");
  EXPECT_EQ(rows[2], "BA,1.000000,0.000000");
  EXPECT_EQ(rows[3], "TO,0.000000,1.000000");
  EXPECT_TRUE(fs::exists(dir / "failures.csv"));
}

TEST(Sweep, PresetDimensionSimulates) {
  const auto dir = scratch("sweep_presets");
  SweepRequest req;
  req.dimension = SweepDimension::kPreset;
  req.values = {"a", "g"};
  const auto failures = sweep(req, tiny(), dir);
  EXPECT_TRUE(failures.empty());
  EXPECT_TRUE(fs::exists(dir / "summary.csv"));
  EXPECT_TRUE(fs::exists(dir / "BA-g" / "rep-0" / "downloads.csv"));
}

}  // namespace
