// sst: command-line runner for the simulator.
//
//   sst run --config FILE [--preset a..i] [--seed N] [--reps K] --out DIR
//   sst sweep --dimension D --values LIST [--models ba,to] [--graph-only] --out DIR
//   sst graph-props --model ba|to --nodes N [--seeds K] [--median]

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "sst/errors.hpp"
#include "sst/graph.hpp"
#include "sst/metrics.hpp"
#include "sst/scenario.hpp"

namespace {

namespace fs = std::filesystem;
using namespace sst;

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

struct Common {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> reps;
  std::vector<std::string> settings;
  std::string out;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "key = value scenario file")->check(CLI::ExistingFile);
  app->add_option("--preset", c.preset, "feature preset a..i, applied after the file");
  app->add_option("--seed", c.seed, "master seed");
  app->add_option("--reps", c.reps, "replications");
  app->add_option("--set", c.settings, "override, key=value (repeatable)");
  app->add_option("--out", c.out, "output directory")->required();
}

ScenarioConfig resolve(const Common& c) {
  ScenarioConfig cfg = c.config.empty() ? ScenarioConfig{} : scenario::load_config(c.config);
  if (!c.preset.empty()) {
    const auto id = scenario::parse_preset(c.preset);
    if (!id) throw ConfigError("unknown preset '" + c.preset + "' (expected a..i)");
    cfg = scenario::expand_preset(*id, std::move(cfg));
  }
  for (const auto& s : c.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    scenario::apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  if (c.seed) cfg.seed = *c.seed;
  if (c.reps) cfg.replications = *c.reps;
  if (auto v = validate(cfg); !v.empty()) throw ConfigError(std::move(v));
  for (const auto& w : warnings(cfg)) std::cerr << "warning: " << w << '\n';
  return cfg;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_run(const Common& c, bool no_log) {
  ScenarioConfig cfg = resolve(c);
  if (no_log) cfg.write_transfer_log = false;
  // No note: a rerun from the manifest must write identical files.
  const auto summaries = scenario::run(cfg, c.out);
  for (std::size_t k = 0; k < summaries.size(); ++k) {
    const auto& s = summaries[k];
    std::cout << "rep " << k << " seed " << s.seed << ": mean duration " << metrics::format_number(s.mean_duration_s)
              << " s, " << s.user_downloads << " downloads, audit " << (s.audit_ok ? "ok" : "FAILED") << '\n';
    if (!s.audit_ok) return kRuntimeError;
  }
  return kOk;
}

int cmd_sweep(const Common& c, const std::string& dimension, const std::string& values, const std::string& models,
              bool graph_only) {
  const ScenarioConfig cfg = resolve(c);
  scenario::SweepRequest req;
  const auto dim = scenario::parse_dimension(dimension);
  if (!dim) throw ConfigError("unknown sweep dimension '" + dimension + "'");
  req.dimension = *dim;
  req.values = split_list(values);
  for (const auto& m : split_list(models)) {
    const auto model = scenario::parse_graph_model(m);
    if (!model) throw ConfigError("unknown graph model '" + m + "'");
    req.models.push_back(*model);
  }
  req.graph_only = graph_only;
  const auto failures = scenario::sweep(req, cfg, c.out);
  for (const auto& f : failures) std::cerr << "run " << f.value << " failed: " << f.message << '\n';
  return failures.empty() ? kOk : kRuntimeError;
}

struct GraphArgs {
  std::string model = "ba";
  std::size_t nodes = 10000;
  std::uint64_t seed = 1;
  std::uint32_t seeds = 1;
  bool median = false;
  graph::BaParams ba;
  std::string to_contacts;
  std::optional<double> to_secondary;
  std::string out;
};

int cmd_graph_props(const GraphArgs& a) {
  const auto model = scenario::parse_graph_model(a.model);
  if (!model) throw ConfigError("unknown graph model '" + a.model + "'");
  ScenarioConfig cfg;
  cfg.graph_model = *model;
  cfg.node_count = static_cast<std::uint32_t>(a.nodes);
  cfg.ba = a.ba;
  if (!a.to_contacts.empty()) scenario::apply_setting(cfg, "to_initial_contacts", a.to_contacts);
  if (a.to_secondary) cfg.to.secondary_mean = *a.to_secondary;
  if (auto v = validate(cfg); !v.empty()) throw ConfigError(std::move(v));

  std::vector<graph::GraphProperties> rows;
  for (std::uint32_t k = 0; k < a.seeds; ++k) {
    const auto seed = derive_seed(scenario::replication_seed(a.seed, k), "graph");
    const auto g = *model == GraphModel::kBa ? graph::generate_ba(a.nodes, cfg.ba, seed)
                                             : graph::generate_toivonen(a.nodes, cfg.to, seed);
    rows.push_back(graph::graph_properties(g));
  }
  if (a.median) {
    auto med = [&](auto field) {
      std::vector<double> xs;
      for (const auto& r : rows) xs.push_back(static_cast<double>(field(r)));
      std::sort(xs.begin(), xs.end());
      const std::size_t n = xs.size();
      return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
    };
    graph::GraphProperties m;
    m.node_count = a.nodes;
    m.edge_count = static_cast<std::size_t>(med([](const auto& r) { return r.edge_count; }));
    m.average_degree = med([](const auto& r) { return r.average_degree; });
    m.diameter = static_cast<std::uint32_t>(med([](const auto& r) { return r.diameter; }));
    m.average_clustering_coefficient = med([](const auto& r) { return r.average_clustering_coefficient; });
    m.average_path_length = med([](const auto& r) { return r.average_path_length; });
    m.total_triangles = static_cast<std::uint64_t>(med([](const auto& r) { return r.total_triangles; }));
    rows = {m};
  }

  std::ostringstream csv;
  csv << "model,nodes,edges,avg_degree,diameter,avg_clustering,avg_path_len,triangles\n";
  for (const auto& p : rows) {
    csv << scenario::to_string(*model) << ',' << p.node_count << ',' << p.edge_count << ','
        << metrics::format_number(p.average_degree) << ',' << p.diameter << ','
        << metrics::format_number(p.average_clustering_coefficient) << ','
        << metrics::format_number(p.average_path_length) << ',' << p.total_triangles << '\n';
  }
  if (a.out.empty()) {
    std::cout << csv.str();
  } else {
    if (const auto parent = fs::path(a.out).parent_path(); !parent.empty()) fs::create_directories(parent);
    std::ofstream f(a.out);
    if (!(f << csv.str())) throw std::runtime_error("cannot write " + a.out);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Social SatTorrent simulator"};
  app.require_subcommand(1);

  Common run_args;
  bool no_log = false;
  auto* run = app.add_subcommand("run", "run replications of one scenario");
  add_common(run, run_args);
  run->add_flag("--no-transfer-log", no_log, "skip transfer_log.csv");

  Common sweep_args;
  std::string dimension, values, models;
  bool graph_only = false;
  auto* sweep = app.add_subcommand("sweep", "vary one dimension and aggregate");
  add_common(sweep, sweep_args);
  sweep->add_option("--dimension", dimension, "sat_ratio | node_count | mi_model | preset")->required();
  sweep->add_option("--values", values, "comma-separated values")->required();
  sweep->add_option("--models", models, "comma-separated graph models (ba,to)");
  sweep->add_flag("--graph-only", graph_only, "only compute P(NSN), no simulation");

  GraphArgs graph_args;
  auto* props = app.add_subcommand("graph-props", "generate graphs and print their properties");
  props->add_option("--model", graph_args.model, "ba | to")->required();
  props->add_option("--nodes", graph_args.nodes, "node count")->required();
  props->add_option("--seed", graph_args.seed, "first seed");
  props->add_option("--seeds", graph_args.seeds, "number of seeds")->check(CLI::PositiveNumber);
  props->add_flag("--median", graph_args.median, "print the per-column median only");
  props->add_option("--m", graph_args.ba.edges_per_node, "BA edges per new node");
  props->add_option("--m0", graph_args.ba.initial_nodes, "BA initial ring size");
  props->add_option("--to-contacts", graph_args.to_contacts, "TO initial contacts, count:weight list");
  props->add_option("--to-secondary", graph_args.to_secondary, "TO mean secondary contacts");
  props->add_option("--out", graph_args.out, "CSV file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return cmd_run(run_args, no_log);
    if (*sweep) return cmd_sweep(sweep_args, dimension, values, models, graph_only);
    if (*props) return cmd_graph_props(graph_args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}
