#include <charconv>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include "sst/errors.hpp"
#include "sst/graph.hpp"

namespace sst::graph {

void export_edge_list(const SocialGraph& graph, std::ostream& out) {
  out << "# nodes=" << graph.node_count() << '\n';
  for (const auto& [u, v] : graph.edges()) out << u << ' ' << v << '\n';
  out << "# sat\n";
  for (NodeId u = 0; u < graph.node_count(); ++u) {
    if (graph.sat_enabled(u)) out << u << '\n';
  }
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<std::uint64_t> parse_uint(std::string_view s) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

}  // namespace

SocialGraph import_edge_list(std::istream& in) {
  std::string raw;
  std::size_t line_no = 0;
  std::optional<SocialGraph> graph;
  bool in_sat = false;

  auto node_id = [&](std::string_view token) -> NodeId {
    auto value = parse_uint(token);
    if (!value) throw ParseError(line_no, "expected a node id, got '" + std::string(token) + "'");
    if (*value >= graph->node_count()) {
      throw ParseError(line_no, "node id " + std::to_string(*value) + " out of range");
    }
    return static_cast<NodeId>(*value);
  };

  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (!graph) {
      constexpr std::string_view kHeader = "# nodes=";
      if (line.substr(0, kHeader.size()) != kHeader) {
        throw ParseError(line_no, "expected header '# nodes=<n>'");
      }
      auto n = parse_uint(trim(line.substr(kHeader.size())));
      if (!n) throw ParseError(line_no, "invalid node count");
      graph.emplace(static_cast<std::size_t>(*n));
      continue;
    }
    if (line == "# sat") {
      if (in_sat) throw ParseError(line_no, "duplicate '# sat' section");
      in_sat = true;
      continue;
    }
    if (line.front() == '#') throw ParseError(line_no, "unexpected directive");
    if (in_sat) {
      graph->set_sat_enabled(node_id(line), true);
      continue;
    }
    const auto space = line.find_first_of(" \t");
    if (space == std::string_view::npos) throw ParseError(line_no, "expected 'u v'");
    const NodeId u = node_id(trim(line.substr(0, space)));
    const NodeId v = node_id(trim(line.substr(space + 1)));
    if (u == v) throw ParseError(line_no, "self-loop");
    if (!graph->add_edge(u, v)) throw ParseError(line_no, "duplicate edge");
  }
  if (!graph) throw ParseError(line_no + 1, "missing header '# nodes=<n>'");
  return std::move(*graph);
}

}  // namespace sst::graph
