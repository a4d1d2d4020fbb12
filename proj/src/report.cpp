#include "eosp/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "eosp/instance.hpp"

namespace eosp {

namespace {

Comparison compare(const std::vector<EvaluationRow>& rows, double EvaluationRow::*baseline) {
  Comparison c;
  for (const auto& row : rows) {
    if (scores_tie(row.policy, row.*baseline)) {
      ++c.equal;
    } else if (row.policy > row.*baseline) {
      ++c.above;
    } else {
      ++c.below;
    }
  }
  return c;
}

std::string format(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

bool scores_tie(double a, double b) {
  return std::abs(a - b) <= kTieTolerance * std::max({1.0, std::abs(a), std::abs(b)});
}

double score_ratio(double policy, double baseline) {
  if (baseline == 0.0) return policy == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return policy / baseline;
}

EvaluationSummary summarize(const std::vector<EvaluationRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("summarize: no evaluation rows");
  EvaluationSummary s;
  for (const auto& row : rows) {
    s.mean_policy += row.policy;
    s.mean_greedy += row.greedy;
    s.mean_ramp += row.ramp;
    s.mean_ratio_vs_greedy += score_ratio(row.policy, row.greedy);
    s.mean_ratio_vs_ramp += score_ratio(row.policy, row.ramp);
  }
  const double n = static_cast<double>(rows.size());
  s.mean_policy /= n;
  s.mean_greedy /= n;
  s.mean_ramp /= n;
  s.mean_ratio_vs_greedy /= n;
  s.mean_ratio_vs_ramp /= n;
  s.vs_greedy = compare(rows, &EvaluationRow::greedy);
  s.vs_ramp = compare(rows, &EvaluationRow::ramp);
  return s;
}

std::string report_csv(const std::vector<EvaluationRow>& rows) {
  const auto s = summarize(rows);
  std::ostringstream out;
  out << "instance,acquisitions,policy,greedy,ramp,policy_over_greedy,policy_over_ramp\n";
  for (const auto& r : rows) {
    out << r.instance << ',' << r.acquisitions << ',' << format(r.policy) << ',' << format(r.greedy) << ','
        << format(r.ramp) << ',' << format(score_ratio(r.policy, r.greedy)) << ','
        << format(score_ratio(r.policy, r.ramp)) << '\n';
  }
  // Ratio columns of the summary row are means of the per-instance ratios.
  out << "mean_of_rows,," << format(s.mean_policy) << ',' << format(s.mean_greedy) << ','
      << format(s.mean_ramp) << ',' << format(s.mean_ratio_vs_greedy) << ',' << format(s.mean_ratio_vs_ramp)
      << '\n';
  out << "\nbaseline,above,equal,below\n";
  out << "greedy," << s.vs_greedy.above << ',' << s.vs_greedy.equal << ',' << s.vs_greedy.below << '\n';
  out << "ramp," << s.vs_ramp.above << ',' << s.vs_ramp.equal << ',' << s.vs_ramp.below << '\n';
  return out.str();
}

std::string report_json(const std::vector<EvaluationRow>& rows) {
  const auto s = summarize(rows);
  nlohmann::json doc;
  auto items = nlohmann::json::array();
  for (const auto& r : rows) {
    items.push_back({{"instance", r.instance},
                     {"acquisitions", r.acquisitions},
                     {"policy", r.policy},
                     {"greedy", r.greedy},
                     {"ramp", r.ramp},
                     {"policy_over_greedy", score_ratio(r.policy, r.greedy)},
                     {"policy_over_ramp", score_ratio(r.policy, r.ramp)}});
  }
  doc["rows"] = std::move(items);
  doc["summary"] = {{"mean_policy", s.mean_policy},
                    {"mean_greedy", s.mean_greedy},
                    {"mean_ramp", s.mean_ramp},
                    {"mean_of_ratios_policy_over_greedy", s.mean_ratio_vs_greedy},
                    {"mean_of_ratios_policy_over_ramp", s.mean_ratio_vs_ramp},
                    {"vs_greedy", {{"above", s.vs_greedy.above}, {"equal", s.vs_greedy.equal}, {"below", s.vs_greedy.below}}},
                    {"vs_ramp", {{"above", s.vs_ramp.above}, {"equal", s.vs_ramp.equal}, {"below", s.vs_ramp.below}}}};
  return doc.dump(1) + "\n";
}

void emit_report(const std::vector<EvaluationRow>& rows, const std::filesystem::path& path, bool as_json) {
  write_text_file(path, as_json ? report_json(rows) : report_csv(rows));
}

std::string graph_size_csv(const std::vector<GraphSizeRow>& rows) {
  auto ratio = [](std::size_t a, std::size_t b) -> long long {
    return b == 0 ? 0 : std::llround(static_cast<double>(a) / static_cast<double>(b));
  };
  std::ostringstream out;
  out << "acquisitions,discrete_nodes,continuous_nodes,node_ratio,discrete_edges,continuous_edges,edge_ratio\n";
  for (const auto& r : rows) {
    out << r.acquisitions << ',' << r.discrete_nodes << ',' << r.continuous_nodes << ','
        << ratio(r.discrete_nodes, r.continuous_nodes) << ',' << r.discrete_edges << ',' << r.continuous_edges
        << ',' << ratio(r.discrete_edges, r.continuous_edges) << '\n';
  }
  return out.str();
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

void append_manifest(const std::filesystem::path& dir, const RunManifest& m) {
  const auto path = dir / kManifestName;
  nlohmann::json doc = {{"runs", nlohmann::json::array()}};
  if (std::filesystem::exists(path)) {
    try {
      doc = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& ex) {
      throw ParseError(path.string(), std::string("corrupt manifest: ") + ex.what());
    }
  }
  doc["runs"].push_back({{"command", m.command},
                         {"config_hash", m.config_hash},
                         {"seeds", m.seeds},
                         {"inputs", m.inputs},
                         {"artifacts", m.artifacts},
                         {"wall_clock_s", m.wall_clock_s},
                         {"version", m.version}});
  write_text_file(path, doc.dump(1) + "\n");
}

}  // namespace eosp
