#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace eosp {

// Scores of one evaluated instance (utility, or count under the unitary objective).
struct EvaluationRow {
  std::string instance;
  std::size_t acquisitions = 0;
  double policy = 0.0;
  double greedy = 0.0;
  double ramp = 0.0;
};

// How often the policy scored above / equal to / below a baseline.
struct Comparison {
  int above = 0;
  int equal = 0;
  int below = 0;
  bool operator==(const Comparison&) const = default;
};

struct EvaluationSummary {
  double mean_policy = 0.0;
  double mean_greedy = 0.0;
  double mean_ramp = 0.0;
  // Mean of per-instance ratios (not the ratio of means).
  double mean_ratio_vs_greedy = 0.0;
  double mean_ratio_vs_ramp = 0.0;
  Comparison vs_greedy;
  Comparison vs_ramp;
};

// Relative tolerance under which two scores count as a tie.
inline constexpr double kTieTolerance = 1e-9;

bool scores_tie(double a, double b);
// policy / baseline; 1 when both are zero.
double score_ratio(double policy, double baseline);

// Throws std::invalid_argument on an empty row set.
EvaluationSummary summarize(const std::vector<EvaluationRow>& rows);

std::string report_csv(const std::vector<EvaluationRow>& rows);
std::string report_json(const std::vector<EvaluationRow>& rows);
// Writes CSV, or JSON when `as_json`. Throws on empty rows or unwritable path.
void emit_report(const std::vector<EvaluationRow>& rows, const std::filesystem::path& path, bool as_json = false);

// Problem size of one instance in both graph representations.
struct GraphSizeRow {
  std::size_t acquisitions = 0;
  std::size_t discrete_nodes = 0;
  std::size_t continuous_nodes = 0;
  std::size_t discrete_edges = 0;
  std::size_t continuous_edges = 0;
};

// Ratio columns are discrete/continuous rounded to an integer (0 when the
// continuous count is 0).
std::string graph_size_csv(const std::vector<GraphSizeRow>& rows);

struct RunManifest {
  std::string command;
  std::string config_hash;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> inputs;
  std::vector<std::string> artifacts;
  double wall_clock_s = 0.0;
  std::string version;
};

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kManifestName = "manifest.json";

// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(const std::string& bytes);

// Appends a run record to <dir>/manifest.json, creating it if needed.
void append_manifest(const std::filesystem::path& dir, const RunManifest& manifest);

}  // namespace eosp
