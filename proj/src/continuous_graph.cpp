#include "eosp/continuous_graph.hpp"

#include <algorithm>

#include <json.hpp>

namespace eosp {

namespace {

constexpr double kRollScale = 30.0;

NodeStatus status_of(const DiscreteGraph& graph, int acq) {
  const auto& scheduled = graph.scheduled();
  if (!scheduled.empty() && graph.node(scheduled.back()).acq == acq) return NodeStatus::kLastScheduled;
  for (int index : scheduled) {
    if (graph.node(index).acq == acq) return NodeStatus::kScheduled;
  }
  if (graph.successor_for(acq) >= 0) return NodeStatus::kAvailableNow;
  return NodeStatus::kFutureCandidate;
}

}  // namespace

std::array<double, kFeatureDim> NodeFeatureVector::values() const {
  std::array<double, kFeatureDim> out{e,        l,        duration,  pitch_min,    pitch_max,
                                      pitch_mean, roll_min, roll_max, roll_mean, utility_norm,
                                      0.0,      0.0,      0.0,       0.0};
  out[10 + static_cast<int>(status)] = 1.0;
  return out;
}

int ContinuousObservation::index_of(int acq) const {
  auto it = std::lower_bound(node_ids.begin(), node_ids.end(), acq);
  if (it != node_ids.end() && *it == acq) return static_cast<int>(it - node_ids.begin());
  // Permuted observations are not sorted.
  it = std::find(node_ids.begin(), node_ids.end(), acq);
  return it == node_ids.end() ? -1 : static_cast<int>(it - node_ids.begin());
}

std::size_t ContinuousObservation::mask_count() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1));
}

std::string ContinuousObservation::to_json() const {
  nlohmann::json doc;
  auto nodes = nlohmann::json::array();
  for (std::size_t i = 0; i < node_ids.size(); ++i) {
    const auto values = features[i].values();
    nodes.push_back({{"id", node_ids[i]},
                     {"features", std::vector<double>(values.begin(), values.end())},
                     {"mask", mask[i] != 0}});
  }
  auto links = nlohmann::json::array();
  for (const auto& [from, to] : edges) links.push_back({node_ids[from], node_ids[to]});
  doc["nodes"] = std::move(nodes);
  doc["edges"] = std::move(links);
  return doc.dump() + "\n";
}

NodeFeatureVector compute_node_features(const Instance& inst, const DiscreteGraph& graph, int acq) {
  const auto& model = inst.model;
  const auto& a = inst.acquisitions[acq];
  NodeFeatureVector f;
  f.e = a.e / model.tau;
  f.l = a.l / model.tau;
  f.duration = a.duration / model.tau;
  // Pitch decreases linearly in time, so the extremes sit at the window ends.
  f.pitch_max = pitch_at(a, a.e, model) / model.pitch_max;
  f.pitch_min = pitch_at(a, a.l, model) / model.pitch_max;
  f.pitch_mean = pitch_at(a, 0.5 * (a.e + a.l), model) / model.pitch_max;
  f.roll_min = f.roll_max = f.roll_mean = a.roll / kRollScale;
  const double mean_utility = inst.mean_utility();
  f.utility_norm = mean_utility > 0 ? a.utility / mean_utility : 0.0;
  f.status = status_of(graph, acq);
  return f;
}

ContinuousObservation derive_continuous_graph(const DiscreteGraph& graph, const Instance& inst) {
  ContinuousObservation obs;
  const auto stats = graph.stats();
  std::vector<int> position(inst.size(), -1);
  for (std::size_t acq = 0; acq < inst.size(); ++acq) {
    if (stats.nodes_per_acquisition[acq] == 0) continue;
    position[acq] = static_cast<int>(obs.node_ids.size());
    obs.node_ids.push_back(static_cast<int>(acq));
  }
  std::vector<std::pair<int, int>> edges;
  for (std::size_t m = 0; m < graph.node_capacity(); ++m) {
    const auto& source = graph.node(static_cast<int>(m));
    if (!graph.alive(static_cast<int>(m)) || source.is_origin()) continue;
    for (int target : graph.out_edges(static_cast<int>(m))) {
      edges.emplace_back(position[source.acq], position[graph.node(target).acq]);
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  obs.edges = std::move(edges);

  obs.features.reserve(obs.node_ids.size());
  obs.mask.assign(obs.node_ids.size(), 0);
  for (int acq : obs.node_ids) obs.features.push_back(compute_node_features(inst, graph, acq));
  for (int target : graph.successors()) obs.mask[position[graph.node(target).acq]] = 1;
  return obs;
}

ContinuousObservation refresh_after_step(const ContinuousObservation& /*previous*/,
                                         const DiscreteGraph& graph, const Instance& inst) {
  return derive_continuous_graph(graph, inst);
}

}  // namespace eosp
