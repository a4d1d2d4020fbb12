#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "eosp/discrete_graph.hpp"
#include "eosp/instance.hpp"

namespace eosp {

enum class NodeStatus { kLastScheduled = 0, kScheduled = 1, kAvailableNow = 2, kFutureCandidate = 3 };

inline constexpr int kFeatureDim = 14;

// Normalized per-acquisition attributes seen by the policy.
struct NodeFeatureVector {
  double e = 0, l = 0, duration = 0;                 // / tau
  double pitch_min = 0, pitch_max = 0, pitch_mean = 0;  // / model pitch_max
  double roll_min = 0, roll_max = 0, roll_mean = 0;     // / 30 deg
  double utility_norm = 0;                           // u / mean utility
  NodeStatus status = NodeStatus::kFutureCandidate;

  // Flat layout: 10 scalars followed by the 4-way status one-hot.
  std::array<double, kFeatureDim> values() const;

  bool operator==(const NodeFeatureVector&) const = default;
};

// One node per acquisition still present in the discrete graph. Edges and
// the action mask refer to positions in `node_ids`.
struct ContinuousObservation {
  std::vector<int> node_ids;
  std::vector<NodeFeatureVector> features;
  std::vector<std::pair<int, int>> edges;
  std::vector<char> mask;

  std::size_t size() const { return node_ids.size(); }
  // Position of an acquisition id, or -1.
  int index_of(int acq) const;
  std::size_t mask_count() const;

  // {nodes:[{id, features[...], mask}], edges:[[i,j]]} with acquisition ids.
  std::string to_json() const;

  bool operator==(const ContinuousObservation&) const = default;
};

NodeFeatureVector compute_node_features(const Instance& inst, const DiscreteGraph& graph, int acq);

ContinuousObservation derive_continuous_graph(const DiscreteGraph& graph, const Instance& inst);

// Observation for the graph state after apply_schedule_step. Features are a
// pure function of the state, so this re-derives from `graph`.
ContinuousObservation refresh_after_step(const ContinuousObservation& previous,
                                         const DiscreteGraph& graph, const Instance& inst);

}  // namespace eosp
