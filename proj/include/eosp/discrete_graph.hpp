#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eosp/instance.hpp"

namespace eosp {

inline constexpr int kOriginAcq = -1;

// Starting acquisition `acq` at grid time `start`. The origin node uses
// kOriginAcq at time 0.
struct DiscreteNode {
  int acq = kOriginAcq;
  double start = 0.0;

  bool is_origin() const { return acq == kOriginAcq; }
  bool operator==(const DiscreteNode&) const = default;
};

// Acquisition k fits between the two ends of a removed edge.
struct Witness {
  int acq = 0;
  double start = 0.0;
};

struct PrunedEdge {
  int source = 0;  // node index
  int target = 0;  // node index
  Witness witness;
};

struct GraphStats {
  std::size_t nodes = 0;  // including the origin
  std::size_t edges = 0;
  std::vector<std::size_t> nodes_per_acquisition;
};

// Time-expanded decision graph over (acquisition, grid start time) nodes.
//
// Node indices are stable for the lifetime of the graph: removed nodes stay
// in storage with alive(i) == false so that pruning witnesses and schedules
// can keep referring to them. Out-edge lists only hold alive targets.
class DiscreteGraph {
 public:
  static constexpr int kOrigin = 0;

  std::size_t node_capacity() const { return nodes_.size(); }
  const DiscreteNode& node(int index) const { return nodes_[index]; }
  bool alive(int index) const { return alive_[index] != 0; }
  std::span<const int> out_edges(int index) const { return out_[index]; }

  std::size_t acquisition_count() const { return by_acq_.size(); }
  // Alive node indices of one acquisition, in increasing start time.
  std::vector<int> nodes_of(int acq) const;
  // Index of the node (acq, start) if it exists (alive or not), else -1.
  int find(int acq, double start) const;

  int last_scheduled() const { return last_; }
  const std::vector<int>& scheduled() const { return scheduled_; }
  const std::vector<PrunedEdge>& pruned_edges() const { return pruned_; }

  // Alive targets of the last scheduled node; empty when the episode is over.
  std::vector<int> successors() const;
  // Successor node for acquisition `acq`, or -1.
  int successor_for(int acq) const;
  bool terminal() const { return out_[last_].empty(); }

  // Applies the three-step update for scheduling `chosen` next:
  // (1) keep only the edge last -> chosen, (2) drop every other node of
  // chosen's acquisition, (3) drop nodes unreachable from the origin.
  // Before (3) the out-edges of `chosen` are re-derived with only unscheduled
  // acquisitions accepted as pruning witnesses (see open_successors), reviving
  // target nodes as needed. Throws ContractError if `chosen` is not a successor.
  void schedule(int chosen);

  const Instance& instance() const { return *inst_; }

  // Alive node mask from a breadth-first walk out of the origin.
  std::vector<char> reachable_from_origin() const;

  GraphStats stats() const;

  // Schedule induced by the scheduled node list.
  Schedule induced_schedule(std::uint64_t instance_seed) const;

  // {nodes:[{acq,t}], edges:[[src,dst]]} over alive nodes.
  std::string to_json() const;

 private:
  friend DiscreteGraph build_discrete_graph(const Instance& inst);

  void remove_unreachable();
  void reopen(int index);

  std::vector<DiscreteNode> nodes_;
  std::vector<char> alive_;
  std::vector<std::vector<int>> out_;
  std::vector<std::vector<int>> by_acq_;
  std::vector<long long> first_tick_;  // grid index of by_acq_[a].front()
  double delta_ = 1.0;
  int last_ = kOrigin;
  std::vector<int> scheduled_;
  std::vector<PrunedEdge> pruned_;
  std::shared_ptr<const Instance> inst_;
};

// Pseudo-acquisition used for transitions out of the origin: nadir attitude
// at t = 0 with zero duration.
Acquisition origin_acquisition();

// Builds nodes, earliest-successor edges, prunes edges that admit an inserted
// observation, then drops nodes unreachable from the origin.
DiscreteGraph build_discrete_graph(const Instance& inst);

// Returns the witness (lowest acquisition id, then earliest grid time) that
// can be inserted between `source` and `target`, or nullopt if the edge stays.
// Acquisitions flagged in `unavailable` (indexed by id) are never witnesses.
std::optional<Witness> prune_edge(const Instance& inst, const DiscreteNode& source,
                                  const DiscreteNode& target, std::span<const char> unavailable = {});

// Earliest grid node of `to` that can follow `source`, if its window allows one.
std::optional<DiscreteNode> earliest_target(const Instance& inst, const DiscreteNode& source,
                                            const Acquisition& to);

// Earliest-edge targets out of `source` over acquisitions not flagged in
// `unavailable`, minus those admitting a witness that is itself available.
// In increasing acquisition id.
std::vector<DiscreteNode> open_successors(const Instance& inst, const DiscreteNode& source,
                                          std::span<const char> unavailable);

// True when all three insertion inequalities hold for the witness.
bool witness_holds(const Instance& inst, const DiscreteNode& source, const DiscreteNode& target,
                   const Witness& witness);

// Copying form of DiscreteGraph::schedule.
DiscreteGraph apply_schedule_step(DiscreteGraph graph, int chosen);

// Earliest grid time >= t for step delta.
double grid_ceil(double t, double delta);

}  // namespace eosp
