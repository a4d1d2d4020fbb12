#pragma once

#include <string>
#include <vector>

#include "eosp/discrete_graph.hpp"
#include "eosp/instance.hpp"

namespace eosp {

// Absolute slack (seconds) tolerated when checking floating-point start times.
inline constexpr double kFeasibilityTolerance = 1e-9;

struct Violation {
  enum class Kind { kUnknownId, kBeforeWindow, kAfterWindow, kTransition };
  Kind kind = Kind::kUnknownId;
  int id = 0;
  int next_id = -1;    // second acquisition of a transition violation
  double slack = 0.0;  // negative amount by which the inequality fails

  std::string describe(const Instance& inst, const Schedule& sched) const;
};

struct ValidationResult {
  std::vector<Violation> violations;
  double utility = 0.0;  // recomputed from the instance
  int count = 0;

  bool ok() const { return violations.empty(); }
};

// Checks windows and consecutive transitions in time order. Violations are
// returned as data, never thrown.
ValidationResult validate_schedule(const Instance& inst, const Schedule& sched);

struct SolverReport {
  Schedule schedule;
  double utility = 0.0;
  int count = 0;
  double runtime = 0.0;  // seconds
  std::string algorithm;
};

// Insertion heuristic in decreasing utility. Accepted tasks may be postponed
// but are never dropped.
SolverReport greedy_schedule(const Instance& inst);

// Label-setting search on the discrete graph, one label per node. Nodes are
// expanded with open_successors, excluding acquisitions on the parent chain.
SolverReport ramp_schedule(const Instance& inst);
SolverReport ramp_schedule(const Instance& inst, const DiscreteGraph& graph);

inline constexpr std::size_t kDefaultOracleLimit = 12;

// Exhaustive search over acquisition sequences where each observation starts
// as early as its predecessor allows. Throws ContractError above `limit`.
SolverReport exact_oracle(const Instance& inst, std::size_t limit = kDefaultOracleLimit);

// Earliest continuous start of `next` after `prev` started at `prev_start`.
double earliest_start_after(const Instance& inst, const Acquisition& prev, double prev_start,
                            const Acquisition& next);

}  // namespace eosp
