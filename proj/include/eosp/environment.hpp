#pragma once

#include <memory>
#include <string>
#include <vector>

#include "eosp/continuous_graph.hpp"
#include "eosp/discrete_graph.hpp"
#include "eosp/instance.hpp"

namespace eosp {

struct StepRecord {
  int acq_id = 0;
  double start = 0.0;
  double reward = 0.0;
  std::size_t mask_size = 0;  // feasible actions when the step was taken
};

// Sequential decision state: the discrete graph is the true state, the
// observation is what the policy sees.
struct EnvState {
  std::shared_ptr<const Instance> instance;
  DiscreteGraph discrete;
  ContinuousObservation observation;
  double cumulative_utility = 0.0;
  int step_count = 0;
  double mean_utility = 1.0;
  std::vector<StepRecord> trajectory;

  bool done() const { return discrete.terminal(); }
  Schedule schedule() const { return discrete.induced_schedule(instance->seed); }
};

struct StepInfo {
  int scheduled_id = 0;
  double start_time = 0.0;
};

struct StepResult {
  ContinuousObservation observation;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

struct EpisodeScore {
  double utility = 0.0;
  int count = 0;
};

EnvState reset(std::shared_ptr<const Instance> inst);
// Starts from an already built graph of the same instance (no rebuild).
EnvState reset(std::shared_ptr<const Instance> inst, const DiscreteGraph& fresh_graph);
EnvState reset(const Instance& inst);

// Schedules acquisition `action` at its earliest successor node. The reward
// is u / mean utility, which is 1 under the unitary objective. Throws
// ContractError for masked-out actions.
StepResult step(EnvState& state, int action);

EpisodeScore episode_score(const EnvState& state);

// One JSON object per line: {acq_id, start, reward, mask_size}.
std::string trajectory_jsonl(const EnvState& state);

}  // namespace eosp
