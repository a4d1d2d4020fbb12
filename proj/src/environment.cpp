#include "eosp/environment.hpp"

#include <json.hpp>

namespace eosp {

EnvState reset(std::shared_ptr<const Instance> inst, const DiscreteGraph& fresh_graph) {
  EnvState state;
  state.discrete = fresh_graph;
  state.observation = derive_continuous_graph(state.discrete, *inst);
  state.mean_utility = inst->mean_utility();
  state.instance = std::move(inst);
  return state;
}

EnvState reset(std::shared_ptr<const Instance> inst) {
  const DiscreteGraph graph = build_discrete_graph(*inst);
  return reset(std::move(inst), graph);
}

EnvState reset(const Instance& inst) { return reset(std::make_shared<const Instance>(inst)); }

StepResult step(EnvState& state, int action) {
  const int position = state.observation.index_of(action);
  if (position < 0 || !state.observation.mask[position]) {
    throw ContractError("step: action " + std::to_string(action) + " is masked out");
  }
  const int node = state.discrete.successor_for(action);
  if (node < 0) {
    throw ContractError("step: mask and successor set disagree for action " + std::to_string(action));
  }
  const std::size_t mask_size = state.observation.mask_count();
  state.discrete.schedule(node);
  state.observation = refresh_after_step(state.observation, state.discrete, *state.instance);

  const double utility = state.instance->acquisitions[action].utility;
  state.cumulative_utility += utility;
  ++state.step_count;

  StepResult result;
  result.reward = utility / state.mean_utility;
  result.done = state.done();
  result.info = StepInfo{action, state.discrete.node(node).start};
  result.observation = state.observation;
  state.trajectory.push_back(StepRecord{action, result.info.start_time, result.reward, mask_size});
  return result;
}

EpisodeScore episode_score(const EnvState& state) {
  return EpisodeScore{state.cumulative_utility, static_cast<int>(state.discrete.scheduled().size())};
}

std::string trajectory_jsonl(const EnvState& state) {
  std::string out;
  for (const auto& r : state.trajectory) {
    nlohmann::json line = {
        {"acq_id", r.acq_id}, {"start", r.start}, {"reward", r.reward}, {"mask_size", r.mask_size}};
    out += line.dump() + "\n";
  }
  return out;
}

}  // namespace eosp
