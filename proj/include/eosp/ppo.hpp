#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "eosp/discrete_graph.hpp"
#include "eosp/environment.hpp"
#include "eosp/network.hpp"
#include "eosp/report.hpp"

namespace eosp::ppo {

struct PPOConfig {
  double clip = 0.2;
  double gae_lambda = 0.95;
  double gamma = 1.0;
  int epochs = 3;
  int minibatch_size = 64;
  double learning_rate = 3e-4;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  int episodes_per_batch = 16;
  double max_grad_norm = 0.5;
  long total_env_steps = 50000;
  int eval_every = 1;  // updates between evaluations

  void validate() const;
  bool operator==(const PPOConfig&) const = default;
};

struct TrainConfig {
  PPOConfig ppo;
  nn::NetworkConfig network;
  std::uint64_t seed = 0;
};

// {"ppo": {...}, "network": {"H","L","K",...}, "seed": n}; absent keys keep defaults.
TrainConfig parse_train_config(const std::string& text);
std::string serialize_train_config(const TrainConfig& config);

struct Transition {
  std::shared_ptr<const nn::RewiredGraph> graph;
  std::vector<char> mask;
  int action = 0;  // node position
  double log_prob = 0.0;
  double reward = 0.0;
  double value = 0.0;
  bool done = false;
  double advantage = 0.0;
  double ret = 0.0;
};

struct EpisodeRecord {
  std::size_t instance = 0;
  double episode_return = 0.0;
  double utility = 0.0;
  double mean_utility = 1.0;
  int count = 0;
  Schedule schedule;
};

struct RolloutBuffer {
  std::vector<Transition> transitions;  // episodes stored contiguously
  std::vector<EpisodeRecord> episodes;

  void clear() {
    transitions.clear();
    episodes.clear();
  }
};

// An instance with its discrete graph built once and copied per episode.
struct PreparedInstance {
  std::string name;
  std::shared_ptr<const Instance> instance;
  DiscreteGraph graph;
};

PreparedInstance prepare_instance(Instance inst, std::string name = {});

// Plays one episode to mask exhaustion. `record` receives every transition.
EpisodeRecord run_episode(const PreparedInstance& env, const nn::ParameterSet<float>& params,
                          nn::SampleMode mode, Rng& rng, std::vector<Transition>* record = nullptr);

// Complete episodes on instances drawn uniformly from `envs`; fills advantages.
RolloutBuffer collect_rollouts(std::span<const PreparedInstance> envs, const nn::ParameterSet<float>& params,
                               const PPOConfig& config, Rng& rng, nn::SampleMode mode = nn::SampleMode::kSample);

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// delta_t = r_t + gamma V_{t+1} (1 - done_t) - V_t,
// A_t = delta_t + gamma lambda (1 - done_t) A_{t+1}, returns = A + V.
GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const char> dones, double gamma, double lambda);

// Normalizes to mean 0 and std 1, dividing by max(std, 1e-8).
void normalize_advantages(std::span<double> advantages);

struct LossBreakdown {
  double total = 0.0;
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
};

// Clipped-surrogate loss averaged over `batch` (advantages as stored):
// policy + value_coef * value - entropy_coef * entropy. When `grads` is set,
// accumulates the gradient of that average into it.
template <typename T>
LossBreakdown ppo_loss(std::span<const Transition* const> batch, const nn::ParameterSet<T>& params,
                       const PPOConfig& config, nn::ParameterSet<T>* grads);

// Adam on the flattened parameter vector.
class Adam {
 public:
  explicit Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(nn::ParameterSet<float>& params, const nn::ParameterSet<float>& grads);
  long steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  Eigen::VectorXd m_, v_;
};

// Rescales `grads` so its global L2 norm is at most max_norm; returns the
// norm before clipping.
double clip_grad_norm(nn::ParameterSet<float>& grads, double max_norm);

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  int minibatches = 0;
};

// Normalizes advantages, then runs epochs of shuffled minibatch steps.
// Throws NumericError (without touching params) on a non-finite loss.
UpdateStats ppo_update(RolloutBuffer& buffer, nn::ParameterSet<float>& params, Adam& optimizer,
                       const PPOConfig& config, Rng& rng);

struct ReportRow {
  int update = 0;
  long env_steps = 0;
  double mean_return = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_frac = 0.0;
  bool evaluated = false;
  double eval_utility = 0.0;
  double eval_vs_greedy = 0.0;
  double eval_vs_ramp = 0.0;
};

struct TrainReport {
  std::vector<ReportRow> rows;
  int best_update = 0;  // 0: the initial parameters were never beaten
  double best_eval_utility = 0.0;

  std::string to_csv() const;
};

struct Baseline {
  double greedy = 0.0;
  double ramp = 0.0;
};

// Objective score of a schedule: count under the unitary objective, utility otherwise.
double objective_score(const Instance& inst, double utility, int count);

Baseline compute_baseline(const PreparedInstance& env);

// Argmax rollouts scored against greedy and RAMP.
std::vector<EvaluationRow> evaluate(const nn::ParameterSet<float>& params, std::span<const PreparedInstance> envs,
                                    std::span<const Baseline> baselines);
std::vector<EvaluationRow> evaluate(const nn::ParameterSet<float>& params, std::span<const PreparedInstance> envs);

struct TrainResult {
  nn::ParameterSet<float> best;
  nn::ParameterSet<float> last;
  TrainReport report;
};

// Alternates rollout collection and PPO updates, evaluating the argmax policy
// on `eval` every eval_every updates and keeping the best-scoring parameters.
// `on_update` (optional) sees every report row as it is produced.
TrainResult train(std::span<const PreparedInstance> train_set, std::span<const PreparedInstance> eval_set,
                  const TrainConfig& config, const std::function<void(const ReportRow&)>& on_update = {});

}  // namespace eosp::ppo
