#include "eosp/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "eosp/solvers.hpp"

namespace eosp::ppo {

using nn::Matrix;
using nn::ParameterSet;
using nn::Vector;

void PPOConfig::validate() const {
  if (!(clip > 0 && clip < 1)) throw ContractError("PPOConfig: clip must be in (0, 1)");
  if (!(gae_lambda >= 0 && gae_lambda <= 1)) throw ContractError("PPOConfig: gae_lambda must be in [0, 1]");
  if (gamma != 1.0) throw ContractError("PPOConfig: gamma must be 1 (undiscounted return)");
  if (epochs < 1 || minibatch_size < 1 || episodes_per_batch < 1 || eval_every < 1) {
    throw ContractError("PPOConfig: epochs, minibatch_size, episodes_per_batch and eval_every must be >= 1");
  }
  if (!(learning_rate > 0)) throw ContractError("PPOConfig: learning_rate must be positive");
  if (!(max_grad_norm > 0)) throw ContractError("PPOConfig: max_grad_norm must be positive");
}

TrainConfig parse_train_config(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& ex) {
    throw ParseError("<root>", std::string("malformed JSON: ") + ex.what());
  }
  TrainConfig c;
  auto read = [](const nlohmann::json& obj, const char* key, auto& target, const std::string& path) {
    if (!obj.contains(key)) return;
    try {
      target = obj.at(key).get<std::remove_reference_t<decltype(target)>>();
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError(path + "." + key, ex.what());
    }
  };
  if (doc.contains("ppo")) {
    const auto& p = doc["ppo"];
    read(p, "clip", c.ppo.clip, "ppo");
    read(p, "gae_lambda", c.ppo.gae_lambda, "ppo");
    read(p, "gamma", c.ppo.gamma, "ppo");
    read(p, "epochs", c.ppo.epochs, "ppo");
    read(p, "minibatch_size", c.ppo.minibatch_size, "ppo");
    read(p, "learning_rate", c.ppo.learning_rate, "ppo");
    read(p, "value_coef", c.ppo.value_coef, "ppo");
    read(p, "entropy_coef", c.ppo.entropy_coef, "ppo");
    read(p, "episodes_per_batch", c.ppo.episodes_per_batch, "ppo");
    read(p, "max_grad_norm", c.ppo.max_grad_norm, "ppo");
    read(p, "total_env_steps", c.ppo.total_env_steps, "ppo");
    read(p, "eval_every", c.ppo.eval_every, "ppo");
  }
  if (doc.contains("network")) {
    const auto& n = doc["network"];
    read(n, "H", c.network.hidden_dim, "network");
    read(n, "L", c.network.n_layers, "network");
    read(n, "K", c.network.n_heads, "network");
    read(n, "leaky_slope", c.network.leaky_slope, "network");
  }
  read(doc, "seed", c.seed, "");
  c.ppo.validate();
  c.network.validate();
  return c;
}

std::string serialize_train_config(const TrainConfig& c) {
  nlohmann::json doc;
  doc["ppo"] = {{"clip", c.ppo.clip},
                {"gae_lambda", c.ppo.gae_lambda},
                {"gamma", c.ppo.gamma},
                {"epochs", c.ppo.epochs},
                {"minibatch_size", c.ppo.minibatch_size},
                {"learning_rate", c.ppo.learning_rate},
                {"value_coef", c.ppo.value_coef},
                {"entropy_coef", c.ppo.entropy_coef},
                {"episodes_per_batch", c.ppo.episodes_per_batch},
                {"max_grad_norm", c.ppo.max_grad_norm},
                {"total_env_steps", c.ppo.total_env_steps},
                {"eval_every", c.ppo.eval_every}};
  doc["network"] = {{"H", c.network.hidden_dim},
                    {"L", c.network.n_layers},
                    {"K", c.network.n_heads},
                    {"leaky_slope", c.network.leaky_slope}};
  doc["seed"] = c.seed;
  return doc.dump(1) + "\n";
}

PreparedInstance prepare_instance(Instance inst, std::string name) {
  PreparedInstance env;
  env.name = name.empty() ? "seed_" + std::to_string(inst.seed) : std::move(name);
  env.graph = build_discrete_graph(inst);
  env.instance = std::make_shared<const Instance>(std::move(inst));
  return env;
}

EpisodeRecord run_episode(const PreparedInstance& env, const ParameterSet<float>& params, nn::SampleMode mode,
                          Rng& rng, std::vector<Transition>* record) {
  EnvState state = reset(env.instance, env.graph);
  EpisodeRecord episode;
  episode.mean_utility = state.mean_utility;
  while (!state.done()) {
    auto graph = std::make_shared<const nn::RewiredGraph>(nn::rewire(state.observation));
    const auto out = nn::forward(*graph, params);
    const auto logits = nn::to_doubles(out.logits);
    const auto choice = nn::sample_action(logits, state.observation.mask, mode, rng);
    const int acq = state.observation.node_ids[choice.position];
    Transition t;
    if (record) {
      t.graph = graph;
      t.mask = state.observation.mask;
      t.action = choice.position;
      t.log_prob = choice.log_prob;
      t.value = static_cast<double>(out.value);
    }
    const auto result = step(state, acq);
    episode.episode_return += result.reward;
    if (record) {
      t.reward = result.reward;
      t.done = result.done;
      record->push_back(std::move(t));
    }
  }
  const auto score = episode_score(state);
  episode.utility = score.utility;
  episode.count = score.count;
  episode.schedule = state.schedule();
  return episode;
}

RolloutBuffer collect_rollouts(std::span<const PreparedInstance> envs, const ParameterSet<float>& params,
                               const PPOConfig& config, Rng& rng, nn::SampleMode mode) {
  if (envs.empty()) throw ContractError("collect_rollouts: no environments");
  RolloutBuffer buffer;
  for (int e = 0; e < config.episodes_per_batch; ++e) {
    const auto which = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(envs.size()) - 1));
    const std::size_t first = buffer.transitions.size();
    auto episode = run_episode(envs[which], params, mode, rng, &buffer.transitions);
    episode.instance = which;
    buffer.episodes.push_back(std::move(episode));

    const std::size_t len = buffer.transitions.size() - first;
    std::vector<double> rewards(len), values(len);
    std::vector<char> dones(len);
    for (std::size_t i = 0; i < len; ++i) {
      const auto& t = buffer.transitions[first + i];
      rewards[i] = t.reward;
      values[i] = t.value;
      dones[i] = t.done;
    }
    const auto gae = compute_gae(rewards, values, dones, config.gamma, config.gae_lambda);
    for (std::size_t i = 0; i < len; ++i) {
      buffer.transitions[first + i].advantage = gae.advantages[i];
      buffer.transitions[first + i].ret = gae.returns[i];
    }
  }
  return buffer;
}

GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values, std::span<const char> dones,
                      double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) throw ContractError("compute_gae: misaligned inputs");
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double next_advantage = 0.0;
  double next_value = 0.0;  // bootstrap past the end is zero
  for (std::size_t k = n; k-- > 0;) {
    const double live = dones[k] ? 0.0 : 1.0;
    const double delta = rewards[k] + gamma * next_value * live - values[k];
    next_advantage = delta + gamma * lambda * live * next_advantage;
    out.advantages[k] = next_advantage;
    out.returns[k] = next_advantage + values[k];
    next_value = values[k];
  }
  return out;
}

void normalize_advantages(std::span<double> advantages) {
  if (advantages.empty()) return;
  const double n = static_cast<double>(advantages.size());
  const double mean = std::accumulate(advantages.begin(), advantages.end(), 0.0) / n;
  double var = 0.0;
  for (double a : advantages) var += (a - mean) * (a - mean);
  const double std_dev = std::max(std::sqrt(var / n), 1e-8);
  for (double& a : advantages) a = (a - mean) / std_dev;
}

template <typename T>
LossBreakdown ppo_loss(std::span<const Transition* const> batch, const ParameterSet<T>& params,
                       const PPOConfig& config, ParameterSet<T>* grads) {
  LossBreakdown loss;
  if (batch.empty()) return loss;
  const double scale = 1.0 / static_cast<double>(batch.size());
  int clipped = 0;
  for (const Transition* t : batch) {
    const auto out = nn::forward(*t->graph, params);
    const auto logits = nn::to_doubles(out.logits);
    const auto log_probs = nn::masked_log_softmax(logits, t->mask);
    const std::size_t n = logits.size();

    const double ratio = std::exp(log_probs[t->action] - t->log_prob);
    const double adv = t->advantage;
    const double unclipped = ratio * adv;
    const double bounded = std::clamp(ratio, 1.0 - config.clip, 1.0 + config.clip) * adv;
    const double surrogate = std::min(unclipped, bounded);
    if (std::abs(ratio - 1.0) > config.clip) ++clipped;

    double entropy = 0.0;
    std::vector<double> probs(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (!t->mask[j]) continue;
      probs[j] = std::exp(log_probs[j]);
      entropy -= probs[j] * log_probs[j];
    }
    const double value = static_cast<double>(out.value);
    const double value_err = value - t->ret;

    loss.policy -= scale * surrogate;
    loss.value += scale * value_err * value_err;
    loss.entropy += scale * entropy;

    if (grads) {
      // d(-surrogate)/d log pi(a): only the unclipped branch carries gradient.
      const double d_log_prob = unclipped <= bounded ? -unclipped : 0.0;
      Vector<T> d_logits = Vector<T>::Zero(static_cast<Eigen::Index>(n));
      for (std::size_t j = 0; j < n; ++j) {
        if (!t->mask[j]) continue;
        const double onehot = static_cast<int>(j) == t->action ? 1.0 : 0.0;
        double d = d_log_prob * (onehot - probs[j]);
        d += config.entropy_coef * probs[j] * (log_probs[j] + entropy);
        d_logits[static_cast<Eigen::Index>(j)] = static_cast<T>(scale * d);
      }
      const T d_value = static_cast<T>(scale * 2.0 * config.value_coef * value_err);
      nn::backward(*t->graph, params, out.trace, d_logits, d_value, *grads);
    }
  }
  loss.clip_fraction = static_cast<double>(clipped) * scale;
  loss.total = loss.policy + config.value_coef * loss.value - config.entropy_coef * loss.entropy;
  return loss;
}

template LossBreakdown ppo_loss<float>(std::span<const Transition* const>, const ParameterSet<float>&,
                                       const PPOConfig&, ParameterSet<float>*);
template LossBreakdown ppo_loss<double>(std::span<const Transition* const>, const ParameterSet<double>&,
                                        const PPOConfig&, ParameterSet<double>*);

void Adam::step(ParameterSet<float>& params, const ParameterSet<float>& grads) {
  const auto p = params.flatten();
  const auto g = grads.flatten();
  const auto n = static_cast<Eigen::Index>(p.size());
  if (m_.size() != n) {
    m_ = Eigen::VectorXd::Zero(n);
    v_ = Eigen::VectorXd::Zero(n);
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  std::vector<float> next(p.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double gi = g[i];
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * gi;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * gi * gi;
    const double update = lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
    next[i] = static_cast<float>(p[i] - update);
  }
  params.assign(next);
}

double clip_grad_norm(ParameterSet<float>& grads, double max_norm) {
  double sq = 0.0;
  grads.visit([&](const std::string&, const Matrix<float>& m) { sq += m.template cast<double>().squaredNorm(); });
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const float factor = static_cast<float>(max_norm / norm);
    grads.visit([&](const std::string&, Matrix<float>& m) { m *= factor; });
  }
  return norm;
}

UpdateStats ppo_update(RolloutBuffer& buffer, ParameterSet<float>& params, Adam& optimizer, const PPOConfig& config,
                       Rng& rng) {
  if (buffer.transitions.empty()) throw ContractError("ppo_update: empty rollout buffer");
  std::vector<double> advantages;
  advantages.reserve(buffer.transitions.size());
  for (const auto& t : buffer.transitions) advantages.push_back(t.advantage);
  normalize_advantages(advantages);

  std::vector<Transition> normalized = buffer.transitions;
  for (std::size_t i = 0; i < normalized.size(); ++i) normalized[i].advantage = advantages[i];

  UpdateStats stats;
  std::vector<std::size_t> order(normalized.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // Fisher-Yates with the project RNG for reproducibility.
    for (std::size_t i = order.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(order[i - 1], order[j]);
    }
    for (std::size_t begin = 0; begin < order.size(); begin += config.minibatch_size) {
      const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(config.minibatch_size));
      std::vector<const Transition*> batch;
      for (std::size_t i = begin; i < end; ++i) batch.push_back(&normalized[order[i]]);
      auto grads = ParameterSet<float>::zeros(params.config);
      const auto loss = ppo_loss<float>(batch, params, config, &grads);
      if (!std::isfinite(loss.total)) throw nn::NumericError("ppo_update: non-finite loss, update aborted");
      nn::check_finite_gradients(grads);
      clip_grad_norm(grads, config.max_grad_norm);
      optimizer.step(params, grads);
      stats.policy_loss += loss.policy;
      stats.value_loss += loss.value;
      stats.entropy += loss.entropy;
      stats.clip_fraction += loss.clip_fraction;
      ++stats.minibatches;
    }
  }
  const double m = std::max(1, stats.minibatches);
  stats.policy_loss /= m;
  stats.value_loss /= m;
  stats.entropy /= m;
  stats.clip_fraction /= m;
  buffer.clear();
  return stats;
}

std::string TrainReport::to_csv() const {
  std::ostringstream out;
  out << "update,env_steps,mean_return,policy_loss,value_loss,entropy,clip_frac,eval_utility,eval_vs_greedy,"
         "eval_vs_ramp\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%ld,%.9g,%.9g,%.9g,%.9g,%.9g", r.update, r.env_steps, r.mean_return,
                  r.policy_loss, r.value_loss, r.entropy, r.clip_frac);
    out << buf;
    if (r.evaluated) {
      std::snprintf(buf, sizeof(buf), ",%.12g,%.9g,%.9g", r.eval_utility, r.eval_vs_greedy, r.eval_vs_ramp);
      out << buf << '\n';
    } else {
      out << ",,,\n";
    }
  }
  return out.str();
}

double objective_score(const Instance& inst, double utility, int count) {
  return inst.objective == Objective::kUnitary ? static_cast<double>(count) : utility;
}

Baseline compute_baseline(const PreparedInstance& env) {
  const auto& inst = *env.instance;
  const auto greedy = greedy_schedule(inst);
  const auto ramp = ramp_schedule(inst, env.graph);
  return {objective_score(inst, greedy.utility, greedy.count), objective_score(inst, ramp.utility, ramp.count)};
}

std::vector<EvaluationRow> evaluate(const ParameterSet<float>& params, std::span<const PreparedInstance> envs,
                                    std::span<const Baseline> baselines) {
  if (envs.empty()) throw ContractError("evaluate: no instances");
  if (baselines.size() != envs.size()) throw ContractError("evaluate: baseline count mismatch");
  std::vector<EvaluationRow> rows;
  Rng unused(0);
  for (std::size_t i = 0; i < envs.size(); ++i) {
    const auto episode = run_episode(envs[i], params, nn::SampleMode::kArgmax, unused);
    EvaluationRow row;
    row.instance = envs[i].name;
    row.acquisitions = envs[i].instance->size();
    row.policy = objective_score(*envs[i].instance, episode.utility, episode.count);
    row.greedy = baselines[i].greedy;
    row.ramp = baselines[i].ramp;
    rows.push_back(row);
  }
  return rows;
}

std::vector<EvaluationRow> evaluate(const ParameterSet<float>& params, std::span<const PreparedInstance> envs) {
  std::vector<Baseline> baselines;
  for (const auto& env : envs) baselines.push_back(compute_baseline(env));
  return evaluate(params, envs, baselines);
}

TrainResult train(std::span<const PreparedInstance> train_set, std::span<const PreparedInstance> eval_set,
                  const TrainConfig& config, const std::function<void(const ReportRow&)>& on_update) {
  if (train_set.empty()) throw ContractError("train: no training instances");
  config.ppo.validate();
  auto params = nn::init_parameters<float>(config.network, config.seed);
  Adam optimizer(config.ppo.learning_rate);
  Rng rng(config.seed ^ 0x9E3779B97F4A7C15ULL);

  std::vector<Baseline> baselines;
  for (const auto& env : eval_set) baselines.push_back(compute_baseline(env));

  TrainResult result{params, params, {}};
  result.report.best_eval_utility = -std::numeric_limits<double>::infinity();
  long steps = 0;
  int update = 0;
  while (steps < config.ppo.total_env_steps) {
    auto buffer = collect_rollouts(train_set, params, config.ppo, rng);
    steps += static_cast<long>(buffer.transitions.size());
    ReportRow row;
    for (const auto& ep : buffer.episodes) row.mean_return += ep.episode_return;
    row.mean_return /= static_cast<double>(buffer.episodes.size());
    const auto stats = ppo_update(buffer, params, optimizer, config.ppo, rng);
    row.update = ++update;
    row.env_steps = steps;
    row.policy_loss = stats.policy_loss;
    row.value_loss = stats.value_loss;
    row.entropy = stats.entropy;
    row.clip_frac = stats.clip_fraction;
    const bool last = steps >= config.ppo.total_env_steps;
    if (!eval_set.empty() && (update % config.ppo.eval_every == 0 || last)) {
      const auto summary = summarize(evaluate(params, eval_set, baselines));
      row.evaluated = true;
      row.eval_utility = summary.mean_policy;
      row.eval_vs_greedy = summary.mean_ratio_vs_greedy;
      row.eval_vs_ramp = summary.mean_ratio_vs_ramp;
      if (row.eval_utility > result.report.best_eval_utility) {
        result.report.best_eval_utility = row.eval_utility;
        result.report.best_update = update;
        result.best = params;
      }
    }
    result.report.rows.push_back(row);
    if (on_update) on_update(row);
  }
  if (eval_set.empty()) {
    result.best = params;
    result.report.best_update = update;
  }
  result.last = params;
  return result;
}

}  // namespace eosp::ppo
