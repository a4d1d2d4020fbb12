#include "eosp/discrete_graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include <json.hpp>

namespace eosp {

namespace {

long long tick_ceil(double t, double delta) {
  auto tick = static_cast<long long>(std::ceil(t / delta));
  if (static_cast<double>(tick) * delta < t) ++tick;
  return tick;
}

long long tick_floor(double t, double delta) {
  auto tick = static_cast<long long>(std::floor(t / delta));
  if (static_cast<double>(tick) * delta > t) --tick;
  return tick;
}

const Acquisition& acquisition_of(const Instance& inst, const DiscreteNode& node,
                                  const Acquisition& origin) {
  return node.is_origin() ? origin : inst.acquisitions[node.acq];
}

}  // namespace

double grid_ceil(double t, double delta) { return static_cast<double>(tick_ceil(t, delta)) * delta; }

Acquisition origin_acquisition() {
  Acquisition origin;
  origin.id = kOriginAcq;
  origin.x = 0.0;
  origin.roll = 0.0;
  origin.duration = 0.0;
  return origin;
}

std::vector<int> DiscreteGraph::nodes_of(int acq) const {
  std::vector<int> out;
  for (int index : by_acq_[acq]) {
    if (alive(index)) out.push_back(index);
  }
  return out;
}

int DiscreteGraph::find(int acq, double start) const {
  if (acq == kOriginAcq) return start == 0.0 ? kOrigin : -1;
  if (acq < 0 || static_cast<std::size_t>(acq) >= by_acq_.size() || by_acq_[acq].empty()) return -1;
  const long long offset = std::llround(start / delta_) - first_tick_[acq];
  if (offset < 0 || offset >= static_cast<long long>(by_acq_[acq].size())) return -1;
  const int index = by_acq_[acq][offset];
  return nodes_[index].start == start ? index : -1;
}

std::vector<int> DiscreteGraph::successors() const { return out_[last_]; }

int DiscreteGraph::successor_for(int acq) const {
  for (int target : out_[last_]) {
    if (nodes_[target].acq == acq) return target;
  }
  return -1;
}

void DiscreteGraph::schedule(int chosen) {
  const auto& succ = out_[last_];
  if (chosen < 0 || std::find(succ.begin(), succ.end(), chosen) == succ.end()) {
    throw ContractError("apply_schedule_step: node " + std::to_string(chosen) +
                        " is not a successor of the last scheduled node");
  }
  out_[last_] = {chosen};
  for (int index : by_acq_[nodes_[chosen].acq]) {
    if (index != chosen) alive_[index] = 0;
  }
  scheduled_.push_back(chosen);
  last_ = chosen;
  reopen(chosen);
  remove_unreachable();
}

void DiscreteGraph::reopen(int index) {
  std::vector<char> unavailable(by_acq_.size(), 0);
  for (int s : scheduled_) unavailable[nodes_[s].acq] = 1;
  std::vector<int> revived;
  auto alive_targets = [&](int source, bool revive) {
    std::vector<int> out;
    for (const auto& target : open_successors(*inst_, nodes_[source], unavailable)) {
      const int t = find(target.acq, target.start);
      if (t < 0) continue;
      if (!alive_[t]) {
        if (!revive) continue;
        alive_[t] = 1;
        out_[t].clear();
        revived.push_back(t);
      }
      out.push_back(t);
    }
    return out;
  };
  out_[index] = alive_targets(index, true);
  for (int t : revived) out_[t] = alive_targets(t, false);
}

std::vector<char> DiscreteGraph::reachable_from_origin() const {
  std::vector<char> seen(nodes_.size(), 0);
  std::deque<int> queue{kOrigin};
  seen[kOrigin] = 1;
  while (!queue.empty()) {
    const int current = queue.front();
    queue.pop_front();
    for (int target : out_[current]) {
      if (!alive_[target] || seen[target]) continue;
      seen[target] = 1;
      queue.push_back(target);
    }
  }
  return seen;
}

void DiscreteGraph::remove_unreachable() {
  const auto seen = reachable_from_origin();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!seen[i]) {
      alive_[i] = 0;
      out_[i].clear();
    }
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!alive_[i]) continue;
    auto& edges = out_[i];
    edges.erase(std::remove_if(edges.begin(), edges.end(), [&](int t) { return !alive_[t]; }),
                edges.end());
  }
}

GraphStats DiscreteGraph::stats() const {
  GraphStats stats;
  stats.nodes_per_acquisition.assign(by_acq_.size(), 0);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!alive_[i]) continue;
    ++stats.nodes;
    stats.edges += out_[i].size();
    if (!nodes_[i].is_origin()) ++stats.nodes_per_acquisition[nodes_[i].acq];
  }
  return stats;
}

Schedule DiscreteGraph::induced_schedule(std::uint64_t instance_seed) const {
  Schedule sched;
  sched.instance_seed = instance_seed;
  for (int index : scheduled_) sched.entries[nodes_[index].acq] = nodes_[index].start;
  return sched;
}

std::string DiscreteGraph::to_json() const {
  nlohmann::json doc;
  std::vector<int> compact(nodes_.size(), -1);
  auto nodes = nlohmann::json::array();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!alive_[i]) continue;
    compact[i] = static_cast<int>(nodes.size());
    nodes.push_back({{"acq", nodes_[i].acq}, {"t", nodes_[i].start}});
  }
  auto edges = nlohmann::json::array();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!alive_[i]) continue;
    for (int target : out_[i]) edges.push_back({compact[i], compact[target]});
  }
  doc["nodes"] = std::move(nodes);
  doc["edges"] = std::move(edges);
  return doc.dump() + "\n";
}

std::optional<Witness> prune_edge(const Instance& inst, const DiscreteNode& source,
                                  const DiscreteNode& target, std::span<const char> unavailable) {
  const Acquisition origin = origin_acquisition();
  const auto& model = inst.model;
  const Acquisition& from = acquisition_of(inst, source, origin);
  const Acquisition& to = inst.acquisitions[target.acq];
  const double source_end = source.start + from.duration;
  for (const auto& k : inst.acquisitions) {
    if (k.id == source.acq || k.id == target.acq) continue;
    if (!unavailable.empty() && unavailable[k.id]) continue;
    // Cheap rejections before evaluating any transition.
    if (k.e + k.duration + model.settle > target.start) continue;
    if (k.latest_start() < source_end + model.settle) continue;
    const double lo = std::max(k.e, source_end + transition_duration(from, source.start, k, model));
    const long long last_tick = tick_floor(k.latest_start(), model.delta);
    for (long long tick = tick_ceil(lo, model.delta); tick <= last_tick; ++tick) {
      const double t_k = static_cast<double>(tick) * model.delta;
      if (t_k + k.duration + model.settle > target.start) break;
      if (t_k + k.duration + transition_duration(k, t_k, to, model) <= target.start) {
        return Witness{k.id, t_k};
      }
    }
  }
  return std::nullopt;
}

std::optional<DiscreteNode> earliest_target(const Instance& inst, const DiscreteNode& source,
                                            const Acquisition& to) {
  const Acquisition origin = origin_acquisition();
  const auto& model = inst.model;
  const Acquisition& from = acquisition_of(inst, source, origin);
  const double earliest =
      std::max(to.e, source.start + from.duration + transition_duration(from, source.start, to, model));
  const long long tick = std::max(tick_ceil(earliest, model.delta), tick_ceil(to.e, model.delta));
  if (tick > tick_floor(to.latest_start(), model.delta)) return std::nullopt;
  return DiscreteNode{to.id, static_cast<double>(tick) * model.delta};
}

std::vector<DiscreteNode> open_successors(const Instance& inst, const DiscreteNode& source,
                                          std::span<const char> unavailable) {
  std::vector<DiscreteNode> out;
  for (const auto& to : inst.acquisitions) {
    if (to.id == source.acq || (!unavailable.empty() && unavailable[to.id])) continue;
    const auto target = earliest_target(inst, source, to);
    if (target && !prune_edge(inst, source, *target, unavailable)) out.push_back(*target);
  }
  return out;
}

bool witness_holds(const Instance& inst, const DiscreteNode& source, const DiscreteNode& target,
                   const Witness& witness) {
  if (witness.acq == source.acq || witness.acq == target.acq) return false;
  const Acquisition origin = origin_acquisition();
  const auto& model = inst.model;
  const Acquisition& from = acquisition_of(inst, source, origin);
  const Acquisition& k = inst.acquisitions[witness.acq];
  const Acquisition& to = inst.acquisitions[target.acq];
  const double t_k = witness.start;
  const bool after_source =
      t_k >= source.start + from.duration + transition_duration(from, source.start, k, model);
  const bool in_window = t_k >= k.e && t_k <= k.latest_start();
  const bool before_target = t_k + k.duration + transition_duration(k, t_k, to, model) <= target.start;
  return after_source && in_window && before_target;
}

DiscreteGraph build_discrete_graph(const Instance& inst) {
  const auto& model = inst.model;
  const double delta = model.delta;
  const Acquisition origin = origin_acquisition();
  const std::size_t n = inst.size();

  DiscreteGraph g;
  g.inst_ = std::make_shared<const Instance>(inst);
  g.delta_ = delta;
  g.nodes_.push_back(DiscreteNode{});
  g.by_acq_.resize(n);
  g.first_tick_.assign(n, 0);
  for (const auto& a : inst.acquisitions) {
    const long long lo = tick_ceil(a.e, delta);
    const long long hi = tick_floor(a.latest_start(), delta);
    g.first_tick_[a.id] = lo;
    for (long long tick = lo; tick <= hi; ++tick) {
      g.by_acq_[a.id].push_back(static_cast<int>(g.nodes_.size()));
      g.nodes_.push_back(DiscreteNode{a.id, static_cast<double>(tick) * delta});
    }
  }
  g.alive_.assign(g.nodes_.size(), 1);
  g.out_.resize(g.nodes_.size());

  for (std::size_t m = 0; m < g.nodes_.size(); ++m) {
    const DiscreteNode source = g.nodes_[m];
    const Acquisition& from = acquisition_of(inst, source, origin);
    const double source_end = source.start + from.duration;
    for (const auto& to : inst.acquisitions) {
      if (to.id == source.acq || g.by_acq_[to.id].empty()) continue;
      const double earliest =
          std::max(to.e, source_end + transition_duration(from, source.start, to, model));
      const long long offset = std::max(0LL, tick_ceil(earliest, delta) - g.first_tick_[to.id]);
      if (offset >= static_cast<long long>(g.by_acq_[to.id].size())) continue;
      const int target = g.by_acq_[to.id][offset];
      if (auto witness = prune_edge(inst, source, g.nodes_[target])) {
        g.pruned_.push_back(PrunedEdge{static_cast<int>(m), target, *witness});
      } else {
        g.out_[m].push_back(target);
      }
    }
  }
  g.remove_unreachable();
  return g;
}

DiscreteGraph apply_schedule_step(DiscreteGraph graph, int chosen) {
  graph.schedule(chosen);
  return graph;
}

}  // namespace eosp
