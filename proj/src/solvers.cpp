#include "eosp/solvers.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>
#include <unordered_map>

namespace eosp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

SolverReport finish(const Instance& inst, Schedule sched, std::string algorithm,
                    Clock::time_point started) {
  SolverReport report;
  report.runtime = seconds_since(started);
  sched.instance_seed = inst.seed;
  const auto check = validate_schedule(inst, sched);
  report.utility = check.utility;
  report.count = check.count;
  report.schedule = std::move(sched);
  report.algorithm = std::move(algorithm);
  return report;
}

}  // namespace

std::string Violation::describe(const Instance& inst, const Schedule& sched) const {
  std::ostringstream out;
  out.precision(12);
  switch (kind) {
    case Kind::kUnknownId:
      out << "acquisition " << id << " does not exist in the instance";
      break;
    case Kind::kBeforeWindow: {
      const auto& a = inst.acquisitions[id];
      out << "acquisition " << id << ": start " << sched.entries.at(id) << " < e = " << a.e
          << " (slack " << slack << ")";
      break;
    }
    case Kind::kAfterWindow: {
      const auto& a = inst.acquisitions[id];
      out << "acquisition " << id << ": start " << sched.entries.at(id) << " > l - d = " << a.latest_start()
          << " (slack " << slack << ")";
      break;
    }
    case Kind::kTransition: {
      const auto& a = inst.acquisitions[id];
      const double t_i = sched.entries.at(id);
      const double t_j = sched.entries.at(next_id);
      const double need = a.duration + transition_duration(a, t_i, inst.acquisitions[next_id], inst.model);
      out << "transition " << id << " -> " << next_id << ": t_j - t_i = " << (t_j - t_i)
          << " < d_i + Delta_ij(t_i) = " << need << " (slack " << slack << ")";
      break;
    }
  }
  return out.str();
}

ValidationResult validate_schedule(const Instance& inst, const Schedule& sched) {
  ValidationResult result;
  std::vector<std::pair<int, double>> known;
  for (const auto& [id, start] : sched.chronological()) {
    if (id < 0 || static_cast<std::size_t>(id) >= inst.size()) {
      result.violations.push_back({Violation::Kind::kUnknownId, id, -1, 0.0});
      continue;
    }
    known.emplace_back(id, start);
    const auto& a = inst.acquisitions[id];
    if (start < a.e - kFeasibilityTolerance) {
      result.violations.push_back({Violation::Kind::kBeforeWindow, id, -1, start - a.e});
    }
    if (start > a.latest_start() + kFeasibilityTolerance) {
      result.violations.push_back({Violation::Kind::kAfterWindow, id, -1, a.latest_start() - start});
    }
    ++result.count;
  }
  // Summed in id order so equal selections give bit-identical utilities.
  for (const auto& [id, start] : sched.entries) {
    if (id >= 0 && static_cast<std::size_t>(id) < inst.size()) result.utility += inst.acquisitions[id].utility;
  }
  for (std::size_t k = 1; k < known.size(); ++k) {
    const auto& [i, t_i] = known[k - 1];
    const auto& [j, t_j] = known[k];
    const auto& a = inst.acquisitions[i];
    const double slack =
        (t_j - t_i) - (a.duration + transition_duration(a, t_i, inst.acquisitions[j], inst.model));
    if (slack < -kFeasibilityTolerance) {
      result.violations.push_back({Violation::Kind::kTransition, i, j, slack});
    }
  }
  return result;
}

double earliest_start_after(const Instance& inst, const Acquisition& prev, double prev_start,
                            const Acquisition& next) {
  return std::max(next.e,
                  prev_start + prev.duration + transition_duration(prev, prev_start, next, inst.model));
}

SolverReport greedy_schedule(const Instance& inst) {
  const auto started = Clock::now();
  std::vector<int> order(inst.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& x = inst.acquisitions[a];
    const auto& y = inst.acquisitions[b];
    if (x.utility != y.utility) return x.utility > y.utility;
    if (x.e != y.e) return x.e < y.e;
    return a < b;
  });

  std::vector<int> sequence;
  std::vector<double> starts;
  std::vector<double> trial;
  for (int candidate : order) {
    int best_position = -1;
    double best_postponement = std::numeric_limits<double>::infinity();
    std::vector<double> best_starts;
    for (std::size_t p = 0; p <= sequence.size(); ++p) {
      trial.assign(starts.begin(), starts.begin() + static_cast<std::ptrdiff_t>(p));
      bool feasible = true;
      double postponement = 0.0;
      for (std::size_t q = p; q <= sequence.size() && feasible; ++q) {
        const int id = q == p ? candidate : sequence[q - 1];
        const auto& a = inst.acquisitions[id];
        double t = a.e;
        if (q > 0) {
          const int prev = q - 1 == p ? candidate : (q - 1 < p ? sequence[q - 1] : sequence[q - 2]);
          t = earliest_start_after(inst, inst.acquisitions[prev], trial.back(), a);
        }
        if (t > a.latest_start()) feasible = false;
        if (q > p) postponement += t - starts[q - 1];
        trial.push_back(t);
      }
      if (feasible && postponement < best_postponement) {
        best_postponement = postponement;
        best_position = static_cast<int>(p);
        best_starts = trial;
      }
    }
    if (best_position >= 0) {
      sequence.insert(sequence.begin() + best_position, candidate);
      starts = std::move(best_starts);
    }
  }

  Schedule sched;
  for (std::size_t q = 0; q < sequence.size(); ++q) sched.entries[sequence[q]] = starts[q];
  return finish(inst, std::move(sched), "greedy", started);
}

SolverReport ramp_schedule(const Instance& inst) {
  const auto started = Clock::now();
  const auto graph = build_discrete_graph(inst);
  auto report = ramp_schedule(inst, graph);
  report.runtime = seconds_since(started);
  return report;
}

SolverReport ramp_schedule(const Instance& inst, const DiscreteGraph& graph) {
  const auto started = Clock::now();
  constexpr double kUnset = -std::numeric_limits<double>::infinity();
  const std::size_t n = graph.node_capacity();

  std::vector<double> label(n, kUnset);
  std::vector<int> parent(n, -1);
  std::vector<char> expanded(n, 0);
  label[DiscreteGraph::kOrigin] = 0.0;

  // Edges strictly increase time, so popping in start-time order settles
  // every label before it is expanded.
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  open.emplace(0.0, DiscreteGraph::kOrigin);

  std::vector<char> on_chain(inst.size(), 0);
  int best = DiscreteGraph::kOrigin;
  while (!open.empty()) {
    const int m = open.top().second;
    open.pop();
    if (expanded[m]) continue;
    expanded[m] = 1;
    if (label[m] > label[best]) best = m;

    std::fill(on_chain.begin(), on_chain.end(), 0);
    for (int cur = m; cur > DiscreteGraph::kOrigin; cur = parent[cur]) on_chain[graph.node(cur).acq] = 1;
    for (const auto& next : open_successors(inst, graph.node(m), on_chain)) {
      const int target = graph.find(next.acq, next.start);
      if (target < 0) continue;
      const double candidate = label[m] + inst.acquisitions[next.acq].utility;
      if (candidate > label[target]) {
        label[target] = candidate;
        parent[target] = m;
        open.emplace(next.start, target);
      }
    }
  }

  Schedule sched;
  for (int cur = best; cur > DiscreteGraph::kOrigin; cur = parent[cur]) {
    sched.entries[graph.node(cur).acq] = graph.node(cur).start;
  }
  return finish(inst, std::move(sched), "ramp", started);
}

namespace {

struct OracleKey {
  std::uint32_t visited;
  int last;
  std::uint64_t start_bits;
  bool operator==(const OracleKey&) const = default;
};

struct OracleKeyHash {
  std::size_t operator()(const OracleKey& k) const {
    std::size_t h = k.visited;
    h = h * 1000003u ^ static_cast<std::size_t>(k.last + 1);
    h = h * 1000003u ^ static_cast<std::size_t>(k.start_bits ^ (k.start_bits >> 29));
    return h;
  }
};

struct OracleEntry {
  double value = 0.0;
  int next = -1;
  double next_start = 0.0;
};

class Oracle {
 public:
  explicit Oracle(const Instance& inst) : inst_(inst) {}

  // Best utility obtainable after `last` started at `start`, given `visited`.
  const OracleEntry& solve(std::uint32_t visited, int last, double start) {
    const OracleKey key{visited, last, std::bit_cast<std::uint64_t>(start)};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    OracleEntry best;
    for (const auto& a : inst_.acquisitions) {
      if (visited & (1u << a.id)) continue;
      const double t = last < 0 ? a.e : earliest_start_after(inst_, inst_.acquisitions[last], start, a);
      if (t > a.latest_start()) continue;
      const double value = a.utility + solve(visited | (1u << a.id), a.id, t).value;
      if (value > best.value) best = OracleEntry{value, a.id, t};
    }
    return memo_.emplace(key, best).first->second;
  }

 private:
  const Instance& inst_;
  std::unordered_map<OracleKey, OracleEntry, OracleKeyHash> memo_;
};

}  // namespace

SolverReport exact_oracle(const Instance& inst, std::size_t limit) {
  if (inst.size() > limit || inst.size() > 31) {
    throw ContractError("exact_oracle: instance has " + std::to_string(inst.size()) +
                        " acquisitions, above the limit of " + std::to_string(limit));
  }
  const auto started = Clock::now();
  Oracle oracle(inst);
  Schedule sched;
  std::uint32_t visited = 0;
  int last = -1;
  double start = 0.0;
  while (true) {
    const OracleEntry entry = oracle.solve(visited, last, start);
    if (entry.next < 0) break;
    sched.entries[entry.next] = entry.next_start;
    visited |= 1u << entry.next;
    last = entry.next;
    start = entry.next_start;
  }
  return finish(inst, std::move(sched), "oracle", started);
}

}  // namespace eosp
