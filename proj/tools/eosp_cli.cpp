// eosp: generate, inspect, solve, train and evaluate agile EOS scheduling instances.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "eosp/checkpoint.hpp"
#include "eosp/continuous_graph.hpp"
#include "eosp/discrete_graph.hpp"
#include "eosp/instance.hpp"
#include "eosp/ppo.hpp"
#include "eosp/report.hpp"
#include "eosp/solvers.hpp"

namespace fs = std::filesystem;
using namespace eosp;

namespace {

enum Exit { kOk = 0, kInvalid = 1, kUsage = 2 };

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

unsigned worker_count(std::size_t jobs) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("EOSP_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

// Runs fn(i) for i in [0, jobs) on a small pool; rethrows the first failure.
template <typename Fn>
void parallel_for(std::size_t jobs, Fn fn) {
  const unsigned workers = worker_count(jobs);
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::mutex lock;
  std::size_t next = 0;
  std::exception_ptr failure;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i;
        {
          std::lock_guard<std::mutex> guard(lock);
          if (next >= jobs || failure) return;
          i = next++;
        }
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> guard(lock);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

// A path list where directories expand to their *.json files in name order.
std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(in)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json" &&
            entry.path().filename() != kManifestName) {
          found.push_back(entry.path());
        }
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.emplace_back(in);
    }
  }
  if (out.empty()) throw ContractError("no instance files found");
  return out;
}

std::vector<ppo::PreparedInstance> load_prepared(const std::vector<fs::path>& paths) {
  std::vector<ppo::PreparedInstance> out(paths.size());
  parallel_for(paths.size(), [&](std::size_t i) {
    out[i] = ppo::prepare_instance(load_instance(paths[i]), paths[i].stem().string());
  });
  return out;
}

fs::path directory_of(const fs::path& file) {
  const auto parent = file.parent_path();
  return parent.empty() ? fs::path(".") : parent;
}

std::string join_args(int argc, char** argv) {
  std::string out;
  for (int i = 1; i < argc; ++i) {
    if (i > 1) out += ' ';
    out += argv[i];
  }
  return out;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct GenOptions {
  std::size_t n = 20;
  std::uint64_t seed = 0;
  std::string objective = "utility";
  std::string out;
  double tau = AttitudeModel{}.tau;
  double delta = AttitudeModel{}.delta;
};

struct GraphOptions {
  std::vector<std::string> inputs;
  bool stats = false;
  std::string out;
  std::string dump;
};

struct SolveOptions {
  std::string algo;
  std::string in;
  std::string ckpt;
  std::string out;
  std::string csv;
};

struct TrainOptions {
  std::string config;
  std::string train_dir;
  std::string eval_dir;
  std::string out_dir;
};

struct EvalOptions {
  std::string ckpt;
  std::vector<std::string> instances;
  std::string report;
  bool json = false;
};

struct ValidateOptions {
  std::string in;
  std::string schedule;
};

int run_gen(const GenOptions& o, const std::string& command, Clock::time_point start) {
  AttitudeModel model;
  model.tau = o.tau;
  model.delta = o.delta;
  model.validate();
  const auto inst = generate_instance(o.n, o.seed, model, objective_from_string(o.objective));
  save_instance(inst, o.out);
  std::ostringstream key;
  key << "gen n=" << o.n << " objective=" << o.objective << " tau=" << format_number(o.tau)
      << " delta=" << format_number(o.delta);
  append_manifest(directory_of(o.out), {command, fnv1a_hex(key.str()), {o.seed}, {}, {o.out},
                                        seconds_since(start), kVersion});
  return kOk;
}

int run_graph(const GraphOptions& o, const std::string& command, Clock::time_point start) {
  const auto paths = expand_inputs(o.inputs);
  std::vector<GraphSizeRow> rows(paths.size());
  std::vector<std::string> dumps(paths.size());
  parallel_for(paths.size(), [&](std::size_t i) {
    const auto inst = load_instance(paths[i]);
    const auto graph = build_discrete_graph(inst);
    const auto stats = graph.stats();
    const auto obs = derive_continuous_graph(graph, inst);
    rows[i] = {inst.size(), stats.nodes, obs.node_ids.size(), stats.edges, obs.edges.size()};
    if (!o.dump.empty()) dumps[i] = graph.to_json();
  });
  std::vector<std::string> artifacts;
  if (!o.dump.empty()) {
    if (paths.size() == 1) {
      write_text_file(o.dump, dumps[0]);
      artifacts.push_back(o.dump);
    } else {
      for (std::size_t i = 0; i < paths.size(); ++i) {
        const auto file = fs::path(o.dump) / (paths[i].stem().string() + ".graph.json");
        write_text_file(file, dumps[i]);
        artifacts.push_back(file.string());
      }
    }
  }
  if (o.stats) {
    const auto csv = graph_size_csv(rows);
    if (o.out.empty()) {
      std::cout << csv;
    } else {
      write_text_file(o.out, csv);
      artifacts.push_back(o.out);
    }
  }
  if (!artifacts.empty()) {
    std::vector<std::string> inputs;
    for (const auto& p : paths) inputs.push_back(p.string());
    const fs::path dir = o.out.empty() ? (paths.size() == 1 ? directory_of(o.dump) : fs::path(o.dump))
                                       : directory_of(o.out);
    append_manifest(dir, {command, fnv1a_hex("graph"), {}, inputs, artifacts, seconds_since(start), kVersion});
  }
  return kOk;
}

int run_solve(const SolveOptions& o, const std::string& command, Clock::time_point start) {
  const auto inst = load_instance(o.in);
  SolverReport report;
  if (o.algo == "greedy") {
    report = greedy_schedule(inst);
  } else if (o.algo == "ramp") {
    report = ramp_schedule(inst);
  } else if (o.algo == "oracle") {
    report = exact_oracle(inst);
  } else {
    if (o.ckpt.empty()) throw CLI::ValidationError("--ckpt", "required with --algo policy");
    const auto params = nn::load_checkpoint(o.ckpt);
    const auto timer = Clock::now();
    const auto env = ppo::prepare_instance(inst);
    Rng unused(0);
    const auto episode = ppo::run_episode(env, params, nn::SampleMode::kArgmax, unused);
    report.schedule = episode.schedule;
    report.utility = episode.utility;
    report.count = episode.count;
    report.runtime = seconds_since(timer);
    report.algorithm = "policy";
  }
  const auto check = validate_schedule(inst, report.schedule);
  if (!check.ok()) {
    for (const auto& v : check.violations) std::cerr << "violation: " << v.describe(inst, report.schedule) << '\n';
    return kInvalid;
  }
  save_schedule(report.schedule, o.out);

  const fs::path csv = o.csv.empty() ? directory_of(o.out) / "solve_results.csv" : fs::path(o.csv);
  std::string text = fs::exists(csv) ? read_text_file(csv) : "instance,algo,utility,count,runtime_s\n";
  char runtime[32];
  std::snprintf(runtime, sizeof(runtime), "%.6f", report.runtime);
  text += fs::path(o.in).stem().string() + "," + o.algo + "," + format_number(report.utility) + "," +
          std::to_string(report.count) + "," + runtime + "\n";
  write_text_file(csv, text);

  std::vector<std::string> inputs{o.in};
  if (!o.ckpt.empty()) inputs.push_back(o.ckpt);
  append_manifest(directory_of(o.out), {command, fnv1a_hex("solve algo=" + o.algo), {inst.seed}, inputs,
                                        {o.out, csv.string()}, seconds_since(start), kVersion});
  std::cout << o.algo << ": utility " << format_number(report.utility) << ", count " << report.count << '\n';
  return kOk;
}

int run_train(const TrainOptions& o, const std::string& command, Clock::time_point start) {
  const auto config_text = read_text_file(o.config);
  const auto config = ppo::parse_train_config(config_text);
  const auto train_paths = expand_inputs({o.train_dir});
  const auto eval_paths = expand_inputs({o.eval_dir});
  const auto train_set = load_prepared(train_paths);
  const auto eval_set = load_prepared(eval_paths);

  const fs::path out(o.out_dir);
  const auto report_path = out / "train_report.csv";
  const auto result = ppo::train(train_set, eval_set, config, [&](const ppo::ReportRow& row) {
    std::cerr << "update " << row.update << " steps " << row.env_steps << " return " << row.mean_return;
    if (row.evaluated) std::cerr << " eval " << row.eval_utility << " vs_greedy " << row.eval_vs_greedy;
    std::cerr << '\n';
  });
  write_text_file(report_path, result.report.to_csv());
  nn::save_checkpoint(result.best, out / "best.ckpt");
  nn::save_checkpoint(result.last, out / "last.ckpt");
  write_text_file(out / "train_config.json", ppo::serialize_train_config(config));

  std::vector<std::string> inputs{o.config};
  for (const auto& p : train_paths) inputs.push_back(p.string());
  for (const auto& p : eval_paths) inputs.push_back(p.string());
  append_manifest(out, {command, fnv1a_hex(ppo::serialize_train_config(config)), {config.seed}, inputs,
                        {report_path.string(), (out / "best.ckpt").string(), (out / "last.ckpt").string(),
                         (out / "train_config.json").string()},
                        seconds_since(start), kVersion});
  std::cout << "best update " << result.report.best_update << ", eval score "
            << format_number(result.report.best_eval_utility) << '\n';
  return kOk;
}

int run_eval(const EvalOptions& o, const std::string& command, Clock::time_point start) {
  const auto params = nn::load_checkpoint(o.ckpt);
  const auto paths = expand_inputs(o.instances);
  const auto envs = load_prepared(paths);
  std::vector<EvaluationRow> rows(envs.size());
  bool clean = true;
  std::mutex lock;
  parallel_for(envs.size(), [&](std::size_t i) {
    Rng unused(0);
    const auto episode = ppo::run_episode(envs[i], params, nn::SampleMode::kArgmax, unused);
    const auto check = validate_schedule(*envs[i].instance, episode.schedule);
    if (!check.ok()) {
      std::lock_guard<std::mutex> guard(lock);
      clean = false;
      for (const auto& v : check.violations) {
        std::cerr << envs[i].name << ": violation: " << v.describe(*envs[i].instance, episode.schedule) << '\n';
      }
    }
    const auto baseline = ppo::compute_baseline(envs[i]);
    rows[i] = {envs[i].name, envs[i].instance->size(),
               ppo::objective_score(*envs[i].instance, episode.utility, episode.count), baseline.greedy,
               baseline.ramp};
  });
  emit_report(rows, o.report, o.json);
  std::vector<std::string> inputs{o.ckpt};
  for (const auto& p : paths) inputs.push_back(p.string());
  append_manifest(directory_of(o.report), {command, fnv1a_hex(std::string("eval json=") + (o.json ? "1" : "0")),
                                           {}, inputs, {o.report}, seconds_since(start), kVersion});
  const auto summary = summarize(rows);
  std::cout << "mean policy/greedy " << format_number(summary.mean_ratio_vs_greedy) << ", mean policy/ramp "
            << format_number(summary.mean_ratio_vs_ramp) << '\n';
  return clean ? kOk : kInvalid;
}

int run_validate(const ValidateOptions& o) {
  const auto inst = load_instance(o.in);
  const auto sched = load_schedule(o.schedule);
  const auto check = validate_schedule(inst, sched);
  if (check.ok()) {
    std::cout << "valid: " << check.count << " acquisitions, utility " << format_number(check.utility) << '\n';
    return kOk;
  }
  for (const auto& v : check.violations) std::cout << "violation: " << v.describe(inst, sched) << '\n';
  return kInvalid;
}

}  // namespace

int main(int argc, char** argv) {
  const auto start = Clock::now();
  const std::string command = "eosp " + join_args(argc, argv);

  CLI::App app{"Agile Earth-observation satellite scheduling toolkit"};
  app.require_subcommand(1);

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic instance");
  gen_cmd->add_option("--n", gen.n, "Number of candidate acquisitions")->required()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen.seed, "Random seed")->required();
  gen_cmd->add_option("--objective", gen.objective, "unitary or utility")
      ->check(CLI::IsMember({"unitary", "utility"}));
  gen_cmd->add_option("--out", gen.out, "Instance JSON path")->required();
  gen_cmd->add_option("--tau", gen.tau, "Horizon in seconds");
  gen_cmd->add_option("--delta", gen.delta, "Discretization step in seconds");

  GraphOptions graph;
  auto* graph_cmd = app.add_subcommand("graph", "Build graphs and report their sizes");
  graph_cmd->add_option("--in", graph.inputs, "Instance files or directories")->required();
  graph_cmd->add_flag("--stats", graph.stats, "Emit the node/edge size table as CSV");
  graph_cmd->add_option("--out", graph.out, "CSV path (default: stdout)");
  graph_cmd->add_option("--dump", graph.dump, "Write the discrete graph as JSON (a directory for several inputs)");

  SolveOptions solve;
  auto* solve_cmd = app.add_subcommand("solve", "Schedule one instance");
  solve_cmd->add_option("--algo", solve.algo, "greedy, ramp, oracle or policy")
      ->required()
      ->check(CLI::IsMember({"greedy", "ramp", "oracle", "policy"}));
  solve_cmd->add_option("--in", solve.in, "Instance JSON")->required();
  solve_cmd->add_option("--ckpt", solve.ckpt, "Policy checkpoint (for --algo policy)");
  solve_cmd->add_option("--out", solve.out, "Schedule JSON path")->required();
  solve_cmd->add_option("--csv", solve.csv, "Results CSV (default: solve_results.csv next to --out)");

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train a policy with masked PPO");
  train_cmd->add_option("--config", train.config, "Training config JSON")->required();
  train_cmd->add_option("--train-dir", train.train_dir, "Directory of training instances")->required();
  train_cmd->add_option("--eval-dir", train.eval_dir, "Directory of evaluation instances")->required();
  train_cmd->add_option("--out-dir", train.out_dir, "Output directory")->required();

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Compare a policy with greedy and RAMP");
  eval_cmd->add_option("--ckpt", eval.ckpt, "Policy checkpoint")->required();
  eval_cmd->add_option("--instances", eval.instances, "Instance files or directories")->required();
  eval_cmd->add_option("--report", eval.report, "Report path")->required();
  eval_cmd->add_flag("--json", eval.json, "Write the report as JSON instead of CSV");

  ValidateOptions validate;
  auto* validate_cmd = app.add_subcommand("validate", "Check a schedule against its instance");
  validate_cmd->add_option("--in", validate.in, "Instance JSON")->required();
  validate_cmd->add_option("--schedule", validate.schedule, "Schedule JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*gen_cmd) return run_gen(gen, command, start);
    if (*graph_cmd) {
      if (!graph.stats && graph.dump.empty()) throw CLI::ValidationError("graph", "nothing to do: pass --stats or --dump");
      return run_graph(graph, command, start);
    }
    if (*solve_cmd) return run_solve(solve, command, start);
    if (*train_cmd) return run_train(train, command, start);
    if (*eval_cmd) return run_eval(eval, command, start);
    if (*validate_cmd) return run_validate(validate);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ContractError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
  return kUsage;
}
