#include "eosp/instance.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "eosp/random.hpp"

namespace eosp {

using nlohmann::json;

namespace {

constexpr double kWindowTolerance = 1e-9;
constexpr std::array<double, kPriorityClasses> kClassValues = {1.0, 1e1, 1e2, 1e3, 1e4, 1e6, 1e8};
constexpr double kCloudBonus = 0.05;

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ValidationError(field, what);
}

template <typename T>
T get_field(const json& obj, const std::string& key, const std::string& path) {
  const std::string field = path.empty() ? key : path + "." + key;
  if (!obj.is_object()) throw ParseError(path.empty() ? "<root>" : path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(field, "missing key");
  try {
    return it->template get<T>();
  } catch (const json::exception& ex) {
    throw ParseError(field, std::string("wrong type (") + ex.what() + ")");
  }
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& ex) {
    throw ParseError("<root>", std::string("malformed JSON: ") + ex.what());
  }
}

void check_version(const json& doc) {
  const auto version = get_field<std::string>(doc, "version", "");
  if (version != "1") throw ParseError("version", "unsupported version '" + version + "'");
}

}  // namespace

std::string to_string(Objective objective) {
  return objective == Objective::kUnitary ? "unitary" : "utility";
}

Objective objective_from_string(const std::string& name) {
  if (name == "unitary") return Objective::kUnitary;
  if (name == "utility") return Objective::kUtility;
  throw ParseError("objective", "expected 'unitary' or 'utility', got '" + name + "'");
}

void AttitudeModel::validate() const {
  require(tau > 0, "model.tau", "must be positive");
  require(kappa_p > 0, "model.kappa_p", "must be positive");
  require(pitch_max > 0, "model.pitch_max", "must be positive");
  require(omega > 0, "model.omega", "must be positive");
  require(settle > 0, "model.settle", "must be positive");
  require(delta > 0, "model.delta", "must be positive");
  require(delta <= tau, "model.delta", "must not exceed tau");
  require(half_window() < tau / 2, "model.pitch_max", "pitch_max / kappa_p must be below tau / 2");
}

double Instance::mean_utility() const {
  if (acquisitions.empty()) return 0.0;
  double total = 0.0;
  for (const auto& acq : acquisitions) total += acq.utility;
  return total / static_cast<double>(acquisitions.size());
}

void Instance::validate() const {
  model.validate();
  for (std::size_t i = 0; i < acquisitions.size(); ++i) {
    const auto& a = acquisitions[i];
    const std::string path = "acquisitions[" + std::to_string(i) + "]";
    require(a.id == static_cast<int>(i), path + ".id", "ids must be 0..N-1 in order");
    require(a.duration > 0, path + ".duration", "must be positive");
    require(a.e >= 0, path + ".e", "must be non-negative");
    require(a.l <= model.tau, path + ".l", "must not exceed tau");
    require(a.l >= a.e, path + ".l", "window end precedes window start");
    require(a.l - a.e >= a.duration, path + ".l", "window shorter than duration");
    require(a.utility > 0, path + ".utility", "must be positive");
    require(a.priority_class >= 0 && a.priority_class < kPriorityClasses, path + ".class",
            "must be in 0..6");
    require(a.cloud >= 0 && a.cloud <= 1, path + ".cloud", "must be in [0, 1]");
    const auto [e, l] = visibility_window(a.x, model);
    require(std::abs(a.e - e) <= kWindowTolerance, path + ".e", "inconsistent with x and model");
    require(std::abs(a.l - l) <= kWindowTolerance, path + ".l", "inconsistent with x and model");
  }
}

std::vector<std::pair<int, double>> Schedule::chronological() const {
  std::vector<std::pair<int, double>> out(entries.begin(), entries.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.second < b.second; });
  return out;
}

double pitch_at(const Acquisition& acq, double t, const AttitudeModel& model) {
  return model.kappa_p * (acq.x - t);
}

double transition_duration(const Acquisition& from, double start_from, const Acquisition& to,
                           const AttitudeModel& model) {
  if (from.id == to.id) {
    throw ContractError("transition_duration: no self-transition for acquisition " +
                        std::to_string(from.id));
  }
  const double t_end = start_from + from.duration;
  const double d_roll = to.roll - from.roll;
  const double d_pitch = pitch_at(to, t_end, model) - pitch_at(from, t_end, model);
  return model.settle + std::hypot(d_roll, d_pitch) / model.omega;
}

double utility_value(int priority_class, double cloud, Objective objective) {
  if (priority_class < 0 || priority_class >= kPriorityClasses) {
    throw ContractError("utility_value: priority class " + std::to_string(priority_class) +
                        " outside 0..6");
  }
  if (objective == Objective::kUnitary) return 1.0;
  return kClassValues[priority_class] * (1.0 + kCloudBonus * (1.0 - cloud));
}

std::pair<double, double> visibility_window(double x, const AttitudeModel& model) {
  const double half = model.half_window();
  return {std::max(0.0, x - half), std::min(model.tau, x + half)};
}

Instance generate_instance(std::size_t n, std::uint64_t seed, const AttitudeModel& model,
                           Objective objective) {
  if (n == 0) throw ContractError("generate_instance: n must be at least 1");
  model.validate();
  Rng rng(seed);
  Instance inst;
  inst.seed = seed;
  inst.model = model;
  inst.objective = objective;
  inst.acquisitions.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Acquisition a;
    a.id = static_cast<int>(i);
    // Redraw until the window can hold the observation.
    do {
      a.x = rng.uniform(0.0, model.tau);
      a.roll = rng.uniform(-30.0, 30.0);
      a.duration = rng.uniform(2.0, 8.0);
      a.cloud = rng.uniform();
      a.priority_class = static_cast<int>(rng.uniform_int(0, kPriorityClasses - 1));
      std::tie(a.e, a.l) = visibility_window(a.x, model);
    } while (a.l - a.e < a.duration);
    a.utility = utility_value(a.priority_class, a.cloud, objective);
    inst.acquisitions.push_back(a);
  }
  return inst;
}

std::string serialize_instance(const Instance& inst) {
  json doc;
  doc["version"] = "1";
  doc["seed"] = inst.seed;
  doc["objective"] = to_string(inst.objective);
  const auto& m = inst.model;
  doc["model"] = {{"tau", m.tau},         {"kappa_p", m.kappa_p}, {"pitch_max", m.pitch_max},
                  {"omega", m.omega},     {"settle", m.settle},   {"delta", m.delta}};
  json acqs = json::array();
  for (const auto& a : inst.acquisitions) {
    acqs.push_back({{"id", a.id},
                    {"x", a.x},
                    {"roll", a.roll},
                    {"duration", a.duration},
                    {"e", a.e},
                    {"l", a.l},
                    {"class", a.priority_class},
                    {"cloud", a.cloud},
                    {"utility", a.utility}});
  }
  doc["acquisitions"] = std::move(acqs);
  return doc.dump(1) + "\n";
}

Instance parse_instance(const std::string& text) {
  const json doc = parse_json(text);
  check_version(doc);
  Instance inst;
  inst.seed = get_field<std::uint64_t>(doc, "seed", "");
  inst.objective = objective_from_string(get_field<std::string>(doc, "objective", ""));
  const auto model = get_field<json>(doc, "model", "");
  inst.model.tau = get_field<double>(model, "tau", "model");
  inst.model.kappa_p = get_field<double>(model, "kappa_p", "model");
  inst.model.pitch_max = get_field<double>(model, "pitch_max", "model");
  inst.model.omega = get_field<double>(model, "omega", "model");
  inst.model.settle = get_field<double>(model, "settle", "model");
  inst.model.delta = get_field<double>(model, "delta", "model");
  const auto acqs = get_field<json>(doc, "acquisitions", "");
  if (!acqs.is_array()) throw ParseError("acquisitions", "expected an array");
  for (std::size_t i = 0; i < acqs.size(); ++i) {
    const std::string path = "acquisitions[" + std::to_string(i) + "]";
    const auto& item = acqs[i];
    Acquisition a;
    a.id = get_field<int>(item, "id", path);
    a.x = get_field<double>(item, "x", path);
    a.roll = get_field<double>(item, "roll", path);
    a.duration = get_field<double>(item, "duration", path);
    a.e = get_field<double>(item, "e", path);
    a.l = get_field<double>(item, "l", path);
    a.priority_class = get_field<int>(item, "class", path);
    a.cloud = get_field<double>(item, "cloud", path);
    a.utility = get_field<double>(item, "utility", path);
    inst.acquisitions.push_back(a);
  }
  inst.validate();
  return inst;
}

void save_instance(const Instance& inst, const std::filesystem::path& path) {
  write_text_file(path, serialize_instance(inst));
}

Instance load_instance(const std::filesystem::path& path) { return parse_instance(read_text_file(path)); }

std::string serialize_schedule(const Schedule& sched) {
  json doc;
  doc["version"] = "1";
  doc["instance_seed"] = sched.instance_seed;
  json entries = json::array();
  for (const auto& [id, start] : sched.chronological()) entries.push_back({{"id", id}, {"start", start}});
  doc["entries"] = std::move(entries);
  return doc.dump(1) + "\n";
}

Schedule parse_schedule(const std::string& text) {
  const json doc = parse_json(text);
  check_version(doc);
  Schedule sched;
  sched.instance_seed = get_field<std::uint64_t>(doc, "instance_seed", "");
  const auto entries = get_field<json>(doc, "entries", "");
  if (!entries.is_array()) throw ParseError("entries", "expected an array");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string path = "entries[" + std::to_string(i) + "]";
    const int id = get_field<int>(entries[i], "id", path);
    const double start = get_field<double>(entries[i], "start", path);
    if (!sched.entries.emplace(id, start).second) throw ParseError(path + ".id", "duplicate id");
  }
  return sched;
}

void save_schedule(const Schedule& sched, const std::filesystem::path& path) {
  write_text_file(path, serialize_schedule(sched));
}

Schedule load_schedule(const std::filesystem::path& path) { return parse_schedule(read_text_file(path)); }

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

}  // namespace eosp
