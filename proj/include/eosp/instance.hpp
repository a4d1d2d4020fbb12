#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace eosp {

// Violated precondition of a public operation (bad action, self-transition...).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Malformed or invalid input file. `field()` names the offending JSON field.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Well-formed input that breaks a domain invariant (e.g. l < e).
class ValidationError : public ParseError {
 public:
  using ParseError::ParseError;
};

enum class Objective { kUnitary, kUtility };

std::string to_string(Objective objective);
Objective objective_from_string(const std::string& name);

// Synthetic stand-in for the satellite attitude simulator. Target pitch
// follows a linear law in time and slews are Euclidean in (roll, pitch).
struct AttitudeModel {
  double tau = 6000.0;       // horizon, s
  double kappa_p = 0.5;      // pitch rate, deg/s
  double pitch_max = 30.0;   // deg
  double omega = 1.5;        // slew rate, deg/s
  double settle = 3.0;       // s
  double delta = 1.0;        // grid step, s

  // Half-width of a visibility window, pitch_max / kappa_p.
  double half_window() const { return pitch_max / kappa_p; }

  // Throws ValidationError when any invariant fails.
  void validate() const;

  bool operator==(const AttitudeModel&) const = default;
};

struct Acquisition {
  int id = 0;
  double x = 0.0;         // along-track nadir instant, s
  double roll = 0.0;      // deg
  double duration = 0.0;  // s
  double e = 0.0;         // window start, s
  double l = 0.0;         // window end, s
  int priority_class = 0;
  double cloud = 0.0;
  double utility = 1.0;

  double latest_start() const { return l - duration; }

  bool operator==(const Acquisition&) const = default;
};

struct Instance {
  std::uint64_t seed = 0;
  AttitudeModel model;
  std::vector<Acquisition> acquisitions;
  Objective objective = Objective::kUtility;

  std::size_t size() const { return acquisitions.size(); }
  const Acquisition& operator[](std::size_t i) const { return acquisitions[i]; }

  // Arithmetic mean of all candidate utilities.
  double mean_utility() const;

  // Throws ValidationError naming the first broken invariant.
  void validate() const;

  bool operator==(const Instance&) const = default;
};

// Start time per scheduled acquisition id; absent ids are unscheduled.
struct Schedule {
  std::uint64_t instance_seed = 0;
  std::map<int, double> entries;

  bool contains(int id) const { return entries.count(id) != 0; }
  std::size_t size() const { return entries.size(); }

  // (id, start) pairs sorted by start time, ties by id.
  std::vector<std::pair<int, double>> chronological() const;

  bool operator==(const Schedule&) const = default;
};

// Target pitch of `acq` at time t. Not clipped to pitch_max.
double pitch_at(const Acquisition& acq, double t, const AttitudeModel& model);

// Slew plus settle time needed after starting `from` at `start_from`.
// Both target attitudes are evaluated at the end of the first observation.
double transition_duration(const Acquisition& from, double start_from,
                           const Acquisition& to, const AttitudeModel& model);

// Class value times a small clear-sky bonus, or 1 under the unitary objective.
double utility_value(int priority_class, double cloud, Objective objective);

inline constexpr int kPriorityClasses = 7;

// Window [e, l] induced by the nadir instant x.
std::pair<double, double> visibility_window(double x, const AttitudeModel& model);

Instance generate_instance(std::size_t n, std::uint64_t seed,
                           const AttitudeModel& model, Objective objective);

std::string serialize_instance(const Instance& inst);
Instance parse_instance(const std::string& text);
void save_instance(const Instance& inst, const std::filesystem::path& path);
Instance load_instance(const std::filesystem::path& path);

std::string serialize_schedule(const Schedule& sched);
Schedule parse_schedule(const std::string& text);
void save_schedule(const Schedule& sched, const std::filesystem::path& path);
Schedule load_schedule(const std::filesystem::path& path);

// Reads a whole file; throws std::runtime_error when it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace eosp
