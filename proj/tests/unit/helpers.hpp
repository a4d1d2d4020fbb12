#pragma once

#include <vector>

#include "eosp/instance.hpp"

namespace eosp::testing {

struct AcqRow {
  double x, roll, duration, e, l, utility = 1.0;
};

// Hand-built instance with explicit windows (not tied to x).
inline Instance make_instance(const std::vector<AcqRow>& rows, AttitudeModel model = {},
                              Objective objective = Objective::kUtility) {
  Instance inst;
  inst.model = model;
  inst.objective = objective;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Acquisition a;
    a.id = static_cast<int>(i);
    a.x = rows[i].x;
    a.roll = rows[i].roll;
    a.duration = rows[i].duration;
    a.e = rows[i].e;
    a.l = rows[i].l;
    a.utility = rows[i].utility;
    inst.acquisitions.push_back(a);
  }
  return inst;
}

// Instance with windows derived from x, as the generator produces them.
inline Instance windowed_instance(const std::vector<AcqRow>& rows, AttitudeModel model = {},
                                  Objective objective = Objective::kUtility) {
  auto adjusted = rows;
  for (auto& s : adjusted) std::tie(s.e, s.l) = visibility_window(s.x, model);
  return make_instance(adjusted, model, objective);
}

inline AttitudeModel dense_model(double tau) {
  AttitudeModel m;
  m.tau = tau;
  return m;
}

}  // namespace eosp::testing
