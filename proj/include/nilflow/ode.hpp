#pragma once

// Classical RK4 with step-doubling error control.

#include "nilflow/config.hpp"
#include "nilflow/lie.hpp"

#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace nilflow {

struct StepControls {
  double rtol = defaults::rtol;
  double atol = defaults::atol;
  double initial_step = defaults::initial_step;
  double min_step = defaults::min_step;
  double max_step = defaults::max_step;
  /// Accepted states with sup-norm above this stop the run (blowup).
  double norm_limit = defaults::norm_limit;
  /// When set, no error control: every step has this size (the last one is
  /// clipped to land on the end time).
  std::optional<double> fixed_step;
  long max_steps = defaults::max_steps;
};

enum class StopReason {
  completed,
  norm_limit,
  step_underflow,
  invalid_state,
  invariant_violation,
  max_steps,
};

const char* to_string(StopReason r);

struct Trajectory {
  std::vector<std::string> labels;
  std::vector<double> times;
  std::vector<Vector> states;
  long accepted = 0;
  long rejected = 0;
  StopReason stop = StopReason::completed;
  std::string message;
  /// Size of the step that was being attempted when the run stopped.
  double last_attempted_step = 0.0;
  /// Run-specific maxima (e.g. conserved-quantity residuals).
  std::map<std::string, double> diagnostics;

  std::size_t size() const { return times.size(); }
  bool completed() const { return stop == StopReason::completed; }
  /// Index of a named column; throws ValidationError when absent.
  std::size_t column_index(const std::string& label) const;
  std::vector<double> column(const std::string& label) const;
};

/// dy/dt = f(t, y). May throw ValidationError or NumericalError, which the
/// integrator treats as a failed step.
using Rhs = std::function<Vector(double, const Vector&)>;
/// Called on every accepted state; returning a message stops the run with
/// the given reason.
struct StateMonitor {
  std::function<std::optional<std::string>(double, const Vector&)> check;
  StopReason reason = StopReason::invalid_state;
};

/// One classical RK4 step.
Vector rk4_step(const Rhs& f, double t, const Vector& y, double h);

/// Integrates from (t0, y0) to t1 > t0. The first stored state is y0.
Trajectory integrate(const Rhs& f, double t0, const Vector& y0, double t1, const StepControls& controls,
                     std::span<const StateMonitor> monitors = {}, std::vector<std::string> labels = {});

}  // namespace nilflow
