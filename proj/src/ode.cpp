#include "nilflow/ode.hpp"

#include <algorithm>
#include <cmath>

namespace nilflow {

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::completed: return "completed";
    case StopReason::norm_limit: return "norm_limit";
    case StopReason::step_underflow: return "step_underflow";
    case StopReason::invalid_state: return "invalid_state";
    case StopReason::invariant_violation: return "invariant_violation";
    case StopReason::max_steps: return "max_steps";
  }
  return "unknown";
}

std::size_t Trajectory::column_index(const std::string& label) const {
  if (label == "t") throw ValidationError("time is not a state column");
  const auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw ValidationError("unknown column '" + label + "'");
  return static_cast<std::size_t>(it - labels.begin());
}

std::vector<double> Trajectory::column(const std::string& label) const {
  if (label == "t") return times;
  const auto c = column_index(label);
  std::vector<double> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(s(static_cast<Eigen::Index>(c)));
  return out;
}

Vector rk4_step(const Rhs& f, double t, const Vector& y, double h) {
  const Vector k1 = f(t, y);
  const Vector k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
  const Vector k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
  const Vector k4 = f(t + h, y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

namespace {

// Returns nullopt when the right-hand side rejects a stage.
std::optional<Vector> try_step(const Rhs& f, double t, const Vector& y, double h) {
  try {
    Vector out = rk4_step(f, t, y, h);
    if (!out.allFinite()) return std::nullopt;
    return out;
  } catch (const ValidationError&) {
    return std::nullopt;
  } catch (const NumericalError&) {
    return std::nullopt;
  }
}

}  // namespace

Trajectory integrate(const Rhs& f, double t0, const Vector& y0, double t1, const StepControls& controls,
                     std::span<const StateMonitor> monitors, std::vector<std::string> labels) {
  if (!(t1 > t0)) throw ValidationError("integration needs t_end > t_start");
  if (!(controls.rtol > 0.0) || !(controls.atol > 0.0)) throw ValidationError("tolerances must be positive");
  if (controls.fixed_step && !(*controls.fixed_step > 0.0)) throw ValidationError("fixed step must be positive");

  Trajectory traj;
  traj.labels = std::move(labels);
  traj.times.push_back(t0);
  traj.states.push_back(y0);

  double t = t0;
  Vector y = y0;
  double h = controls.fixed_step ? *controls.fixed_step : std::min(controls.initial_step, controls.max_step);
  const double span = t1 - t0;

  auto accept = [&](double t_new, Vector y_new) -> bool {
    t = t_new;
    y = std::move(y_new);
    traj.times.push_back(t);
    traj.states.push_back(y);
    ++traj.accepted;
    if (y.cwiseAbs().maxCoeff() > controls.norm_limit) {
      traj.stop = StopReason::norm_limit;
      traj.message = "state norm exceeded " + std::to_string(controls.norm_limit);
      return false;
    }
    for (const auto& m : monitors)
      if (auto msg = m.check(t, y)) {
        traj.stop = m.reason;
        traj.message = *msg;
        return false;
      }
    return true;
  };

  while (t1 - t > 1e-14 * std::max(1.0, std::abs(t1))) {
    if (traj.accepted + traj.rejected >= controls.max_steps) {
      traj.stop = StopReason::max_steps;
      traj.message = "step budget exhausted";
      return traj;
    }
    const bool last = h >= t1 - t;
    const double step = last ? t1 - t : h;
    const double t_next = last ? t1 : t + step;
    traj.last_attempted_step = step;

    if (controls.fixed_step) {
      auto next = try_step(f, t, y, step);
      if (!next) {
        traj.stop = StopReason::step_underflow;
        traj.message = "right-hand side failed at fixed step";
        return traj;
      }
      if (!accept(t_next, std::move(*next))) return traj;
      continue;
    }

    if (step < controls.min_step && !last) {
      traj.stop = StopReason::step_underflow;
      traj.message = "step fell below " + std::to_string(controls.min_step);
      return traj;
    }

    auto full = try_step(f, t, y, step);
    std::optional<Vector> half;
    if (full) {
      auto mid = try_step(f, t, y, 0.5 * step);
      if (mid) half = try_step(f, t + 0.5 * step, *mid, 0.5 * step);
    }
    if (!full || !half) {
      ++traj.rejected;
      h = 0.25 * step;
      if (h < controls.min_step) {
        traj.stop = StopReason::step_underflow;
        traj.message = "step fell below " + std::to_string(controls.min_step);
        return traj;
      }
      continue;
    }
    double err = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double scale = controls.atol + controls.rtol * std::max(std::abs(y(i)), std::abs((*half)(i)));
      err = std::max(err, std::abs((*half)(i) - (*full)(i)) / 15.0 / scale);
    }
    const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    if (err <= 1.0) {
      if (!accept(t_next, std::move(*half))) return traj;
      if (!last) h = std::min(step * factor, controls.max_step);
      h = std::min(h, span);
    } else {
      ++traj.rejected;
      h = step * factor;
      if (h < controls.min_step) {
        traj.stop = StopReason::step_underflow;
        traj.message = "step fell below " + std::to_string(controls.min_step);
        return traj;
      }
    }
  }
  return traj;
}

}  // namespace nilflow
