#include "nilflow/flows.hpp"

#include <omp.h>

#include <cmath>

namespace nilflow {

namespace {

std::string join_indices(std::initializer_list<int> zero_based, int dim) {
  std::string s;
  for (int i : zero_based) {
    if (!s.empty() && dim >= 10) s += '.';
    s += std::to_string(i + 1);
  }
  return s;
}

void require_flow_dim(int n) {
  if (n < 3) throw ValidationError("flows with a 3-form need dimension >= 3");
}

std::size_t gbf_mu_count(int n) { return static_cast<std::size_t>(n) * n * (n - 1) / 2; }

}  // namespace

Endo flow_phi(PhiSpec spec, const LieBracket& mu, const KForm& h) {
  Endo phi = ric_orthonormal(mu);
  if (spec == PhiSpec::ric_minus_quarter_hsq) phi -= 0.25 * h_squared_neutral(h);
  return phi;
}

GbfDerivative gbf_rhs(PhiSpec spec, const LieBracket& mu, const KForm& h) {
  if (h.degree() != 3 || h.dim() != mu.dim()) throw ValidationError("H must be a 3-form on the same space as mu");
  const Endo phi = flow_phi(spec, mu, h);
  return {pi_mu(phi, mu).scaled(-1.0), pi_form(phi, h).scaled(-1.0)};
}

Vector pack_gbf(const LieBracket& mu, const KForm& h) {
  const int n = mu.dim();
  Vector v(static_cast<Eigen::Index>(gbf_mu_count(n) + h.size()));
  Eigen::Index p = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = 0; k < n; ++k) v(p++) = mu(i, j, k);
  for (std::size_t q = 0; q < h.size(); ++q) v(p++) = h.packed(q);
  return v;
}

std::pair<LieBracket, KForm> unpack_gbf(int dim, const Vector& state) {
  require_flow_dim(dim);
  const auto mu_count = static_cast<Eigen::Index>(gbf_mu_count(dim));
  std::vector<double> packed(state.data() + mu_count, state.data() + state.size());
  KForm h = KForm::from_packed(dim, 3, std::move(packed));
  std::vector<double> pairs(state.data(), state.data() + mu_count);
  std::size_t p = 0;
  std::vector<double> lookup(static_cast<std::size_t>(dim) * dim * dim, 0.0);
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j)
      for (int k = 0; k < dim; ++k) lookup[(static_cast<std::size_t>(i) * dim + j) * dim + k] = pairs[p++];
  LieBracket mu =
      LieBracket::generate(dim, [&](int i, int j, int k) { return lookup[(static_cast<std::size_t>(i) * dim + j) * dim + k]; });
  return {std::move(mu), std::move(h)};
}

std::vector<std::string> gbf_labels(int dim) {
  std::vector<std::string> labels;
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j)
      for (int k = 0; k < dim; ++k) labels.push_back("mu_" + join_indices({i, j}, dim) + "_" + join_indices({k}, dim));
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j)
      for (int k = j + 1; k < dim; ++k) labels.push_back("H_" + join_indices({i, j, k}, dim));
  return labels;
}

Trajectory integrate_gbf(PhiSpec spec, const LieBracket& mu0, const KForm& h0, double t_start, double t_end,
                         const StepControls& controls) {
  const int n = mu0.dim();
  require_flow_dim(n);
  if (h0.degree() != 3 || h0.dim() != n) throw ValidationError("H0 must be a 3-form on the same space as mu0");
  if (!nilpotency_step(mu0)) throw ValidationError("initial bracket is not nilpotent");
  const double closed0 = closedness_residual(mu0, h0);
  if (closed0 > kZeroTolerance) throw ValidationError("H0 is not closed: |d_mu H| = " + std::to_string(closed0));

  const Rhs rhs = [&](double, const Vector& y) {
    const auto [mu, h] = unpack_gbf(n, y);
    const GbfDerivative d = gbf_rhs(spec, mu, h);
    return pack_gbf(d.dmu, d.dh);
  };
  double max_jacobi = jacobi_residual(mu0);
  double max_closed = closed0;
  const StateMonitor structure{[&](double, const Vector& y) -> std::optional<std::string> {
                                 const auto [mu, h] = unpack_gbf(n, y);
                                 const double jac = jacobi_residual(mu);
                                 const double cl = closedness_residual(mu, h);
                                 max_jacobi = std::max(max_jacobi, jac);
                                 max_closed = std::max(max_closed, cl);
                                 if (jac > kStructureTolerance || cl > kStructureTolerance)
                                   return "bracket left the variety: Jacobi " + std::to_string(jac) + ", |dH| " +
                                          std::to_string(cl);
                                 return std::nullopt;
                               },
                               StopReason::invariant_violation};
  Trajectory traj = integrate(rhs, t_start, pack_gbf(mu0, h0), t_end, controls, std::span(&structure, 1), gbf_labels(n));
  traj.diagnostics["jacobi_residual"] = max_jacobi;
  traj.diagnostics["closedness_residual"] = max_closed;
  return traj;
}

bool gbf_decay_bound_check(const Trajectory& traj, double a, double slack) {
  if (traj.labels != gbf_labels(3) || traj.size() == 0)
    throw ValidationError("decay bound applies to three-dimensional bracket-flow trajectories only");
  const auto x_col = traj.column_index("mu_12_3");
  const auto y_col = traj.column_index("H_123");
  const Vector& first = traj.states.front();
  for (Eigen::Index c = 0; c < first.size(); ++c) {
    const double expected = static_cast<std::size_t>(c) == x_col ? 1.0 : static_cast<std::size_t>(c) == y_col ? a : 0.0;
    if (std::abs(first(c) - expected) > 1e-12)
      throw ValidationError("trajectory does not start at the Heisenberg family point (1, a)");
  }
  const double c0 = 1.0 + a * a;
  const double t0 = traj.times.front();
  for (std::size_t s = 0; s < traj.size(); ++s) {
    const double x = traj.states[s](static_cast<Eigen::Index>(x_col));
    const double y = traj.states[s](static_cast<Eigen::Index>(y_col));
    if (x * x + y * y > c0 / (1.0 + c0 * (traj.times[s] - t0)) + slack) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

GrfDerivative grf_rhs(const LieBracket& mu, const GrfState& state, Orientation o) {
  if (state.g.dim() != mu.dim() || state.h.dim() != mu.dim() || state.h.degree() != 3)
    throw ValidationError("inconsistent generalized Ricci flow state");
  Matrix dg = -2.0 * rc_metric(mu, state.g) + 0.5 * h_circ_h(state.g, state.h);
  return {symmetric_part(dg), hodge_laplacian(mu, state.g, o, state.h).scaled(-1.0)};
}

namespace {

Vector pack_symmetric(const Matrix& g, const KForm& h) {
  const auto n = static_cast<int>(g.rows());
  Vector v(static_cast<Eigen::Index>(n * (n + 1) / 2 + h.size()));
  Eigen::Index p = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) v(p++) = g(i, j);
  for (std::size_t q = 0; q < h.size(); ++q) v(p++) = h.packed(q);
  return v;
}

}  // namespace

Vector pack_grf(const GrfState& state) { return pack_symmetric(state.g.matrix(), state.h); }

GrfState unpack_grf(int dim, const Vector& state) {
  require_flow_dim(dim);
  Matrix g(dim, dim);
  Eigen::Index p = 0;
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) g(i, j) = g(j, i) = state(p++);
  std::vector<double> packed(state.data() + p, state.data() + state.size());
  return {Metric(std::move(g)), KForm::from_packed(dim, 3, std::move(packed))};
}

std::vector<std::string> grf_labels(int dim) {
  std::vector<std::string> labels;
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j)
      labels.push_back(i == j ? "g_" + std::to_string(i + 1) : "g_" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j)
      for (int k = j + 1; k < dim; ++k) labels.push_back("H_" + join_indices({i, j, k}, dim));
  return labels;
}

namespace {

Trajectory run_grf(const LieBracket& mu, const Vector& y0, const KForm& h0, Orientation o, double s0, double s1,
                   double direction, const GrfControls& controls) {
  const int n = mu.dim();
  const Rhs rhs = [&](double, const Vector& y) {
    const GrfState s = unpack_grf(n, y);
    const GrfDerivative d = grf_rhs(mu, s, o);
    return Vector(direction * pack_symmetric(d.dg, d.dh));
  };
  double h_drift = 0.0;
  const StateMonitor spd{[&](double, const Vector& y) -> std::optional<std::string> {
                           Matrix g(n, n);
                           Eigen::Index p = 0;
                           for (int i = 0; i < n; ++i)
                             for (int j = i; j < n; ++j) g(i, j) = g(j, i) = y(p++);
                           const double lo = Eigen::SelfAdjointEigenSolver<Matrix>(g, Eigen::EigenvaluesOnly)
                                                 .eigenvalues()
                                                 .minCoeff();
                           for (std::size_t q = 0; q < h0.size(); ++q)
                             h_drift = std::max(h_drift, std::abs(y(p + static_cast<Eigen::Index>(q)) - h0.packed(q)));
                           if (!(lo > controls.eigenvalue_floor))
                             return "metric degenerated: smallest eigenvalue " + std::to_string(lo);
                           return std::nullopt;
                         },
                         StopReason::invalid_state};
  Trajectory traj = integrate(rhs, s0, y0, s1, controls.step, std::span(&spd, 1), grf_labels(n));
  traj.diagnostics["h_drift"] = h_drift;
  return traj;
}

}  // namespace

Trajectory integrate_grf(const LieBracket& mu, const Metric& g0, const KForm& h0, Orientation o, double t_start,
                         double t_end, const GrfControls& controls) {
  const int n = mu.dim();
  require_flow_dim(n);
  if (g0.dim() != n || h0.dim() != n || h0.degree() != 3) throw ValidationError("inconsistent initial data");
  const double closed = closedness_residual(mu, h0);
  if (closed > kZeroTolerance) throw ValidationError("H0 is not closed: |d_mu H| = " + std::to_string(closed));
  return run_grf(mu, pack_grf({g0, h0}), h0, o, t_start, t_end, 1.0, controls);
}

BlowupResult blowup_time(const LieBracket& mu, const Metric& g0, const KForm& h0, Orientation o, int direction,
                         const BlowupControls& controls) {
  if (direction != 1 && direction != -1) throw ValidationError("direction must be +1 or -1");
  const int n = mu.dim();
  require_flow_dim(n);
  const double closed = closedness_residual(mu, h0);
  if (closed > kZeroTolerance) throw ValidationError("H0 is not closed: |d_mu H| = " + std::to_string(closed));

  const double dir = direction;
  const Trajectory traj = run_grf(mu, pack_grf({g0, h0}), h0, o, 0.0, controls.horizon, dir, controls.grf);
  BlowupResult out;
  out.reason = traj.stop;
  if (traj.completed()) {
    out.last_valid_time = dir * traj.times.back();
    return out;
  }
  if (traj.stop == StopReason::max_steps)
    throw NumericalError("step budget exhausted before the horizon or a singularity was reached");

  // Bracket [lo, hi] in reversed time s = direction * t.
  double lo = 0.0;
  double hi = 0.0;
  Vector y_lo;
  if (traj.stop == StopReason::step_underflow) {
    lo = traj.times.back();
    y_lo = traj.states.back();
    hi = lo + traj.last_attempted_step;
  } else {
    const std::size_t last = traj.size() - 1;
    lo = last > 0 ? traj.times[last - 1] : 0.0;
    y_lo = traj.states[last > 0 ? last - 1 : 0];
    hi = traj.times[last];
  }
  while (hi - lo > controls.bisection_tolerance) {
    const double mid = 0.5 * (lo + hi);
    const Trajectory probe = run_grf(mu, y_lo, h0, o, lo, mid, dir, controls.grf);
    if (probe.completed()) {
      lo = mid;
      y_lo = probe.states.back();
    } else {
      hi = mid;
    }
  }
  out.last_valid_time = dir * lo;
  out.time = dir * 0.5 * (lo + hi);
  return out;
}

TminRow tmin_row(double a, const SweepControls& controls) {
  TminRow row;
  row.a = a;
  try {
    const LieBracket mu = heisenberg();
    const Metric g0 = Metric::identity(3);
    const KForm h0 = KForm::basis(3, {0, 1, 2}).scaled(a);
    row.tmin = blowup_time(mu, g0, h0, Orientation::positive, -1, controls.blowup).time;
    const Trajectory fwd =
        integrate_grf(mu, g0, h0, Orientation::positive, 0.0, controls.forward_horizon, controls.blowup.grf);
    if (!fwd.completed()) throw NumericalError(std::string("forward run stopped: ") + fwd.message);
    row.g1_forward = fwd.states.back()(fwd.column_index("g_1"));
    row.g3_forward = fwd.states.back()(fwd.column_index("g_3"));
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

std::vector<TminRow> tmin_sweep(std::span<const double> a_values, const SweepControls& controls) {
  std::vector<TminRow> rows(a_values.size());
  const auto count = static_cast<long>(a_values.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) rows[i] = tmin_row(a_values[i], controls);
  return rows;
}

std::vector<TminRow> tmin_sweep_serial(std::span<const double> a_values, const SweepControls& controls) {
  std::vector<TminRow> rows;
  rows.reserve(a_values.size());
  for (double a : a_values) rows.push_back(tmin_row(a, controls));
  return rows;
}

}  // namespace nilflow
