#pragma once

// Generalized bracket flows mu' = -pi(phi) mu, H' = -pi(phi) H and the
// gauge-fixed generalized Ricci flow g' = -2 Rc + 1/2 H o H, H' = -Laplacian H.

#include "nilflow/config.hpp"
#include "nilflow/curvature.hpp"
#include "nilflow/ode.hpp"

namespace nilflow {

enum class PhiSpec {
  ric,                     // phi = Ric_mu
  ric_minus_quarter_hsq,   // phi = Ric_mu - 1/4 H^2
};

Endo flow_phi(PhiSpec spec, const LieBracket& mu, const KForm& h);

struct GbfDerivative {
  LieBracket dmu;
  KForm dh;
};

/// mu'_ij^k = phi_i^l mu_lj^k + phi_j^l mu_il^k - phi_l^k mu_ij^l and
/// H'_ijk = phi_i^l H_ljk + phi_j^l H_ilk + phi_k^l H_ijl.
GbfDerivative gbf_rhs(PhiSpec spec, const LieBracket& mu, const KForm& h);

/// Flat state: mu_ij^k for i < j (all k), then H on increasing triples.
Vector pack_gbf(const LieBracket& mu, const KForm& h);
std::pair<LieBracket, KForm> unpack_gbf(int dim, const Vector& state);
std::vector<std::string> gbf_labels(int dim);

/// Limit for the Jacobi and closedness residuals along a bracket flow.
inline constexpr double kStructureTolerance = defaults::structure_tolerance;

/// Integrates the bracket flow from (mu0, H0) at t_start to t_end. Every
/// accepted state is checked for Jacobi and d_mu H = 0; the maxima are stored
/// as diagnostics "jacobi_residual" and "closedness_residual".
Trajectory integrate_gbf(PhiSpec spec, const LieBracket& mu0, const KForm& h0, double t_start, double t_end,
                         const StepControls& controls = {});

/// x^2 + y^2 <= (1 + a^2) / (1 + (1 + a^2) t) at every stored time, for the
/// Heisenberg family mu = x e^12 (x) e_3, H = y e^123 started at (1, a).
bool gbf_decay_bound_check(const Trajectory& traj, double a, double slack = defaults::decay_slack);

struct GrfState {
  Metric g;
  KForm h;
};

struct GrfDerivative {
  Matrix dg;
  KForm dh;
};

GrfDerivative grf_rhs(const LieBracket& mu, const GrfState& state, Orientation o);

/// Flat state: g_ij for i <= j (row-major), then H on increasing triples.
Vector pack_grf(const GrfState& state);
GrfState unpack_grf(int dim, const Vector& state);
std::vector<std::string> grf_labels(int dim);

struct GrfControls {
  StepControls step;
  /// Accepted metrics with an eigenvalue below this stop the run.
  double eigenvalue_floor = defaults::eigenvalue_floor;
};

Trajectory integrate_grf(const LieBracket& mu, const Metric& g0, const KForm& h0, Orientation o, double t_start,
                         double t_end, const GrfControls& controls = {});

struct BlowupControls {
  GrfControls grf;
  double horizon = defaults::blowup_horizon;
  double bisection_tolerance = defaults::bisection_tolerance;
};

struct BlowupResult {
  /// Absent when the flow survives up to the horizon.
  std::optional<double> time;
  double last_valid_time = 0.0;
  StopReason reason = StopReason::completed;
};

/// Runs the flow from t = 0 in the given direction (+1 or -1) by time
/// reversal of the right-hand side and brackets the singular time.
BlowupResult blowup_time(const LieBracket& mu, const Metric& g0, const KForm& h0, Orientation o, int direction,
                         const BlowupControls& controls = {});

struct TminRow {
  double a = 0.0;
  std::optional<double> tmin;
  double g1_forward = 0.0;
  double g3_forward = 0.0;
  std::string error;
};

struct SweepControls {
  BlowupControls blowup;
  /// Length of the forward run whose end value estimates lim g_3.
  double forward_horizon = defaults::forward_horizon;
};

/// One row of the sweep: Heisenberg group, g0 = Id, H0 = a e^123.
TminRow tmin_row(double a, const SweepControls& controls = {});

/// Rows in the order of a_values; rows are computed in parallel.
std::vector<TminRow> tmin_sweep(std::span<const double> a_values, const SweepControls& controls = {});
/// Reference implementation of tmin_sweep, one row after another.
std::vector<TminRow> tmin_sweep_serial(std::span<const double> a_values, const SweepControls& controls = {});

}  // namespace nilflow
