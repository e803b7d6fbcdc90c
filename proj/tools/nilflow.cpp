#include "nilflow/curvature.hpp"
#include "nilflow/dorfman.hpp"
#include "nilflow/flows.hpp"
#include "nilflow/io.hpp"
#include "nilflow/soliton.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>

using namespace nilflow;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kValidation = 2, kNumerical = 3, kIo = 4 };

struct RunConfig {
  std::string input;
  std::optional<double> t_start;
  std::optional<double> t_end;
  double rtol = defaults::rtol;
  double atol = defaults::atol;
  std::string phi = "ric-h2";
  std::string out;
  std::string svg;
  std::string svg_x;
  std::string svg_y;
  bool dorfman = false;
  std::vector<double> a_values;
  double a_min = 0.0;
  double a_max = 2.25;
  int a_count = 10;
  double horizon = defaults::blowup_horizon;
  double forward_horizon = defaults::forward_horizon;
};

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json form_json(const KForm& w) {
  json out = json::array();
  for (std::size_t p = 0; p < w.size(); ++p) {
    if (w.packed(p) == 0.0) continue;
    json entry = json::array();
    for (int i : w.tuple(p)) entry.push_back(i + 1);
    entry.push_back(w.packed(p));
    out.push_back(entry);
  }
  return out;
}

void require_span(const RunConfig& c, double t0, double t1) {
  if (!(t0 < t1)) throw ValidationError("--t-start must be smaller than --t-end");
  if (!(c.rtol > 0.0) || !(c.atol > 0.0)) throw ValidationError("tolerances must be positive");
}

StepControls step_controls(const RunConfig& c) {
  StepControls s;
  s.rtol = c.rtol;
  s.atol = c.atol;
  return s;
}

json trajectory_summary(const Trajectory& traj) {
  json j;
  j["stop"] = to_string(traj.stop);
  if (!traj.message.empty()) j["message"] = traj.message;
  j["accepted_steps"] = traj.accepted;
  j["rejected_steps"] = traj.rejected;
  j["t_final"] = traj.times.back();
  json last;
  for (std::size_t c = 0; c < traj.labels.size(); ++c) last[traj.labels[c]] = traj.states.back()(static_cast<Eigen::Index>(c));
  j["final_state"] = last;
  for (const auto& [k, v] : traj.diagnostics) j["diagnostics"][k] = v;
  return j;
}

void write_outputs(const RunConfig& c, const Trajectory& traj, const std::string& x, const std::string& y) {
  if (!c.out.empty()) emit_trajectory_csv(traj, c.out);
  if (!c.svg.empty()) emit_phase_svg(traj, c.svg_x.empty() ? x : c.svg_x, c.svg_y.empty() ? y : c.svg_y, c.svg);
}

int cmd_check(const RunConfig& c) {
  const Problem p = load_problem(c.input);
  json j;
  j["source"] = p.source;
  j["dim"] = p.mu.dim();
  j["jacobi_residual"] = jacobi_residual(p.mu);
  if (j["jacobi_residual"].get<double>() <= kZeroTolerance) {
    const auto step = nilpotency_step(p.mu);
    j["nilpotent"] = step.has_value();
    if (step) j["nilpotency_step"] = *step;
  }
  if (p.h) j["closedness_residual"] = closedness_residual(p.mu, *p.h);
  if (c.dorfman) {
    if (p.mu.dim() < 3) throw ValidationError("Dorfman check needs dim >= 3");
    const DorfmanReport r = dorfman_report(DorfmanBracket::unchecked(p.mu, p.h_or_zero()));
    j["dorfman"] = {{"lie_jacobi", r.lie_jacobi},
                    {"closedness", r.closedness},
                    {"total_skew", r.total_skew},
                    {"dorfman_jacobi", r.dorfman_jacobi}};
  }
  std::cout << j.dump(2) << '\n';
  return kOk;
}

int cmd_ricci(const RunConfig& c) {
  const Problem p = load_problem(c.input);
  const Metric g = p.metric_or_identity();
  json j;
  j["source"] = p.source;
  j["metric"] = matrix_json(g.matrix());
  j["ric_orthonormal"] = matrix_json(ric_orthonormal(gl_action(orthonormalize(g), p.mu)));
  j["rc"] = matrix_json(rc_metric(p.mu, g));
  if (p.h) {
    j["h_circ_h"] = matrix_json(h_circ_h(g, *p.h));
    j["rc_plus"] = matrix_json(generalized_ricci_plus(p.mu, g, p.orientation, *p.h, p.theta_or_zero()));
  }
  std::cout << j.dump(2) << '\n';
  return kOk;
}

int cmd_soliton(const RunConfig& c) {
  const Problem p = load_problem(c.input);
  const Metric g = p.metric_or_identity();
  const KForm h = p.h_or_zero();
  const KForm theta = p.theta_or_zero();
  const SolitonData s = soliton_fit(p.mu, g, p.orientation, h, theta);
  const SolitonResidual r = soliton_residual(p.mu, g, p.orientation, h, theta, s.lambda, s.derivation, s.omega);
  json j;
  j["source"] = p.source;
  j["lambda"] = s.lambda;
  j["derivation"] = matrix_json(s.derivation);
  j["omega"] = form_json(s.omega);
  j["residuals"] = {{"symmetric", r.symmetric}, {"skew", r.skew}, {"norm", s.residual_norm}};
  j["is_soliton"] = s.is_soliton;
  std::cout << j.dump(2) << '\n';
  return kOk;
}

int cmd_bracket_flow(const RunConfig& c) {
  const Problem p = load_problem(c.input);
  const double t0 = c.t_start.value_or(defaults::t_start);
  const double t1 = c.t_end.value_or(defaults::t_end);
  require_span(c, t0, t1);
  const PhiSpec spec = c.phi == "ric" ? PhiSpec::ric : PhiSpec::ric_minus_quarter_hsq;
  const Trajectory traj = integrate_gbf(spec, p.mu, p.h_or_zero(), t0, t1, step_controls(c));
  const std::string x = traj.labels.front();
  const std::string y = p.mu.dim() == 3 ? "H_123" : traj.labels[1];
  write_outputs(c, traj, p.mu.dim() == 3 ? "mu_12_3" : x, y);
  std::cout << trajectory_summary(traj).dump(2) << '\n';
  return traj.completed() ? kOk : kNumerical;
}

int cmd_grf(const RunConfig& c) {
  const Problem p = load_problem(c.input);
  const double t0 = c.t_start.value_or(defaults::t_start);
  const double t1 = c.t_end.value_or(defaults::t_end);
  require_span(c, t0, t1);
  GrfControls controls;
  controls.step = step_controls(c);
  const Trajectory traj =
      integrate_grf(p.mu, p.metric_or_identity(), p.h_or_zero(), p.orientation, t0, t1, controls);
  write_outputs(c, traj, "g_1", "g_" + std::to_string(p.mu.dim()));
  std::cout << trajectory_summary(traj).dump(2) << '\n';
  return traj.completed() ? kOk : kNumerical;
}

int cmd_tmin_sweep(const RunConfig& c) {
  std::vector<double> grid = c.a_values;
  if (grid.empty()) {
    if (c.a_count < 1) throw ValidationError("--a-count must be positive");
    for (int k = 0; k < c.a_count; ++k)
      grid.push_back(c.a_count == 1 ? c.a_min : c.a_min + (c.a_max - c.a_min) * k / (c.a_count - 1));
  }
  if (!(c.rtol > 0.0) || !(c.atol > 0.0)) throw ValidationError("tolerances must be positive");
  if (!(c.horizon > 0.0) || !(c.forward_horizon > 0.0)) throw ValidationError("horizons must be positive");
  SweepControls controls;
  controls.blowup.grf.step = step_controls(c);
  controls.blowup.horizon = c.horizon;
  controls.forward_horizon = c.forward_horizon;
  const auto rows = tmin_sweep(grid, controls);

  json out = json::array();
  bool failed = false;
  for (const auto& r : rows) {
    json j{{"a", r.a}};
    j["t_min"] = r.tmin ? json(*r.tmin) : json(nullptr);
    j["g1_forward"] = r.g1_forward;
    j["g3_forward"] = r.g3_forward;
    if (!r.error.empty()) {
      j["error"] = r.error;
      failed = true;
    }
    out.push_back(j);
  }
  if (!c.out.empty()) {
    std::ofstream f(c.out, std::ios::binary);
    if (!f) throw IoError("cannot write " + c.out);
    f << "a,t_min,g1_forward,g3_forward\n";
    char buf[128];
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", r.a, r.tmin.value_or(std::nan("")), r.g1_forward,
                    r.g3_forward);
      f << buf;
    }
    if (!f) throw IoError("error writing " + c.out);
  }
  std::cout << json{{"forward_horizon", c.forward_horizon}, {"rows", out}}.dump(2) << '\n';
  return failed ? kNumerical : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized geometry on nilpotent Lie algebras: curvature, solitons, Dorfman brackets and flows."};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_input = [&](CLI::App* sub) {
    auto* opt = sub->add_option("--input,input", cfg.input, "problem JSON or fixture: heisenberg3, heisenberg3+H(a), abelian(n)");
    opt->required();
  };
  auto add_tolerances = [&](CLI::App* sub) {
    sub->add_option("--rtol", cfg.rtol, "relative tolerance")->capture_default_str();
    sub->add_option("--atol", cfg.atol, "absolute tolerance")->capture_default_str();
  };
  auto add_flow = [&](CLI::App* sub) {
    add_input(sub);
    add_tolerances(sub);
    sub->add_option("--t-start", cfg.t_start, "initial time (default 0)");
    sub->add_option("--t-end", cfg.t_end, "final time (default 10)");
    sub->add_option("--out", cfg.out, "trajectory CSV");
    sub->add_option("--svg", cfg.svg, "phase-plane SVG");
    sub->add_option("--svg-x", cfg.svg_x, "x column of the SVG");
    sub->add_option("--svg-y", cfg.svg_y, "y column of the SVG");
  };

  auto* check = app.add_subcommand("check", "Jacobi, nilpotency and closedness residuals");
  add_input(check);
  check->add_flag("--dorfman", cfg.dorfman, "also report Dorfman bracket residuals");

  auto* ricci = app.add_subcommand("ricci", "Ricci and generalized Ricci tensors");
  add_input(ricci);

  auto* soliton = app.add_subcommand("soliton-fit", "fit generalized Ricci soliton data");
  add_input(soliton);

  auto* gbf = app.add_subcommand("bracket-flow", "generalized bracket flow");
  add_flow(gbf);
  gbf->add_option("--phi", cfg.phi, "ric or ric-h2")->check(CLI::IsMember({"ric", "ric-h2"}))->capture_default_str();

  auto* grf = app.add_subcommand("grf", "gauge-fixed generalized Ricci flow");
  add_flow(grf);

  auto* sweep = app.add_subcommand("tmin-sweep", "backward blowup time on the Heisenberg family H = a e^123");
  add_tolerances(sweep);
  sweep->add_option("--a", cfg.a_values, "explicit list of a values");
  sweep->add_option("--a-min", cfg.a_min)->capture_default_str();
  sweep->add_option("--a-max", cfg.a_max)->capture_default_str();
  sweep->add_option("--a-count", cfg.a_count)->capture_default_str();
  sweep->add_option("--horizon", cfg.horizon, "backward search horizon")->capture_default_str();
  sweep->add_option("--forward-horizon", cfg.forward_horizon, "time of the g_3 limit estimate")->capture_default_str();
  sweep->add_option("--out", cfg.out, "CSV of the sweep");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidation;
  }

  try {
    if (*check) return cmd_check(cfg);
    if (*ricci) return cmd_ricci(cfg);
    if (*soliton) return cmd_soliton(cfg);
    if (*gbf) return cmd_bracket_flow(cfg);
    if (*grf) return cmd_grf(cfg);
    if (*sweep) return cmd_tmin_sweep(cfg);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  }
  return kValidation;
}
