#pragma once

// Problem ingestion and result serialization.
//
// Problem JSON (indices 1-based):
//   {"dim": n,
//    "mu":  [[i, j, k, value], ...],      skew-completed
//    "H":   [[i, j, k, value], ...],      alternation-completed
//    "g":   [[row], ...]  or  "g_diag": [g1, ..., gn],
//    "theta": [t1, ..., tn],
//    "orientation": 1 | -1}
// Only "dim" is required.

#include "nilflow/hodge.hpp"
#include "nilflow/ode.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace nilflow {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Problem {
  std::string source;
  LieBracket mu;
  std::optional<Metric> g;
  std::optional<KForm> h;
  std::optional<KForm> theta;
  Orientation orientation = Orientation::positive;

  Metric metric_or_identity() const { return g ? *g : Metric::identity(mu.dim()); }
  KForm h_or_zero() const { return h ? *h : KForm(mu.dim(), 3); }
  KForm theta_or_zero() const { return theta ? *theta : KForm(mu.dim(), 1); }
};

/// Built-in fixture ("heisenberg3", "heisenberg3+H(a)", "abelian(n)") or a
/// path to a problem JSON file.
Problem load_problem(const std::string& source);
std::optional<Problem> builtin_problem(std::string_view name);
Problem parse_problem(std::string_view text, std::string_view origin = "<input>");

void write_trajectory_csv(const Trajectory& traj, std::ostream& out);
void emit_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);
Trajectory read_trajectory_csv(std::istream& in);
Trajectory read_trajectory_csv(const std::filesystem::path& path);

std::string phase_svg(const Trajectory& traj, const std::string& x_col, const std::string& y_col);
void emit_phase_svg(const Trajectory& traj, const std::string& x_col, const std::string& y_col,
                    const std::filesystem::path& path);

}  // namespace nilflow
