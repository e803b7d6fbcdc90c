#include "nilflow/flows.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace testing;

namespace {

Trajectory grf_heisenberg(double a, double t_end, const GrfControls& controls = {}) {
  return integrate_grf(heisenberg(), Metric::identity(3), KForm::basis(3, {0, 1, 2}).scaled(a), Orientation::positive,
                       0.0, t_end, controls);
}

Trajectory gbf_heisenberg(PhiSpec spec, double a, double t_end) {
  return integrate_gbf(spec, heisenberg(), KForm::basis(3, {0, 1, 2}).scaled(a), 0.0, t_end, {});
}

}  // namespace

TEST_CASE("rk4 has order four") {
  const Rhs f = [](double t, const Vector& y) { return Vector(y * std::cos(t)); };
  auto err = [&](int steps) {
    Vector y = Vector::Ones(1);
    const double h = 2.0 / steps;
    for (int s = 0; s < steps; ++s) y = rk4_step(f, s * h, y, h);
    return std::abs(y(0) - std::exp(std::sin(2.0)));
  };
  const double ratio = err(20) / err(40);
  CHECK(ratio > 14.0);
  CHECK(ratio < 18.0);
}

TEST_CASE("adaptive integration") {
  const Rhs f = [](double, const Vector& y) { return Vector(-y); };
  const Vector y0 = Vector::Constant(2, 1.0 / 3.0);
  const Trajectory tr = integrate(f, 0.0, y0, 5.0, {});
  CHECK(tr.completed());
  CHECK(tr.states.front() == y0);
  CHECK(tr.times.back() == 5.0);
  for (std::size_t i = 1; i < tr.size(); ++i) CHECK(tr.times[i] > tr.times[i - 1]);
  CHECK(rel_err(tr.states.back()(0), std::exp(-5.0) / 3.0) < 1e-8);
  CHECK(tr.accepted == static_cast<long>(tr.size()) - 1);

  // y' = y^2 from 1 blows up at t = 1
  const Rhs blow = [](double, const Vector& y) { return Vector(y.cwiseProduct(y)); };
  const Trajectory b = integrate(blow, 0.0, Vector::Ones(1), 2.0, {});
  CHECK(b.stop == StopReason::norm_limit);
  CHECK(std::abs(b.times.back() - 1.0) < 1e-6);

  // a right-hand side that always fails ends in step underflow
  const Rhs bad = [](double t, const Vector& y) -> Vector {
    if (t > 0.5) throw NumericalError("outside domain");
    return Vector::Zero(y.size());
  };
  const Trajectory u = integrate(bad, 0.0, Vector::Ones(1), 1.0, {});
  CHECK(u.stop == StopReason::step_underflow);
  CHECK(u.times.back() <= 0.5);
  CHECK(u.times.back() > 0.5 - 1e-9);

  const StateMonitor cap{[](double, const Vector& y) -> std::optional<std::string> {
                           if (y(0) < 0.5) return "below half";
                           return std::nullopt;
                         },
                         StopReason::invalid_state};
  const Trajectory m = integrate(f, 0.0, Vector::Ones(1), 5.0, {}, std::span(&cap, 1));
  CHECK(m.stop == StopReason::invalid_state);
  CHECK(m.states.back()(0) < 0.5);

  StepControls fixed;
  fixed.fixed_step = 0.3;
  const Trajectory fx = integrate(f, 0.0, Vector::Ones(1), 1.0, fixed);
  CHECK(fx.size() == 5);
  CHECK(fx.times.back() == 1.0);
}

TEST_CASE("gbf_rhs") {
  for (double a : {0.0, 0.5, 2.0}) {
    const GbfDerivative d = gbf_rhs(PhiSpec::ric_minus_quarter_hsq, heisenberg(), KForm::basis(3, {0, 1, 2}).scaled(a));
    CHECK(d.dmu(0, 1, 2) == doctest::Approx(-1.5 - a * a / 2).epsilon(1e-14));
    CHECK(d.dh.at({0, 1, 2}) == doctest::Approx(-1.5 * a * a * a - a / 2).epsilon(1e-14));
  }
  const GbfDerivative z = gbf_rhs(PhiSpec::ric, LieBracket(4), KForm(4, 3));
  CHECK(z.dmu.max_abs() == 0.0);
  CHECK(z.dh.max_abs() == 0.0);
  for (int trial = 0; trial < 3; ++trial) {
    const LieBracket mu = random_nilpotent(4);
    CHECK(gbf_rhs(PhiSpec::ric, mu, random_form(4, 3)).dmu.distance(gbf_rhs(PhiSpec::ric, mu, KForm(4, 3)).dmu) == 0.0);
  }
}

TEST_CASE("gbf state packing") {
  const LieBracket mu = random_nilpotent(4);
  const KForm h = random_form(4, 3);
  const auto [mu2, h2] = unpack_gbf(4, pack_gbf(mu, h));
  CHECK(mu2 == mu);
  CHECK(h2 == h);
  CHECK(gbf_labels(3) == std::vector<std::string>{"mu_12_1", "mu_12_2", "mu_12_3", "mu_13_1", "mu_13_2", "mu_13_3",
                                                  "mu_23_1", "mu_23_2", "mu_23_3", "H_123"});
  CHECK(grf_labels(3) == std::vector<std::string>{"g_1", "g_1_2", "g_1_3", "g_2", "g_2_3", "g_3", "H_123"});
}

TEST_CASE("integrate_gbf closed forms") {
  const Trajectory tr = gbf_heisenberg(PhiSpec::ric_minus_quarter_hsq, 1.0, 10.0);
  REQUIRE(tr.completed());
  const auto x = tr.column("mu_12_3");
  const auto y = tr.column("H_123");
  double worst = 0.0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const double exact = 1.0 / std::sqrt(1.0 + 4.0 * tr.times[i]);
    worst = std::max({worst, std::abs(x[i] - exact) / exact, std::abs(y[i] - exact) / exact});
  }
  CHECK(worst <= 1e-6);

  const Trajectory ric = gbf_heisenberg(PhiSpec::ric, 0.0, 10.0);
  const auto xr = ric.column("mu_12_3");
  double worst_ric = 0.0;
  for (std::size_t i = 0; i < ric.size(); ++i)
    worst_ric = std::max(worst_ric, rel_err(xr[i], 1.0 / std::sqrt(1.0 + 3.0 * ric.times[i])));
  CHECK(worst_ric <= 1e-6);

  const Trajectory flat = integrate_gbf(PhiSpec::ric_minus_quarter_hsq, LieBracket(3), KForm(3, 3), 0.0, 1.0, {});
  for (const auto& s : flat.states) CHECK(s.cwiseAbs().maxCoeff() == 0.0);

  std::vector<TensorEntry> sl2{{{0, 1, 1}, 2.0}, {{0, 2, 2}, -2.0}, {{1, 2, 0}, 1.0}};
  CHECK_THROWS_AS(integrate_gbf(PhiSpec::ric, LieBracket::from_entries(3, sl2), KForm(3, 3), 0.0, 1.0, {}), ValidationError);
}

TEST_CASE("bracket flows stay on the variety") {
  for (int trial = 0; trial < 3; ++trial) {
    const LieBracket mu = random_nilpotent(5);
    const KForm h = ce_differential(mu, random_form(5, 2));
    for (PhiSpec spec : {PhiSpec::ric, PhiSpec::ric_minus_quarter_hsq}) {
      const Trajectory tr = integrate_gbf(spec, mu, h, 0.0, 2.0, {});
      CHECK(tr.completed());
      CHECK(tr.diagnostics.at("jacobi_residual") <= kStructureTolerance);
      CHECK(tr.diagnostics.at("closedness_residual") <= kStructureTolerance);
    }
  }
}

TEST_CASE("decay bound") {
  for (double a : {0.0, 0.5, 1.0, 2.0}) {
    const Trajectory tr = gbf_heisenberg(PhiSpec::ric_minus_quarter_hsq, a, 10.0);
    CHECK(gbf_decay_bound_check(tr, a));
    const auto x = tr.column("mu_12_3");
    const auto y = tr.column("H_123");
    for (std::size_t i = 1; i < tr.size(); ++i) CHECK(x[i] * x[i] + y[i] * y[i] <= x[i - 1] * x[i - 1] + y[i - 1] * y[i - 1]);
  }
  Trajectory tampered = gbf_heisenberg(PhiSpec::ric_minus_quarter_hsq, 1.0, 2.0);
  tampered.states.back()(static_cast<Eigen::Index>(tampered.column_index("H_123"))) = 2.0;
  CHECK_FALSE(gbf_decay_bound_check(tampered, 1.0));
  CHECK_THROWS_AS(gbf_decay_bound_check(gbf_heisenberg(PhiSpec::ric, 1.0, 1.0), 0.5), ValidationError);
  CHECK_THROWS_AS(gbf_decay_bound_check(grf_heisenberg(1.0, 1.0), 1.0), ValidationError);
}

TEST_CASE("grf_rhs") {
  const double g1 = 1.7, g3 = 0.6, a = 1.2;
  const GrfState s{Metric(Eigen::Vector3d(g1, g1, g3).asDiagonal().toDenseMatrix()), KForm::basis(3, {0, 1, 2}).scaled(a)};
  const GrfDerivative d = grf_rhs(heisenberg(), s, Orientation::positive);
  CHECK(d.dg(0, 0) == doctest::Approx((a * a + g3 * g3) / (g1 * g3)).epsilon(1e-14));
  CHECK(d.dg(1, 1) == doctest::Approx((a * a + g3 * g3) / (g1 * g3)).epsilon(1e-14));
  CHECK(d.dg(2, 2) == doctest::Approx((a * a - g3 * g3) / (g1 * g1)).epsilon(1e-14));
  CHECK(d.dh.max_abs() == 0.0);
  const GrfDerivative flat = grf_rhs(LieBracket(4), {Metric(random_spd(4)), KForm(4, 3)}, Orientation::positive);
  CHECK(flat.dg.cwiseAbs().maxCoeff() == 0.0);
  CHECK(flat.dh.max_abs() == 0.0);
  const GrfDerivative id = grf_rhs(heisenberg(), {Metric::identity(3), KForm(3, 3)}, Orientation::positive);
  CHECK((id.dg - Eigen::Vector3d(1, 1, -1).asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("integrate_grf closed forms and conserved quantities") {
  struct Case {
    double a;
    double (*g1)(double);
    double (*g3)(double);
  };
  const Case cases[] = {{0.0, [](double t) { return std::cbrt(1 + 3 * t); }, [](double t) { return 1 / std::cbrt(1 + 3 * t); }},
                        {1.0, [](double t) { return std::sqrt(1 + 4 * t); }, [](double) { return 1.0; }}};
  for (const Case& c : cases) {
    const Trajectory tr = grf_heisenberg(c.a, 10.0);
    REQUIRE(tr.completed());
    const auto g1 = tr.column("g_1"), g2 = tr.column("g_2"), g3 = tr.column("g_3"), h = tr.column("H_123");
    double worst = 0.0, sym = 0.0, drift = 0.0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
      worst = std::max({worst, std::abs(g1[i] / c.g1(tr.times[i]) - 1), std::abs(g3[i] / c.g3(tr.times[i]) - 1)});
      sym = std::max(sym, std::abs(g1[i] - g2[i]));
      drift = std::max(drift, std::abs(h[i] - c.a));
    }
    CHECK(worst <= 1e-6);
    CHECK(sym <= 1e-10);
    CHECK(drift <= 1e-12);
  }
  const Trajectory two = grf_heisenberg(2.0, 50.0);
  CHECK(std::abs(two.states.back()(static_cast<Eigen::Index>(two.column_index("g_3"))) - 2.0) <= 0.05 * 2.0);
  CHECK_THROWS_AS(integrate_grf(LieBracket(3), Metric::identity(2), KForm(3, 3), Orientation::positive, 0, 1, {}),
                  ValidationError);
}

TEST_CASE("generic grf on random nilpotent data") {
  for (int trial = 0; trial < 3; ++trial) {
    const LieBracket mu = random_nilpotent(4);
    const KForm h = random_form(4, 3);
    const Trajectory tr = integrate_grf(mu, Metric(random_spd(4)), h, Orientation::positive, 0.0, 1.0, {});
    CHECK(tr.completed());
    for (const auto& s : tr.states) {
      const GrfState st = unpack_grf(4, s);
      CHECK(closedness_residual(mu, st.h) < 1e-9);
    }
  }
}

TEST_CASE("blowup times") {
  BlowupControls controls;
  const KForm vol = KForm::basis(3, {0, 1, 2});
  const auto b0 = blowup_time(heisenberg(), Metric::identity(3), KForm(3, 3), Orientation::positive, -1, controls);
  REQUIRE(b0.time.has_value());
  CHECK(std::abs(*b0.time + 1.0 / 3.0) <= 1e-4);
  CHECK(b0.last_valid_time >= *b0.time);
  const auto b1 = blowup_time(heisenberg(), Metric::identity(3), vol, Orientation::positive, -1, controls);
  REQUIRE(b1.time.has_value());
  CHECK(std::abs(*b1.time + 0.25) <= 1e-4);
  for (double a : {0.0, 1.0, 2.0}) {
    const auto f = blowup_time(heisenberg(), Metric::identity(3), vol.scaled(a), Orientation::positive, 1, controls);
    CHECK_FALSE(f.time.has_value());
    CHECK(f.last_valid_time == controls.horizon);
  }
  CHECK_THROWS_AS(blowup_time(heisenberg(), Metric::identity(3), vol, Orientation::positive, 0, controls), ValidationError);
}

TEST_CASE("tmin sweep") {
  const std::vector<double> grid{-2.0, -0.5, 0.0, 0.5, 1.0, 2.0, 4.0};
  SweepControls controls;
  controls.forward_horizon = 50.0;
  const auto parallel = tmin_sweep(grid, controls);
  const auto serial = tmin_sweep_serial(grid, controls);
  REQUIRE(parallel.size() == grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(parallel[i].a == grid[i]);
    CHECK(parallel[i].error.empty());
    REQUIRE(parallel[i].tmin.has_value());
    CHECK(*parallel[i].tmin == *serial[i].tmin);
    CHECK(parallel[i].g3_forward == serial[i].g3_forward);
  }
  auto t = [&](double a) { return *parallel[std::find(grid.begin(), grid.end(), a) - grid.begin()].tmin; };
  CHECK(std::abs(t(0.0) + 1.0 / 3.0) <= 1e-4);
  CHECK(std::abs(t(1.0) + 0.25) <= 1e-4);
  CHECK(std::abs(t(0.5) - t(-0.5)) <= 1e-5);
  CHECK(std::abs(t(2.0) - t(-2.0)) <= 1e-5);
  CHECK(t(0.0) < t(0.5));
  CHECK(t(0.5) < t(1.0));
  CHECK(t(1.0) < t(2.0));
  CHECK(t(2.0) < 0.0);
  CHECK(std::abs(t(4.0)) < std::abs(t(1.0)));
}
