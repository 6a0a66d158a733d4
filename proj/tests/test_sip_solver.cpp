#include <doctest.h>

#include <cmath>

#include "armopt/scenarios.hpp"
#include "armopt/sip_solver.hpp"
#include "test_utils.hpp"

using namespace armopt;

TEST_CASE("solve_approximating on a synthetic quadratic objective") {
  const Eigen::Vector3d a(0.7, -0.3, 1.2);
  PenaltyFn fn = [&a](const Eigen::VectorXd& x) {
    PenaltyEval e;
    e.objective = (x - a).squaredNorm();
    return e;
  };

  SolverConfig cfg;
  cfg.armijo_initial_step = 0.5;
  double mu = cfg.penalty_initial;
  const InnerResult res = solve_approximating(fn, Eigen::Vector3d::Zero(), cfg, mu);
  CHECK((res.x - a).lpNorm<Eigen::Infinity>() <= 1e-4);
  CHECK(res.iterations >= 1);

  SUBCASE("descent property") {
    const double phi_init = fn(Eigen::Vector3d::Zero()).objective;
    CHECK(res.merit <= phi_init + 1e-12);
  }
}

TEST_CASE("solve_approximating honors a penalized constraint") {
  // min (x-2)^2 s.t. x <= 1; penalty optimum approaches x = 1.
  PenaltyFn fn = [](const Eigen::VectorXd& x) {
    PenaltyEval e;
    e.objective = (x(0) - 2.0) * (x(0) - 2.0);
    e.g = {x(0) - 1.0};
    return e;
  };
  SolverConfig cfg;
  cfg.armijo_initial_step = 0.25;
  cfg.violation_tolerance = 1e-4;
  double mu = cfg.penalty_initial;
  Eigen::VectorXd x0(1);
  x0 << 0.0;
  const InnerResult res = solve_approximating(fn, x0, cfg, mu);
  CHECK(res.x(0) == doctest::Approx(1.0).epsilon(5e-3));
  CHECK(res.x(0) <= 1.0 + cfg.violation_tolerance);
}

TEST_CASE("stationary start: zero-gravity arm with start == goal") {
  ArmParams arm = testutil::canonical_arm();
  arm.gravity_accel = 0.0;
  const Vec3 q(0.5, -0.4, 0.2);
  const JointTrajectory baseline = baseline_trajectory(q, q, {}, {0, 30, 1});

  SolverConfig cfg;
  double mu = cfg.penalty_initial;
  PenaltyFn fn = [&](const Eigen::VectorXd& x) {
    PenaltyEval e;
    e.objective =
        trajectory_energy(arm, unpack(x, baseline), cfg.objective_quadrature_step)
            .total_energy;
    return e;
  };
  const Eigen::VectorXd x0 = pack(baseline);
  const InnerResult res = solve_approximating(fn, x0, cfg, mu);
  CHECK((res.x - x0).lpNorm<Eigen::Infinity>() <= 1e-6);
}

TEST_CASE("solve_auxiliary") {
  const Scenario scenario = builtin_scenarios()[1];
  const ArmParams& arm = scenario.arm;
  const JointTrajectory baseline = scenario_baseline(scenario);
  const std::vector<ConstraintSpec> families = {
      TorqueLimit{arm.torque_limits}, scenario.obstacles[0]};

  const AuxiliaryResult a1 = solve_auxiliary(arm, baseline, families);
  const AuxiliaryResult a2 = solve_auxiliary(arm, baseline, families);
  CHECK(a1.family == a2.family);
  CHECK(a1.time == a2.time);
  CHECK(a1.value == a2.value);

  SUBCASE("feasible trajectory reports non-positive worst violation") {
    // Generous limits and the obstacle moved far away.
    std::vector<ConstraintSpec> easy = {
        TorqueLimit{Vec3(1e4, 1e4, 1e4)},
        ObstacleClearance{Vec2(50, 50), Vec2::Zero(), 0.2, 0.05, 0.0}};
    CHECK(solve_auxiliary(arm, baseline, easy).value <= 0.0);
  }

  SUBCASE("constructed violation is found") {
    // The baseline sweeps through the static obstacle (checked against a
    // dense scan in the scenarios suite), so g* must be positive and match
    // the dense maximum.
    CHECK(a1.value > 0.0);
    double dense = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 30000; ++i)
      dense = std::max(dense,
                       violation(families[a1.family], arm, baseline, i * 0.001));
    CHECK(a1.value >= dense - 1e-6);
  }
}

TEST_CASE("local reduction on an unconstrained-feasible scenario") {
  // No obstacles and huge torque limits: Y never needs to grow beyond the
  // initial set, and the result must not regress the baseline.
  Scenario scenario = builtin_scenarios()[0];
  scenario.arm.torque_limits = Vec3(1e4, 1e4, 1e4);

  SolverConfig cfg;
  cfg.inner_max_iters = 40;  // keep the unit test quick
  cfg.outer_max_iters = 8;

  const SipProblem problem = scenario_problem(scenario);
  const double before = trajectory_energy(scenario.arm, problem.initial).total_energy;
  const SipResult res = local_reduction_solve(problem, cfg);

  CHECK(res.report.converged);
  const double after = trajectory_energy(scenario.arm, res.trajectory).total_energy;
  CHECK(after <= before + 1e-9);

  // |Y_k| grows by exactly one per exchange and is nondecreasing.
  int prev = 0;
  for (const auto& rec : res.report.iterations) {
    CHECK(rec.constraint_set_size >= prev);
    if (rec.added_time) CHECK(rec.constraint_set_size >= prev);
    prev = rec.constraint_set_size;
  }
  for (std::size_t i = 0; i + 1 < res.report.iterations.size(); ++i) {
    const auto& rec = res.report.iterations[i];
    const auto& next = res.report.iterations[i + 1];
    if (rec.added_time)
      CHECK(next.constraint_set_size == rec.constraint_set_size + 1);
  }
}

TEST_CASE("solver config validation") {
  SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.penalty_growth = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.violation_tolerance = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
