#include "armopt/scenarios.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace armopt {

namespace {

ArmParams canonical_arm() {
  ArmParams arm;
  arm.link_lengths = Vec3(1.0, 0.8, 0.6);
  arm.link_masses = Vec3(4.0, 3.0, 2.0);
  arm.gravity_accel = 9.81;
  arm.torque_limits = Vec3(120.0, 60.0, 30.0);
  arm.joint_viscous_friction = Vec3::Zero();
  return arm;
}

double wrap_pi(double a) {
  while (a > std::numbers::pi) a -= 2.0 * std::numbers::pi;
  while (a < -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

}  // namespace

std::optional<Vec3> inverse_kinematics_elbow_up(const ArmParams& params,
                                                const Vec2& target) {
  const double L1 = params.link_lengths[0];
  const double L2 = params.link_lengths[1];
  const double L3 = params.link_lengths[2];
  if (target.norm() < 1e-12) return std::nullopt;

  const double phi = std::atan2(target.y(), target.x());
  const Vec2 wrist = target - L3 * Vec2(std::cos(phi), std::sin(phi));
  const double d2 = wrist.squaredNorm();
  const double c2 = (d2 - L1 * L1 - L2 * L2) / (2.0 * L1 * L2);
  if (c2 < -1.0 || c2 > 1.0) return std::nullopt;

  // Elbow-up branch: q2 <= 0 puts the elbow joint above the base-to-wrist
  // line (for targets in the upper half-plane).
  const double q2 = -std::acos(c2);
  const double q1 = std::atan2(wrist.y(), wrist.x()) -
                    std::atan2(L2 * std::sin(q2), L1 + L2 * std::cos(q2));
  const double q3 = phi - q1 - q2;
  return Vec3(wrap_pi(q1), wrap_pi(q2), wrap_pi(q3));
}

std::vector<Scenario> builtin_scenarios() {
  const ArmParams arm = canonical_arm();
  const KnotGrid grid{0.0, 30.0, 1.0};
  const Vec3 start_q(-std::numbers::pi / 3.0, std::numbers::pi / 4.0,
                     std::numbers::pi / 6.0);
  const Vec2 goal(1.6, 0.8);
  const ViaWaypoint via{15.0, Vec2(0.5, 1.7), 1e-3};

  Scenario none;
  none.name = "no-obstacles";
  none.arm = arm;
  none.grid = grid;
  none.start_q = start_q;
  none.goal_point = goal;
  none.vias = {via};

  // Shipped margin is 0.02 m, not the type default 0.05 m: the base joint
  // must sweep link 1 past the static obstacle's bearing, and the elbow
  // (radius 1.0 m) passes 0.237 m from the obstacle center (|c| = 1.237 m).
  // A 0.05 m margin would demand 0.25 m there, making every trajectory
  // infeasible; 0.02 m leaves a real corridor.
  Scenario stat = none;
  stat.name = "static-obstacles";
  stat.obstacles = {{Vec2(1.2, 0.3), Vec2::Zero(), 0.2, 0.02, 0.0}};

  Scenario moving = none;
  moving.name = "moving-obstacles";
  moving.obstacles = {{Vec2(1.8, -0.2), Vec2(-0.04, 0.02), 0.2, 0.02, 0.0}};

  return {none, stat, moving};
}

std::vector<std::string> validate_scenario(const Scenario& scenario) {
  std::vector<std::string> problems;
  try {
    scenario.arm.validate();
  } catch (const std::exception& e) {
    problems.push_back(std::string("arm: ") + e.what());
  }
  try {
    scenario.grid.validate();
  } catch (const std::exception& e) {
    problems.push_back(std::string("grid: ") + e.what());
  }
  if (!problems.empty()) return problems;

  const double reach = scenario.arm.link_lengths.sum() - 1e-9;
  auto check_reach = [&](const Vec2& p, const std::string& what) {
    if (p.norm() > reach)
      problems.push_back("reach: " + what + " is outside the workspace (|p|=" +
                         std::to_string(p.norm()) + " m, max reach " +
                         std::to_string(scenario.arm.link_lengths.sum()) + " m)");
    else if (!inverse_kinematics_elbow_up(scenario.arm, p))
      problems.push_back("reach: no elbow-up solution for " + what);
  };
  check_reach(scenario.goal_point, "goal point");

  double prev_t = scenario.grid.t0;
  for (std::size_t i = 0; i < scenario.vias.size(); ++i) {
    const auto& v = scenario.vias[i];
    check_reach(v.point, "via waypoint " + std::to_string(i));
    if (!(v.time > prev_t) || !(v.time <= scenario.grid.tf))
      problems.push_back("vias: waypoint " + std::to_string(i) +
                         " time out of order or outside the horizon");
    if (!(v.tolerance > 0.0))
      problems.push_back("vias: waypoint " + std::to_string(i) +
                         " tolerance must be positive");
    prev_t = v.time;
  }
  for (std::size_t i = 0; i < scenario.obstacles.size(); ++i) {
    const auto& o = scenario.obstacles[i];
    if (!(o.radius > 0.0))
      problems.push_back("obstacles: obstacle " + std::to_string(i) +
                         " radius must be positive");
    if (o.margin < 0.0)
      problems.push_back("obstacles: obstacle " + std::to_string(i) +
                         " margin must be >= 0");
    // The base joint cannot move out of the way.
    for (double t : {scenario.grid.t0, scenario.grid.tf}) {
      if (o.center_at(t).norm() <= o.radius + o.margin) {
        problems.push_back("obstacles: obstacle " + std::to_string(i) +
                           " covers the arm base");
        break;
      }
    }
  }
  return problems;
}

JointTrajectory scenario_baseline(const Scenario& scenario) {
  const auto problems = validate_scenario(scenario);
  if (!problems.empty())
    throw std::invalid_argument("invalid scenario: " + problems.front());

  const auto goal_q = inverse_kinematics_elbow_up(scenario.arm, scenario.goal_point);
  std::vector<std::pair<double, Vec3>> vias;
  for (const auto& v : scenario.vias) {
    if (v.time >= scenario.grid.tf) continue;  // endpoint vias pin the goal knot
    const auto q = inverse_kinematics_elbow_up(scenario.arm, v.point);
    vias.emplace_back(v.time, *q);
  }
  return baseline_trajectory(scenario.start_q, *goal_q, vias, scenario.grid);
}

SipProblem scenario_problem(const Scenario& scenario) {
  SipProblem problem;
  problem.params = scenario.arm;
  problem.initial = scenario_baseline(scenario);
  problem.continuous.push_back(TorqueLimit{scenario.arm.torque_limits});
  for (const auto& o : scenario.obstacles) problem.continuous.push_back(o);
  for (const auto& v : scenario.vias)
    problem.finite.push_back(PrecisionWaypoint{v.time, v.point, v.tolerance});
  return problem;
}

ScenarioResult run_scenario(const Scenario& scenario, const SolverConfig& config) {
  SipProblem problem = scenario_problem(scenario);

  ScenarioResult result;
  result.name = scenario.name;
  result.baseline = problem.initial;
  result.energy_before =
      trajectory_energy(scenario.arm, problem.initial, 0.01, config.power_mode)
          .total_energy;

  SipResult solved = local_reduction_solve(problem, config);
  result.optimized = solved.trajectory;
  result.report = solved.report;
  result.converged = solved.report.converged;
  result.energy_after =
      trajectory_energy(scenario.arm, solved.trajectory, 0.01, config.power_mode)
          .total_energy;
  result.reduction_pct =
      result.energy_before > 0.0
          ? 100.0 * (result.energy_before - result.energy_after) /
                result.energy_before
          : 0.0;
  return result;
}

}  // namespace armopt
