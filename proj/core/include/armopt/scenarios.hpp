#pragma once

#include <optional>
#include <string>
#include <vector>

#include "armopt/constraints.hpp"
#include "armopt/sip_solver.hpp"

namespace armopt {

/// A timed end-effector waypoint the optimized trajectory must pass through.
struct ViaWaypoint {
  double time = 0.0;
  Vec2 point;
  double tolerance = 1e-3;  // m
};

struct Scenario {
  std::string name;
  ArmParams arm;
  KnotGrid grid;
  Vec3 start_q;
  Vec2 goal_point;  // end-effector target; goal_q follows from elbow-up IK
  std::vector<ViaWaypoint> vias;
  std::vector<ObstacleClearance> obstacles;
};

struct ScenarioResult {
  std::string name;
  double energy_before = 0.0;  // J, baseline
  double energy_after = 0.0;   // J, optimized
  double reduction_pct = 0.0;  // 100*(before-after)/before, 0 when before=0
  bool converged = false;
  SolverReport report;
  JointTrajectory baseline;
  JointTrajectory optimized;
};

/// Deterministic elbow-up inverse kinematics for the 3R arm: the end-effector
/// orientation is fixed to the direction of the target from the base, the
/// wrist point is solved with the two-link closed form, and the negative
/// elbow branch (elbow above the base-to-wrist line for upper-half-plane
/// targets) is taken. Returns nullopt when the wrist is out of reach.
std::optional<Vec3> inverse_kinematics_elbow_up(const ArmParams& params,
                                                const Vec2& target);

/// The canonical catalog mirroring the no/static/moving obstacle experiment.
std::vector<Scenario> builtin_scenarios();

/// Empty when valid; otherwise human-readable violations (unreachable
/// targets, unordered waypoint times, obstacle covering the base, ...).
std::vector<std::string> validate_scenario(const Scenario& scenario);

/// Baseline through the IK joint waypoints, linearly interpolated in joint
/// space. Throws std::invalid_argument when the scenario is invalid.
JointTrajectory scenario_baseline(const Scenario& scenario);

/// Continuous + finite constraint families of the scenario, in a stable
/// order: torque limit first, then obstacles, then precision waypoints.
SipProblem scenario_problem(const Scenario& scenario);

/// Full before/after experiment for one scenario.
ScenarioResult run_scenario(const Scenario& scenario,
                            const SolverConfig& config = {});

}  // namespace armopt
