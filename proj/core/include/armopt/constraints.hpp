#pragma once

#include <functional>
#include <variant>
#include <vector>

#include "armopt/dynamics.hpp"
#include "armopt/trajectory.hpp"

namespace armopt {

/// tau_i within +/- tau_max at all times.
struct TorqueLimit {
  Vec3 tau_max;  // N*m
};

/// Keep every link at least `margin` clear of a circular obstacle whose
/// center moves linearly: c(t) = center0 + velocity * (t - t_ref).
struct ObstacleClearance {
  Vec2 center0;
  Vec2 velocity = Vec2::Zero();  // m/s, zero for static obstacles
  double radius = 0.0;           // m
  double margin = 0.05;          // m
  double t_ref = 0.0;            // s

  Vec2 center_at(double t) const { return center0 + velocity * (t - t_ref); }
};

/// End effector within `tolerance` of `target` at the fixed time `time`.
struct PrecisionWaypoint {
  double time = 0.0;
  Vec2 target;
  double tolerance = 1e-3;  // m
};

/// Target inside the arm's reachable disk; configuration independent.
struct WorkspaceReach {
  Vec2 target;
};

using ConstraintSpec =
    std::variant<TorqueLimit, ObstacleClearance, PrecisionWaypoint,
                 WorkspaceReach>;

inline bool is_continuous_family(const ConstraintSpec& spec) {
  return std::holds_alternative<TorqueLimit>(spec) ||
         std::holds_alternative<ObstacleClearance>(spec);
}

/// Finite exchange set: (constraint family index, time) pairs. Times within
/// `kTimeResolution` of an existing entry for the same family are duplicates.
struct ConstraintIndexSet {
  static constexpr double kTimeResolution = 1e-6;

  struct Entry {
    int family = 0;
    double time = 0.0;
  };
  std::vector<Entry> entries;

  /// Returns false (and leaves the set unchanged) for duplicates.
  bool insert(int family, double time);
  std::size_t size() const { return entries.size(); }
};

/// Distance from `point` to the closest point of the segment (handles
/// zero-length segments).
double segment_point_distance(const Vec2& a, const Vec2& b, const Vec2& point);

/// Constraint evaluation; feasible iff the result is <= 0. PrecisionWaypoint
/// ignores `t` and evaluates at its own time.
double violation(const ConstraintSpec& spec, const ArmParams& params,
                 const JointTrajectory& traj, double t);

struct TimedViolation {
  double time = 0.0;
  double value = 0.0;
};

/// Maximizer of a scalar function of time: dense scan at `scan_step`, then
/// golden-section refinement around the best grid point down to `time_tol`.
/// Never returns less than the scan maximum.
TimedViolation maximize_over_time(const std::function<double(double)>& f,
                                  double t0, double tf,
                                  double scan_step = 0.05,
                                  double time_tol = 1e-4);

/// Worst violation time of a continuous-time family over the horizon.
/// Throws std::invalid_argument for finite families.
TimedViolation max_violation_over_time(const ConstraintSpec& spec,
                                       const ArmParams& params,
                                       const JointTrajectory& traj);

}  // namespace armopt
