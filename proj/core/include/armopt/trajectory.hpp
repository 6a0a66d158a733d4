#pragma once

#include <Eigen/Dense>
#include <vector>

#include "armopt/dynamics.hpp"

namespace armopt {

/// Uniform knot grid over the motion horizon.
struct KnotGrid {
  double t0 = 0.0;
  double tf = 30.0;
  double knot_spacing = 1.0;

  int num_knots() const;
  double knot_time(int i) const { return t0 + i * knot_spacing; }
  void validate() const;  // throws std::invalid_argument
};

/// Per-joint clamped cubic spline (zero velocity at both ends) through the
/// knot angles. Immutable after construction.
class JointTrajectory {
 public:
  using KnotMatrix = Eigen::Matrix<double, Eigen::Dynamic, kNumJoints>;

  JointTrajectory() = default;

  const KnotGrid& grid() const { return grid_; }
  const KnotMatrix& knots() const { return knots_; }

  /// q, qdot, qddot at time t. Throws std::out_of_range outside [t0, tf].
  JointState eval(double t) const;

  friend JointTrajectory fit_spline(const KnotGrid& grid,
                                    const KnotMatrix& knots);

 private:
  KnotGrid grid_;
  KnotMatrix knots_;
  // coeffs_[j] holds (a,b,c,d) per segment: q = a + b s + c s^2 + d s^3 with
  // s local to the segment. Row-major so one segment's coefficients share a
  // cache line; eval() sits inside the solver's quadrature loop.
  std::vector<Eigen::Matrix<double, Eigen::Dynamic, 4, Eigen::RowMajor>> coeffs_;
};

JointTrajectory fit_spline(const KnotGrid& grid,
                           const JointTrajectory::KnotMatrix& knots);

/// Flattened interior knot angles; boundary knots are pinned by the task.
/// Entry (i, j) of the vector corresponds to knot row i+1, joint j.
Eigen::VectorXd pack(const JointTrajectory& traj);

/// Rebuilds a trajectory from a decision vector, taking the grid and the
/// boundary knots from the template.
JointTrajectory unpack(const Eigen::VectorXd& x, const JointTrajectory& tmpl);

/// Unoptimized trajectory: joint-space linear interpolation between
/// consecutive waypoints (time-proportional), spline-fitted with clamped
/// ends. `vias` are (time, joint configuration) pairs strictly inside the
/// horizon, in increasing time order.
JointTrajectory baseline_trajectory(
    const Vec3& start_q, const Vec3& goal_q,
    const std::vector<std::pair<double, Vec3>>& vias, const KnotGrid& grid);

}  // namespace armopt
