#include "armopt/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace armopt {

bool ConstraintIndexSet::insert(int family, double time) {
  for (const auto& e : entries) {
    if (e.family == family && std::abs(e.time - time) < kTimeResolution)
      return false;
  }
  entries.push_back({family, time});
  return true;
}

double segment_point_distance(const Vec2& a, const Vec2& b, const Vec2& point) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (point - a).norm();
  const double u = std::clamp((point - a).dot(ab) / len2, 0.0, 1.0);
  return (point - (a + u * ab)).norm();
}

double violation(const ConstraintSpec& spec, const ArmParams& params,
                 const JointTrajectory& traj, double t) {
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, TorqueLimit>) {
          const TorqueVector tau = inverse_dynamics(params, traj.eval(t));
          double worst = -std::numeric_limits<double>::infinity();
          for (int i = 0; i < kNumJoints; ++i)
            worst = std::max(worst, std::abs(tau.tau[i]) - s.tau_max[i]);
          return worst;
        } else if constexpr (std::is_same_v<T, ObstacleClearance>) {
          const Vec2 c = s.center_at(t);
          const auto segs = link_segments(params, traj.eval(t).q);
          double dist = std::numeric_limits<double>::infinity();
          for (const auto& seg : segs)
            dist = std::min(dist, segment_point_distance(seg.a, seg.b, c));
          return (s.radius + s.margin) - dist;
        } else if constexpr (std::is_same_v<T, PrecisionWaypoint>) {
          const Vec2 ee =
              forward_kinematics(params, traj.eval(s.time).q).end_effector();
          return (ee - s.target).norm() - s.tolerance;
        } else {
          static_assert(std::is_same_v<T, WorkspaceReach>);
          return s.target.norm() - params.link_lengths.sum();
        }
      },
      spec);
}

TimedViolation maximize_over_time(const std::function<double(double)>& f,
                                  double t0, double tf, double scan_step,
                                  double time_tol) {
  const int n = std::max(1, static_cast<int>(std::ceil((tf - t0) / scan_step)));
  const double step = (tf - t0) / n;

  TimedViolation best{t0, f(t0)};
  int best_i = 0;
  for (int i = 1; i <= n; ++i) {
    const double t = (i == n) ? tf : t0 + i * step;
    const double v = f(t);
    if (v > best.value) {
      best = {t, v};
      best_i = i;
    }
  }

  // Golden-section refinement on the bracket around the best grid point.
  double a = std::max(t0, t0 + (best_i - 1) * step);
  double b = std::min(tf, t0 + (best_i + 1) * step);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > time_tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  const double t_mid = 0.5 * (a + b);
  const double f_mid = f(t_mid);
  if (f_mid > best.value) best = {t_mid, f_mid};
  return best;
}

TimedViolation max_violation_over_time(const ConstraintSpec& spec,
                                       const ArmParams& params,
                                       const JointTrajectory& traj) {
  if (!is_continuous_family(spec))
    throw std::invalid_argument(
        "max_violation_over_time: constraint is not a continuous-time family");
  return maximize_over_time(
      [&](double t) { return violation(spec, params, traj, t); },
      traj.grid().t0, traj.grid().tf);
}

}  // namespace armopt
