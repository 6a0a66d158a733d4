#include "armopt/energy.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace armopt {

Vec3 instantaneous_power(const ArmParams& params, const JointState& state,
                         PowerMode mode) {
  const TorqueVector tau = inverse_dynamics(params, state);
  Vec3 p;
  for (int i = 0; i < kNumJoints; ++i) {
    const double raw = tau.tau[i] * state.qdot[i];
    p[i] = (mode == PowerMode::Abs) ? std::abs(raw) : std::max(0.0, raw);
  }
  return p;
}

EnergyReport trajectory_energy(const ArmParams& params,
                               const std::function<JointState(double)>& sample,
                               double t0, double tf, double h, PowerMode mode) {
  if (!(tf > t0)) throw std::invalid_argument("trajectory_energy: tf <= t0");
  if (!(h > 0.0)) throw std::invalid_argument("trajectory_energy: h <= 0");
  const int n = std::max(1, static_cast<int>(std::lround((tf - t0) / h)));
  const double step = (tf - t0) / n;

  std::vector<Vec3> p(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double t = (i == n) ? tf : t0 + i * step;
    p[i] = instantaneous_power(params, sample(t), mode);
    if (!p[i].allFinite())
      throw std::runtime_error("trajectory_energy: non-finite power sample");
  }

  // Composite Simpson; odd interval counts get a 3/8 tail, a single interval
  // falls back to the trapezoid.
  Vec3 integral = Vec3::Zero();
  if (n == 1) {
    integral = 0.5 * step * (p[0] + p[1]);
  } else {
    int even_end = (n % 2 == 0) ? n : n - 3;
    for (int i = 0; i + 2 <= even_end; i += 2)
      integral += (step / 3.0) * (p[i] + 4.0 * p[i + 1] + p[i + 2]);
    if (n % 2 != 0) {
      const int i = n - 3;
      integral += (3.0 * step / 8.0) *
                  (p[i] + 3.0 * p[i + 1] + 3.0 * p[i + 2] + p[i + 3]);
    }
  }

  EnergyReport report;
  report.per_joint_energy = integral;
  report.total_energy = integral.sum();
  report.quadrature_step = step;
  return report;
}

EnergyReport trajectory_energy(const ArmParams& params,
                               const JointTrajectory& traj, double h,
                               PowerMode mode) {
  return trajectory_energy(
      params, [&traj](double t) { return traj.eval(t); }, traj.grid().t0,
      traj.grid().tf, h, mode);
}

}  // namespace armopt
