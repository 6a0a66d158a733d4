#pragma once

#include <functional>

#include "armopt/dynamics.hpp"
#include "armopt/trajectory.hpp"

namespace armopt {

/// How negative mechanical power (gravity-assisted braking) is counted.
/// Abs: braking energy is dissipated by the actuator. Clamp: braking is free.
enum class PowerMode { Abs, Clamp };

struct EnergyReport {
  double total_energy = 0.0;        // J
  Vec3 per_joint_energy = Vec3::Zero();
  double quadrature_step = 0.0;     // s
};

/// Per-joint mechanical power p_i = |tau_i * w_i| (or clamped at zero),
/// with tau from inverse dynamics.
Vec3 instantaneous_power(const ArmParams& params, const JointState& state,
                         PowerMode mode = PowerMode::Abs);

/// Integrates the summed joint power over [t0, tf] by composite Simpson
/// quadrature at step h. Throws std::runtime_error on a non-finite sample.
EnergyReport trajectory_energy(const ArmParams& params,
                               const JointTrajectory& traj, double h = 0.01,
                               PowerMode mode = PowerMode::Abs);

/// Same quadrature over an arbitrary state sampler; seam for synthetic
/// integrands and for partial-interval integration.
EnergyReport trajectory_energy(const ArmParams& params,
                               const std::function<JointState(double)>& sample,
                               double t0, double tf, double h = 0.01,
                               PowerMode mode = PowerMode::Abs);

}  // namespace armopt
