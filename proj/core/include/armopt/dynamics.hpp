#pragma once

#include <Eigen/Dense>
#include <array>

namespace armopt {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Jacobian2x3 = Eigen::Matrix<double, 2, 3>;

inline constexpr int kNumJoints = 3;

/// Physical description of the planar 3R arm. Links are uniform thin rods
/// (center of mass at mid-link, inertia m*L^2/12 about the COM). Gravity
/// acts along -y of the vertical plane.
struct ArmParams {
  Vec3 link_lengths;            // m
  Vec3 link_masses;             // kg
  double gravity_accel = 9.81;  // m/s^2
  Vec3 torque_limits;           // N*m, tau_max per joint
  Vec3 joint_viscous_friction = Vec3::Zero();  // N*m*s/rad

  void validate() const;  // throws std::invalid_argument on bad values
};

/// Full kinematic state of the joints.
struct JointState {
  Vec3 q;      // rad
  Vec3 qdot;   // rad/s
  Vec3 qddot;  // rad/s^2
};

struct TorqueVector {
  Vec3 tau;  // N*m
};

struct LinkSegment {
  Vec2 a;
  Vec2 b;
};

/// Joint origin points p0..p2 plus the end effector p3, chained from the
/// base at the origin.
struct ChainPoints {
  std::array<Vec2, kNumJoints + 1> p;
  const Vec2& end_effector() const { return p[kNumJoints]; }
};

ChainPoints forward_kinematics(const ArmParams& params, const Vec3& q);

/// d(end effector)/dq, 2x3.
Jacobian2x3 jacobian(const ArmParams& params, const Vec3& q);

/// Joint-space inertia matrix M(q), symmetric positive definite.
Mat3 mass_matrix(const ArmParams& params, const Vec3& q);

/// Coriolis/centrifugal matrix built from Christoffel symbols, so that
/// dM/dt - 2C is skew-symmetric.
Mat3 coriolis_matrix(const ArmParams& params, const Vec3& q, const Vec3& qdot);

/// Gravity torque g(q) = dV/dq for the rod COMs.
Vec3 gravity_vector(const ArmParams& params, const Vec3& q);

/// tau = M(q) qddot + C(q,qdot) qdot + g(q) + b .* qdot
TorqueVector inverse_dynamics(const ArmParams& params, const JointState& state);

/// Joint torques and chain points from one shared kinematic pass. Intended
/// for quadrature loops that need both the dynamics and the link geometry at
/// every sample (energy + clearance evaluation).
struct DynamicsSample {
  TorqueVector tau;
  ChainPoints points;
};
DynamicsSample inverse_dynamics_with_points(const ArmParams& params,
                                            const JointState& state);

/// qddot = M(q)^-1 (tau - C qdot - g - b .* qdot), solved by Cholesky.
/// Throws std::runtime_error if M is numerically singular.
Vec3 forward_dynamics(const ArmParams& params, const Vec3& q, const Vec3& qdot,
                      const TorqueVector& tau);

std::array<LinkSegment, kNumJoints> link_segments(const ArmParams& params,
                                                  const Vec3& q);

/// Kinetic + potential energy of the arm, used by conservation checks.
double mechanical_energy(const ArmParams& params, const Vec3& q,
                         const Vec3& qdot);

}  // namespace armopt
