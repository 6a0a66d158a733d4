#include "armopt/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace armopt {

namespace {

// perp(v) rotates v by +90 degrees; d/dtheta (cos,sin) = perp(cos,sin).
inline Vec2 perp(const Vec2& v) { return Vec2(-v.y(), v.x()); }

// Per-configuration kinematic sums shared by M, C and g.
//
// Link l has COM position p_l = sum_{s<l} L_s u(Theta_s) + (L_l/2) u(Theta_l)
// with Theta_s = q_0+...+q_s and u(t) = (cos t, sin t). Defining the partial
// sums S[l][j] = sum_{s=j..l} a_{l,s} u(Theta_s) (a = full length below the
// COM link, half length at it), the COM Jacobian column is perp(S[l][j]) and
// the second derivative d2p_l/(dq_j dq_k) = -S[l][max(j,k)].
struct LinkSums {
  Vec2 u[kNumJoints];              // u(Theta_s)
  Vec2 S[kNumJoints][kNumJoints];  // S[l][j], valid for j <= l
};

LinkSums link_sums(const ArmParams& params, const Vec3& q) {
  LinkSums ls;
  double theta = 0.0;
  for (int s = 0; s < kNumJoints; ++s) {
    theta += q[s];
    ls.u[s] = Vec2(std::cos(theta), std::sin(theta));
  }
  for (int l = 0; l < kNumJoints; ++l) {
    Vec2 acc = Vec2::Zero();
    for (int s = l; s >= 0; --s) {
      const double a = (s == l) ? 0.5 * params.link_lengths[s]
                                : params.link_lengths[s];
      acc += a * ls.u[s];
      ls.S[l][s] = acc;
    }
  }
  return ls;
}

// dM/dq_k for all k, from the exact second derivatives of the COM positions.
void mass_matrix_partials(const ArmParams& params, const LinkSums& ls,
                          Mat3 dM[kNumJoints]) {
  for (int k = 0; k < kNumJoints; ++k) dM[k].setZero();
  for (int l = 0; l < kNumJoints; ++l) {
    const double m = params.link_masses[l];
    for (int i = 0; i <= l; ++i) {
      for (int j = i; j <= l; ++j) {
        for (int k = 0; k <= l; ++k) {
          // d/dq_k [ S_i . S_j ] with dS_i/dq_k = perp(S[l][max(i,k)])
          const Vec2 dSi = perp(ls.S[l][std::max(i, k)]);
          const Vec2 dSj = perp(ls.S[l][std::max(j, k)]);
          const double v = m * (dSi.dot(ls.S[l][j]) + ls.S[l][i].dot(dSj));
          dM[k](i, j) += v;
          if (i != j) dM[k](j, i) += v;
        }
      }
    }
  }
}

}  // namespace

void ArmParams::validate() const {
  for (int i = 0; i < kNumJoints; ++i) {
    if (!(link_lengths[i] > 0.0))
      throw std::invalid_argument("link_lengths must be positive");
    if (!(link_masses[i] > 0.0))
      throw std::invalid_argument("link_masses must be positive");
    if (!(torque_limits[i] > 0.0))
      throw std::invalid_argument("torque_limits must be positive");
    if (!(joint_viscous_friction[i] >= 0.0))
      throw std::invalid_argument("joint_viscous_friction must be >= 0");
  }
  if (!std::isfinite(gravity_accel))
    throw std::invalid_argument("gravity_accel must be finite");
}

ChainPoints forward_kinematics(const ArmParams& params, const Vec3& q) {
  ChainPoints pts;
  pts.p[0] = Vec2::Zero();
  double theta = 0.0;
  for (int i = 0; i < kNumJoints; ++i) {
    theta += q[i];
    pts.p[i + 1] =
        pts.p[i] + params.link_lengths[i] * Vec2(std::cos(theta), std::sin(theta));
  }
  return pts;
}

Jacobian2x3 jacobian(const ArmParams& params, const Vec3& q) {
  Jacobian2x3 J;
  double theta = 0.0;
  Vec2 u[kNumJoints];
  for (int i = 0; i < kNumJoints; ++i) {
    theta += q[i];
    u[i] = Vec2(std::cos(theta), std::sin(theta));
  }
  for (int j = 0; j < kNumJoints; ++j) {
    Vec2 col = Vec2::Zero();
    for (int s = j; s < kNumJoints; ++s) col += params.link_lengths[s] * perp(u[s]);
    J.col(j) = col;
  }
  return J;
}

Mat3 mass_matrix(const ArmParams& params, const Vec3& q) {
  const LinkSums ls = link_sums(params, q);
  Mat3 M = Mat3::Zero();
  for (int l = 0; l < kNumJoints; ++l) {
    const double m = params.link_masses[l];
    const double L = params.link_lengths[l];
    const double inertia_com = m * L * L / 12.0;
    for (int i = 0; i <= l; ++i) {
      for (int j = i; j <= l; ++j) {
        const double v = m * ls.S[l][i].dot(ls.S[l][j]) + inertia_com;
        M(i, j) += v;
        if (i != j) M(j, i) += v;
      }
    }
  }
  return M;
}

Mat3 coriolis_matrix(const ArmParams& params, const Vec3& q, const Vec3& qdot) {
  const LinkSums ls = link_sums(params, q);
  Mat3 dM[kNumJoints];
  mass_matrix_partials(params, ls, dM);
  Mat3 C;
  for (int i = 0; i < kNumJoints; ++i) {
    for (int j = 0; j < kNumJoints; ++j) {
      double cij = 0.0;
      for (int k = 0; k < kNumJoints; ++k) {
        cij += 0.5 * (dM[k](i, j) + dM[j](i, k) - dM[i](j, k)) * qdot[k];
      }
      C(i, j) = cij;
    }
  }
  return C;
}

Vec3 gravity_vector(const ArmParams& params, const Vec3& q) {
  const LinkSums ls = link_sums(params, q);
  Vec3 g = Vec3::Zero();
  for (int l = 0; l < kNumJoints; ++l) {
    const double w = params.link_masses[l] * params.gravity_accel;
    for (int i = 0; i <= l; ++i) {
      // dy_com/dq_i = perp(S[l][i]).y
      g[i] += w * perp(ls.S[l][i]).y();
    }
  }
  return g;
}

DynamicsSample inverse_dynamics_with_points(const ArmParams& params,
                                            const JointState& state) {
  // Planar recursive Newton-Euler; this runs inside the energy quadrature and
  // the solver's finite-difference loop, so it is kept much cheaper than
  // assembling M, C and g. Gravity enters as a fictitious upward base
  // acceleration. The chain points fall out of the forward pass for free.
  double theta = 0.0, omega = 0.0, alpha = 0.0;
  Vec2 a_joint(0.0, params.gravity_accel);
  Vec2 r_com[kNumJoints], r_end[kNumJoints], a_com[kNumJoints];
  double ang_acc[kNumJoints];
  for (int i = 0; i < kNumJoints; ++i) {
    theta += state.q[i];
    omega += state.qdot[i];
    alpha += state.qddot[i];
    ang_acc[i] = alpha;
    double st, ct;
    __builtin_sincos(theta, &st, &ct);
    const Vec2 u(ct, st);
    r_end[i] = params.link_lengths[i] * u;
    r_com[i] = 0.5 * r_end[i];
    const double w2 = omega * omega;
    a_com[i] = a_joint + alpha * perp(r_com[i]) - w2 * r_com[i];
    a_joint += alpha * perp(r_end[i]) - w2 * r_end[i];
  }

  auto cross2 = [](const Vec2& a, const Vec2& b) {
    return a.x() * b.y() - a.y() * b.x();
  };
  DynamicsSample out;
  Vec2 f_child = Vec2::Zero();
  double n_child = 0.0;
  for (int i = kNumJoints - 1; i >= 0; --i) {
    const double m = params.link_masses[i];
    const double L = params.link_lengths[i];
    const Vec2 F = m * a_com[i];
    const double n = (m * L * L / 12.0) * ang_acc[i] + n_child +
                     cross2(r_com[i], F) + cross2(r_end[i], f_child);
    out.tau.tau[i] = n + params.joint_viscous_friction[i] * state.qdot[i];
    f_child += F;
    n_child = n;
  }
  out.points.p[0] = Vec2::Zero();
  for (int i = 0; i < kNumJoints; ++i)
    out.points.p[i + 1] = out.points.p[i] + r_end[i];
  return out;
}

TorqueVector inverse_dynamics(const ArmParams& params, const JointState& state) {
  return inverse_dynamics_with_points(params, state).tau;
}

Vec3 forward_dynamics(const ArmParams& params, const Vec3& q, const Vec3& qdot,
                      const TorqueVector& tau) {
  const Mat3 M = mass_matrix(params, q);
  const Mat3 C = coriolis_matrix(params, q, qdot);
  const Vec3 g = gravity_vector(params, q);
  const Vec3 rhs =
      tau.tau - C * qdot - g - params.joint_viscous_friction.cwiseProduct(qdot);
  Eigen::LLT<Mat3> llt(M);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("mass matrix not positive definite");
  return llt.solve(rhs);
}

std::array<LinkSegment, kNumJoints> link_segments(const ArmParams& params,
                                                  const Vec3& q) {
  const ChainPoints pts = forward_kinematics(params, q);
  std::array<LinkSegment, kNumJoints> segs;
  for (int i = 0; i < kNumJoints; ++i) segs[i] = {pts.p[i], pts.p[i + 1]};
  return segs;
}

double mechanical_energy(const ArmParams& params, const Vec3& q,
                         const Vec3& qdot) {
  const double kinetic = 0.5 * qdot.dot(mass_matrix(params, q) * qdot);
  const ChainPoints pts = forward_kinematics(params, q);
  double potential = 0.0;
  double theta = 0.0;
  for (int l = 0; l < kNumJoints; ++l) {
    theta += q[l];
    const double y_com =
        pts.p[l].y() + 0.5 * params.link_lengths[l] * std::sin(theta);
    potential += params.link_masses[l] * params.gravity_accel * y_com;
  }
  return kinetic + potential;
}

}  // namespace armopt
