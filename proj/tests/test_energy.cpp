#include <doctest.h>

#include <cmath>

#include "armopt/energy.hpp"
#include "armopt/scenarios.hpp"
#include "test_utils.hpp"

using namespace armopt;

namespace {

// Independent trapezoid-rule oracle on a fine grid.
double trapezoid_energy(const ArmParams& params, const JointTrajectory& traj,
                        double h, PowerMode mode = PowerMode::Abs) {
  const double t0 = traj.grid().t0, tf = traj.grid().tf;
  const int n = static_cast<int>(std::lround((tf - t0) / h));
  double sum = 0.0;
  double prev = instantaneous_power(params, traj.eval(t0), mode).sum();
  for (int i = 1; i <= n; ++i) {
    const double t = (i == n) ? tf : t0 + i * h;
    const double cur = instantaneous_power(params, traj.eval(t), mode).sum();
    sum += 0.5 * (prev + cur) * (tf - t0) / n;
    prev = cur;
  }
  return sum;
}

}  // namespace

TEST_CASE("instantaneous power") {
  const ArmParams arm = testutil::canonical_arm();

  SUBCASE("zero velocity gives zero power regardless of gravity torque") {
    JointState hold{Vec3(0.5, -0.7, 0.2), Vec3::Zero(), Vec3::Zero()};
    CHECK(instantaneous_power(arm, hold).isZero(0.0));
  }

  SUBCASE("pure friction torque on joint 1") {
    ArmParams weightless = testutil::unit_arm();
    weightless.gravity_accel = 0.0;
    weightless.joint_viscous_friction = Vec3(2.0, 0.0, 0.0);
    JointState st{Vec3(0.4, 0.0, 0.0), Vec3(1.0, 0.0, 0.0), Vec3::Zero()};
    const Vec3 tau = inverse_dynamics(weightless, st).tau;
    CHECK((tau - Vec3(2.0, 0.0, 0.0)).lpNorm<Eigen::Infinity>() <= 1e-12);
    CHECK((instantaneous_power(weightless, st) - Vec3(2.0, 0.0, 0.0))
              .lpNorm<Eigen::Infinity>() <= 1e-12);
  }

  SUBCASE("matches |tau . qdot| componentwise on random states") {
    testutil::Rng rng(41);
    for (int trial = 0; trial < 50; ++trial) {
      JointState st{rng.angles(), rng.rates(), rng.rates(5.0)};
      const Vec3 tau = inverse_dynamics(arm, st).tau;
      const Vec3 p = instantaneous_power(arm, st);
      for (int i = 0; i < kNumJoints; ++i)
        CHECK(p[i] == doctest::Approx(std::abs(tau[i] * st.qdot[i])).epsilon(1e-12));
    }
  }

  SUBCASE("clamp mode zeroes regenerative power") {
    testutil::Rng rng(43);
    for (int trial = 0; trial < 20; ++trial) {
      JointState st{rng.angles(), rng.rates(), rng.rates(5.0)};
      const Vec3 tau = inverse_dynamics(arm, st).tau;
      const Vec3 p = instantaneous_power(arm, st, PowerMode::Clamp);
      for (int i = 0; i < kNumJoints; ++i)
        CHECK(p[i] == doctest::Approx(std::max(0.0, tau[i] * st.qdot[i])));
    }
  }
}

TEST_CASE("constant trajectory has zero energy") {
  const ArmParams arm = testutil::canonical_arm();
  const JointTrajectory traj =
      baseline_trajectory(Vec3(0.3, 0.4, -0.2), Vec3(0.3, 0.4, -0.2), {}, {0, 30, 1});
  const EnergyReport report = trajectory_energy(arm, traj);
  CHECK(report.total_energy == 0.0);
  CHECK(report.per_joint_energy.isZero(0.0));
}

TEST_CASE("constant 2 W over 30 s integrates to exactly 60 J") {
  ArmParams arm = testutil::unit_arm();
  arm.gravity_accel = 0.0;
  arm.joint_viscous_friction = Vec3(2.0, 0.0, 0.0);
  // Joint 1 spins at 1 rad/s; the only torque is the 2 N*m friction term.
  auto sample = [](double t) {
    return JointState{Vec3(0.1 * t, 0.0, 0.0), Vec3(1.0, 0.0, 0.0), Vec3::Zero()};
  };
  const EnergyReport report = trajectory_energy(arm, sample, 0.0, 30.0, 0.01);
  CHECK(std::abs(report.total_energy - 60.0) <= 1e-10);
  CHECK(std::abs(report.per_joint_energy[0] - 60.0) <= 1e-10);
  CHECK(report.per_joint_energy[1] == 0.0);
}

TEST_CASE("Simpson energy on the no-obstacle baseline") {
  const Scenario scenario = builtin_scenarios()[0];
  const JointTrajectory baseline = scenario_baseline(scenario);
  const EnergyReport report = trajectory_energy(scenario.arm, baseline);

  CHECK(report.total_energy > 0.0);
  CHECK(report.total_energy ==
        doctest::Approx(report.per_joint_energy.sum()).epsilon(1e-12));

  SUBCASE("matches the fine trapezoid oracle") {
    const double oracle = trapezoid_energy(scenario.arm, baseline, 1e-4);
    CHECK(report.total_energy == doctest::Approx(oracle).epsilon(1e-6));
  }

  SUBCASE("refinement stability") {
    const double halved = trajectory_energy(scenario.arm, baseline, 0.005).total_energy;
    CHECK(std::abs(halved - report.total_energy) <= 1e-6 * report.total_energy);
  }

  SUBCASE("additivity over a split at an interior grid point") {
    auto sampler = [&baseline](double t) { return baseline.eval(t); };
    const double tm = 12.0;
    const double left =
        trajectory_energy(scenario.arm, sampler, 0.0, tm, 0.01).total_energy;
    const double right =
        trajectory_energy(scenario.arm, sampler, tm, 30.0, 0.01).total_energy;
    CHECK(std::abs(left + right - report.total_energy) <= 1e-8 * report.total_energy);
  }

  SUBCASE("clamp mode never exceeds abs mode") {
    const double clamped =
        trajectory_energy(scenario.arm, baseline, 0.01, PowerMode::Clamp).total_energy;
    CHECK(clamped >= 0.0);
    CHECK(clamped <= report.total_energy + 1e-12);
  }
}
