#include <doctest.h>

#include <cmath>

#include "armopt/trajectory.hpp"
#include "test_utils.hpp"

using namespace armopt;

namespace {

JointTrajectory::KnotMatrix constant_knots(int n, const Vec3& c) {
  JointTrajectory::KnotMatrix knots(n, kNumJoints);
  for (int i = 0; i < n; ++i) knots.row(i) = c.transpose();
  return knots;
}

}  // namespace

TEST_CASE("constant knots produce a constant trajectory") {
  const KnotGrid grid{0.0, 30.0, 1.0};
  const Vec3 c(0.3, -1.1, 2.0);
  const JointTrajectory traj = fit_spline(grid, constant_knots(grid.num_knots(), c));
  for (double t = 0.0; t <= 30.0; t += 0.37) {
    const JointState st = traj.eval(t);
    CHECK((st.q - c).lpNorm<Eigen::Infinity>() <= 1e-13);
    CHECK(st.qdot.lpNorm<Eigen::Infinity>() <= 1e-13);
    CHECK(st.qddot.lpNorm<Eigen::Infinity>() <= 1e-13);
  }
}

TEST_CASE("clamped spline reproduces a cubic with zero end slopes") {
  const KnotGrid grid{0.0, 10.0, 1.0};
  // p(t) = t^2 (3T - 2t) / T^2-style smoothstep has p'(0) = p'(T) = 0.
  auto poly = [](double t) {
    const double T = 10.0;
    return 3.0 * t * t / (T * T) - 2.0 * t * t * t / (T * T * T);
  };
  auto dpoly = [](double t) {
    const double T = 10.0;
    return 6.0 * t / (T * T) - 6.0 * t * t / (T * T * T);
  };

  const int n = grid.num_knots();
  JointTrajectory::KnotMatrix knots(n, kNumJoints);
  for (int i = 0; i < n; ++i) {
    const double v = poly(grid.knot_time(i));
    knots.row(i) = Vec3(v, 2.0 * v, -v).transpose();
  }
  const JointTrajectory traj = fit_spline(grid, knots);
  for (double t = 0.0; t <= 10.0; t += 0.05) {
    const JointState st = traj.eval(t);
    CHECK(st.q[0] == doctest::Approx(poly(t)).epsilon(1e-9));
    CHECK(st.q[1] == doctest::Approx(2.0 * poly(t)).epsilon(1e-9));
    CHECK(st.qdot[0] == doctest::Approx(dpoly(t)).epsilon(1e-8));
  }
}

TEST_CASE("interpolation and clamped boundary conditions") {
  const KnotGrid grid{0.0, 30.0, 1.0};
  testutil::Rng rng(31);
  const int n = grid.num_knots();
  JointTrajectory::KnotMatrix knots(n, kNumJoints);
  for (int i = 0; i < n; ++i) knots.row(i) = rng.angles().transpose();
  const JointTrajectory traj = fit_spline(grid, knots);

  CHECK(traj.eval(grid.t0).qdot.lpNorm<Eigen::Infinity>() <= 1e-12);
  CHECK(traj.eval(grid.tf).qdot.lpNorm<Eigen::Infinity>() <= 1e-12);
  for (int i = 0; i < n; ++i) {
    const JointState st = traj.eval(grid.knot_time(i));
    CHECK((st.q.transpose() - knots.row(i)).lpNorm<Eigen::Infinity>() <= 1e-12);
  }

  SUBCASE("derivatives match finite differences of q") {
    const double h = 1e-6;
    for (double t = 0.31; t < 29.5; t += 2.93) {
      const JointState st = traj.eval(t);
      const Vec3 fd = (traj.eval(t + h).q - traj.eval(t - h).q) / (2 * h);
      CHECK((st.qdot - fd).lpNorm<Eigen::Infinity>() <=
            1e-5 * std::max(1.0, st.qdot.lpNorm<Eigen::Infinity>()));
    }
  }

  SUBCASE("acceleration is continuous across knot boundaries") {
    for (int i = 1; i + 1 < n; ++i) {
      const double t = grid.knot_time(i);
      const Vec3 before = traj.eval(t - 1e-9).qddot;
      const Vec3 after = traj.eval(t + 1e-9).qddot;
      CHECK((before - after).lpNorm<Eigen::Infinity>() <= 1e-6);
    }
  }

  SUBCASE("evaluation outside the horizon throws") {
    CHECK_THROWS_AS(traj.eval(-0.5), std::out_of_range);
    CHECK_THROWS_AS(traj.eval(30.5), std::out_of_range);
  }
}

TEST_CASE("pack/unpack round trip and locality") {
  const KnotGrid grid{0.0, 30.0, 1.0};
  testutil::Rng rng(37);
  const int n = grid.num_knots();
  JointTrajectory::KnotMatrix knots(n, kNumJoints);
  for (int i = 0; i < n; ++i) knots.row(i) = rng.angles().transpose();
  const JointTrajectory traj = fit_spline(grid, knots);

  Eigen::VectorXd x = pack(traj);
  CHECK(x.size() == 29 * 3);

  const JointTrajectory back = unpack(x, traj);
  CHECK((back.knots() - traj.knots()).lpNorm<Eigen::Infinity>() == 0.0);

  // Perturbing x entry (i, j) touches only knot row i+1, column j.
  x(5 * kNumJoints + 2) += 0.25;
  const JointTrajectory moved = unpack(x, traj);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < kNumJoints; ++j) {
      if (i == 6 && j == 2)
        CHECK(moved.knots()(i, j) == doctest::Approx(knots(i, j) + 0.25));
      else
        CHECK(moved.knots()(i, j) == knots(i, j));
    }

  CHECK_THROWS_AS(unpack(Eigen::VectorXd::Zero(10), traj), std::invalid_argument);
}

TEST_CASE("baseline trajectory") {
  const KnotGrid grid{0.0, 30.0, 1.0};
  const Vec3 a(0.1, -0.2, 0.3);

  SUBCASE("start equals goal: constant") {
    const JointTrajectory traj = baseline_trajectory(a, a, {}, grid);
    for (double t = 0.0; t <= 30.0; t += 1.7) {
      CHECK((traj.eval(t).q - a).lpNorm<Eigen::Infinity>() <= 1e-13);
      CHECK(traj.eval(t).qdot.lpNorm<Eigen::Infinity>() <= 1e-13);
    }
  }

  SUBCASE("straight move: interior knots on the joint-space segment") {
    const Vec3 b(1.0, 0.5, -0.8);
    const JointTrajectory traj = baseline_trajectory(a, b, {}, grid);
    for (int i = 0; i < grid.num_knots(); ++i) {
      const double u = static_cast<double>(i) / (grid.num_knots() - 1);
      const Vec3 expect = (1.0 - u) * a + u * b;
      CHECK((traj.knots().row(i).transpose() - expect).lpNorm<Eigen::Infinity>() <=
            1e-12);
    }
  }

  SUBCASE("via waypoint is hit exactly at its knot time") {
    const Vec3 b(1.0, 0.5, -0.8), mid(-0.4, 0.9, 0.1);
    const JointTrajectory traj = baseline_trajectory(a, b, {{15.0, mid}}, grid);
    CHECK((traj.eval(15.0).q - mid).lpNorm<Eigen::Infinity>() <= 1e-12);
  }

  SUBCASE("out-of-order via times are rejected") {
    CHECK_THROWS_AS(baseline_trajectory(a, a, {{31.0, a}}, grid),
                    std::invalid_argument);
    CHECK_THROWS_AS(baseline_trajectory(a, a, {{10.0, a}, {5.0, a}}, grid),
                    std::invalid_argument);
  }
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS((KnotGrid{0.0, 30.0, 0.7}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((KnotGrid{5.0, 5.0, 1.0}.validate()), std::invalid_argument);
  CHECK_NOTHROW((KnotGrid{0.0, 30.0, 1.0}.validate()));
}
