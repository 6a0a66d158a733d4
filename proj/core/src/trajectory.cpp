#include "armopt/trajectory.hpp"

#include <cmath>
#include <stdexcept>

namespace armopt {

int KnotGrid::num_knots() const {
  return static_cast<int>(std::lround((tf - t0) / knot_spacing)) + 1;
}

void KnotGrid::validate() const {
  if (!(tf > t0)) throw std::invalid_argument("grid: tf must exceed t0");
  if (!(knot_spacing > 0.0))
    throw std::invalid_argument("grid: knot_spacing must be positive");
  const double n = (tf - t0) / knot_spacing;
  if (std::abs(n - std::lround(n)) > 1e-9)
    throw std::invalid_argument(
        "grid: horizon must be an integer multiple of knot_spacing");
}

namespace {

// Second derivatives of the clamped cubic through y (uniform spacing h,
// prescribed end slopes v0/vf), by the Thomas algorithm.
Eigen::VectorXd clamped_second_derivatives(const Eigen::VectorXd& y, double h,
                                           double v0, double vf) {
  const int n = static_cast<int>(y.size());
  Eigen::VectorXd diag(n), rhs(n), m(n);
  Eigen::VectorXd lower = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd upper = Eigen::VectorXd::Ones(n);
  diag.setConstant(4.0);
  diag(0) = diag(n - 1) = 2.0;
  rhs(0) = 6.0 * ((y(1) - y(0)) / h - v0) / h;
  for (int i = 1; i + 1 < n; ++i)
    rhs(i) = 6.0 * (y(i + 1) - 2.0 * y(i) + y(i - 1)) / (h * h);
  rhs(n - 1) = 6.0 * (vf - (y(n - 1) - y(n - 2)) / h) / h;

  for (int i = 1; i < n; ++i) {
    const double w = lower(i) / diag(i - 1);
    diag(i) -= w * upper(i - 1);
    rhs(i) -= w * rhs(i - 1);
  }
  m(n - 1) = rhs(n - 1) / diag(n - 1);
  for (int i = n - 2; i >= 0; --i) m(i) = (rhs(i) - upper(i) * m(i + 1)) / diag(i);
  return m;
}

}  // namespace

JointTrajectory fit_spline(const KnotGrid& grid,
                           const JointTrajectory::KnotMatrix& knots) {
  grid.validate();
  const int n = grid.num_knots();
  if (knots.rows() != n)
    throw std::invalid_argument("fit_spline: knot row count does not match grid");
  if (!knots.allFinite())
    throw std::invalid_argument("fit_spline: non-finite knot angle");

  JointTrajectory traj;
  traj.grid_ = grid;
  traj.knots_ = knots;
  traj.coeffs_.resize(kNumJoints);
  const double h = grid.knot_spacing;
  for (int j = 0; j < kNumJoints; ++j) {
    const Eigen::VectorXd y = knots.col(j);
    const Eigen::VectorXd m = clamped_second_derivatives(y, h, 0.0, 0.0);
    auto& c = traj.coeffs_[j];
    c.resize(n - 1, 4);
    for (int i = 0; i + 1 < n; ++i) {
      c(i, 0) = y(i);
      c(i, 1) = (y(i + 1) - y(i)) / h - h * (2.0 * m(i) + m(i + 1)) / 6.0;
      c(i, 2) = 0.5 * m(i);
      c(i, 3) = (m(i + 1) - m(i)) / (6.0 * h);
    }
  }
  return traj;
}

JointState JointTrajectory::eval(double t) const {
  const double t0 = grid_.t0, tf = grid_.tf;
  if (t < t0 - 1e-12 || t > tf + 1e-12)
    throw std::out_of_range("trajectory eval outside horizon");
  t = std::min(std::max(t, t0), tf);
  const double h = grid_.knot_spacing;
  const int nseg = grid_.num_knots() - 1;
  int i = static_cast<int>((t - t0) / h);
  if (i >= nseg) i = nseg - 1;
  const double s = t - (t0 + i * h);

  JointState st;
  for (int j = 0; j < kNumJoints; ++j) {
    const auto& c = coeffs_[j];
    st.q[j] = c(i, 0) + s * (c(i, 1) + s * (c(i, 2) + s * c(i, 3)));
    st.qdot[j] = c(i, 1) + s * (2.0 * c(i, 2) + 3.0 * s * c(i, 3));
    st.qddot[j] = 2.0 * c(i, 2) + 6.0 * s * c(i, 3);
  }
  return st;
}

Eigen::VectorXd pack(const JointTrajectory& traj) {
  const int n = traj.grid().num_knots();
  Eigen::VectorXd x((n - 2) * kNumJoints);
  for (int i = 0; i + 2 < n; ++i)
    for (int j = 0; j < kNumJoints; ++j)
      x(i * kNumJoints + j) = traj.knots()(i + 1, j);
  return x;
}

JointTrajectory unpack(const Eigen::VectorXd& x, const JointTrajectory& tmpl) {
  const int n = tmpl.grid().num_knots();
  if (x.size() != (n - 2) * kNumJoints)
    throw std::invalid_argument("unpack: decision vector dimension mismatch");
  JointTrajectory::KnotMatrix knots = tmpl.knots();
  for (int i = 0; i + 2 < n; ++i)
    for (int j = 0; j < kNumJoints; ++j)
      knots(i + 1, j) = x(i * kNumJoints + j);
  return fit_spline(tmpl.grid(), knots);
}

JointTrajectory baseline_trajectory(
    const Vec3& start_q, const Vec3& goal_q,
    const std::vector<std::pair<double, Vec3>>& vias, const KnotGrid& grid) {
  grid.validate();
  std::vector<std::pair<double, Vec3>> wps;
  wps.reserve(vias.size() + 2);
  wps.emplace_back(grid.t0, start_q);
  for (const auto& v : vias) {
    if (!(v.first > wps.back().first) || !(v.first < grid.tf))
      throw std::invalid_argument(
          "baseline_trajectory: via times must be increasing and strictly "
          "inside the horizon");
    wps.push_back(v);
  }
  wps.emplace_back(grid.tf, goal_q);

  const int n = grid.num_knots();
  JointTrajectory::KnotMatrix knots(n, kNumJoints);
  std::size_t seg = 0;
  for (int i = 0; i < n; ++i) {
    const double t = grid.knot_time(i);
    while (seg + 2 < wps.size() && t > wps[seg + 1].first) ++seg;
    const auto& [ta, qa] = wps[seg];
    const auto& [tb, qb] = wps[seg + 1];
    const double u = (t - ta) / (tb - ta);
    // qa + u*(qb - qa) is exact at u=0 and for qa == qb.
    knots.row(i) = (qa + u * (qb - qa)).transpose();
  }
  return fit_spline(grid, knots);
}

}  // namespace armopt
