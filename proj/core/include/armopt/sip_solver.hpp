#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "armopt/constraints.hpp"
#include "armopt/energy.hpp"
#include "armopt/trajectory.hpp"

namespace armopt {

/// A converged result failed re-verification; indicates a solver bug, not a
/// bad input.
struct InternalInconsistencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverConfig {
  double violation_tolerance = 1e-6;  // eta: convergence threshold on g*
  int outer_max_iters = 50;

  // Quadratic-penalty inner solver (finite-difference gradient descent with
  // Armijo backtracking).
  double penalty_initial = 10.0;
  double penalty_growth = 10.0;  // applied when the inner solve ends infeasible
  int max_penalty_escalations = 5;
  int inner_max_iters = 500;
  double gradient_fd_step = 1e-6;  // rad, central differences
  double armijo_c = 1e-4;
  double armijo_backtrack = 0.5;
  double armijo_initial_step = 1e-2;
  double inner_grad_tolerance = 1e-5;

  // Quasi-Newton memory for the inner descent direction (two-loop L-BFGS on
  // the finite-difference gradients). 0 recovers plain steepest descent.
  int lbfgs_memory = 10;

  // Trust cap on a single quasi-Newton trial step (radians per knot angle),
  // so a bad L-BFGS direction can never fling the iterate.
  double max_quasi_newton_step = 0.5;

  // A descent stage exits after `inner_stall_limit` consecutive accepted
  // steps whose merit drop is below inner_stall_drop_tol * (1 + |merit|).
  double inner_stall_drop_tol = 1e-8;
  int inner_stall_limit = 5;

  // Inner-objective quadrature step for the energy term. Coarser than the
  // reporting step (0.01 s); reported energies always use the fine grid.
  double objective_quadrature_step = 0.1;

  // Shift inside the penalty: terms activate at g > -penalty_margin, so
  // minimizers land strictly feasible instead of O(1/mu) outside. Zero
  // recovers the plain max(0, g)^2 penalty.
  double penalty_margin = 5e-4;

  // Stop once feasible and the energy has stalled.
  double stagnation_rel_tol = 1e-4;
  int stagnation_window = 3;

  PowerMode power_mode = PowerMode::Abs;
  double verification_step = 0.01;  // s, final feasibility grid

  void validate() const;
};

struct OuterRecord {
  int k = 0;
  int constraint_set_size = 0;  // |Y_k|
  double energy = 0.0;          // J, on the reporting grid
  double max_violation = 0.0;   // worst g over all families at this iterate
  std::optional<double> added_time;  // exchange point added after this step
};

struct SolverReport {
  std::vector<OuterRecord> iterations;
  bool converged = false;
  int total_inner_iterations = 0;
  double final_penalty = 0.0;
};

/// One evaluation of the decision vector: objective plus every penalized
/// constraint value. The solver treats this as a black box, which is also
/// the test seam for synthetic objectives.
struct PenaltyEval {
  double objective = 0.0;
  std::vector<double> g;  // feasible iff <= 0
};
using PenaltyFn = std::function<PenaltyEval(const Eigen::VectorXd&)>;

struct InnerResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double merit = 0.0;
  bool line_search_failed = false;
};

/// Minimizes objective + mu * sum max(0, g + margin)^2 by gradient descent.
/// `mu` is escalated in place (up to max_penalty_escalations times) while
/// the exit point still violates any g beyond the violation tolerance.
InnerResult solve_approximating(const PenaltyFn& fn, Eigen::VectorXd x0,
                                const SolverConfig& config, double& mu);

struct AuxiliaryResult {
  int family = 0;   // index into the continuous spec list
  double time = 0.0;
  double value = 0.0;  // g*
};

/// Worst violation over all continuous-time families; ties broken by lowest
/// family index, then earliest time.
AuxiliaryResult solve_auxiliary(const ArmParams& params,
                                const JointTrajectory& traj,
                                const std::vector<ConstraintSpec>& continuous);

/// The semi-infinite program handed to the exchange loop: the baseline
/// trajectory carries the grid and the pinned boundary knots.
struct SipProblem {
  ArmParams params;
  JointTrajectory initial;
  std::vector<ConstraintSpec> continuous;  // torque limits, obstacles
  std::vector<ConstraintSpec> finite;      // precision waypoints
};

struct SipResult {
  JointTrajectory trajectory;
  SolverReport report;
};

/// Exchange loop: solve the finite approximating problem on Y_k, locate the
/// most violated time, add it, repeat. Returns the incumbent best feasible
/// trajectory if the final iterate regresses. Non-convergence is reported,
/// not thrown; a converged result that fails the verification grid throws
/// InternalInconsistencyError.
SipResult local_reduction_solve(const SipProblem& problem,
                                const SolverConfig& config);

/// Worst violation of any family (continuous on the given grid step, finite
/// at their own times). Used for incumbent updates and final verification.
double max_violation_on_grid(const ArmParams& params,
                             const JointTrajectory& traj,
                             const std::vector<ConstraintSpec>& continuous,
                             const std::vector<ConstraintSpec>& finite,
                             double step);

}  // namespace armopt
