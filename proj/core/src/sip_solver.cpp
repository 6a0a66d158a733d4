#include "armopt/sip_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <thread>

namespace armopt {

namespace {

int worker_count() {
  if (const char* env = std::getenv("ARMOPT_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

double merit(const PenaltyEval& e, double mu, double margin) {
  double phi = e.objective;
  for (double g : e.g) {
    const double v = std::max(0.0, g + margin);
    phi += mu * v * v;
  }
  return phi;
}

double worst_g(const PenaltyEval& e) {
  double w = -std::numeric_limits<double>::infinity();
  for (double g : e.g) w = std::max(w, g);
  return w;
}

// Central-difference gradient of the merit function. Coordinates are
// partitioned over a fixed number of workers; each writes only its own
// slots, so the result is identical for any worker count.
Eigen::VectorXd fd_gradient(const PenaltyFn& fn, const Eigen::VectorXd& x,
                            double step, double mu, double margin) {
  const int dim = static_cast<int>(x.size());
  Eigen::VectorXd grad(dim);
  const int workers = std::min(worker_count(), dim);

  auto run = [&](int begin, int end) {
    Eigen::VectorXd xp = x;
    for (int i = begin; i < end; ++i) {
      const double xi = x(i);
      xp(i) = xi + step;
      const double fp = merit(fn(xp), mu, margin);
      xp(i) = xi - step;
      const double fm = merit(fn(xp), mu, margin);
      xp(i) = xi;
      grad(i) = (fp - fm) / (2.0 * step);
    }
  };

  if (workers <= 1) {
    run(0, dim);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (dim + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const int begin = w * chunk;
      const int end = std::min(dim, begin + chunk);
      if (begin < end) pool.emplace_back(run, begin, end);
    }
    for (auto& t : pool) t.join();
  }
  return grad;
}

struct GdResult {
  Eigen::VectorXd x;
  PenaltyEval eval;
  int iterations = 0;
  bool line_search_failed = false;
};

// Two-loop L-BFGS recursion. `mem` holds (s, y) displacement/gradient-change
// pairs, oldest first. Returns -H*grad; falls back to -grad when empty.
Eigen::VectorXd lbfgs_direction(
    const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& mem,
    const Eigen::VectorXd& grad) {
  Eigen::VectorXd q = grad;
  if (mem.empty()) return -q;
  const int m = static_cast<int>(mem.size());
  std::vector<double> alpha(m);
  for (int i = m - 1; i >= 0; --i) {
    const auto& [s, y] = mem[i];
    alpha[i] = s.dot(q) / y.dot(s);
    q -= alpha[i] * y;
  }
  const auto& [sl, yl] = mem.back();
  q *= sl.dot(yl) / yl.squaredNorm();
  for (int i = 0; i < m; ++i) {
    const auto& [s, y] = mem[i];
    const double beta = y.dot(q) / y.dot(s);
    q += (alpha[i] - beta) * s;
  }
  return -q;
}

GdResult gradient_descent(const PenaltyFn& fn, Eigen::VectorXd x,
                          const SolverConfig& cfg, double mu) {
  constexpr int kMaxBacktracks = 60;

  GdResult res;
  res.eval = fn(x);
  double phi = merit(res.eval, mu, cfg.penalty_margin);
  int stalls = 0;
  double alpha_sd = cfg.armijo_initial_step;  // remembered steepest step
  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> mem;

  Eigen::VectorXd grad =
      fd_gradient(fn, x, cfg.gradient_fd_step, mu, cfg.penalty_margin);
  for (int it = 0; it < cfg.inner_max_iters; ++it) {
    if (grad.lpNorm<Eigen::Infinity>() <= cfg.inner_grad_tolerance) break;

    Eigen::VectorXd dir = cfg.lbfgs_memory > 0 ? lbfgs_direction(mem, grad)
                                               : Eigen::VectorXd(-grad);
    double slope = grad.dot(dir);
    double alpha;
    if (mem.empty() || !(slope < 0.0)) {
      // Steepest descent along the normalized gradient: the step is a knot
      // displacement in radians, independent of the penalty scale.
      dir = -grad / grad.norm();
      slope = -grad.norm();
      alpha = alpha_sd;
    } else {
      alpha = std::min(1.0, cfg.max_quasi_newton_step / dir.lpNorm<Eigen::Infinity>());
    }

    bool accepted = false;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      const Eigen::VectorXd xn = x + alpha * dir;
      const PenaltyEval en = fn(xn);
      const double phin = merit(en, mu, cfg.penalty_margin);
      if (phin <= phi + cfg.armijo_c * alpha * slope) {
        const double drop = phi - phin;
        const Eigen::VectorXd gn =
            fd_gradient(fn, xn, cfg.gradient_fd_step, mu, cfg.penalty_margin);
        const Eigen::VectorXd s = alpha * dir;
        const Eigen::VectorXd y = gn - grad;
        // Keep only safely positive-curvature pairs.
        if (cfg.lbfgs_memory > 0 &&
            y.dot(s) > 1e-10 * s.norm() * y.norm()) {
          mem.emplace_back(s, y);
          if (static_cast<int>(mem.size()) > cfg.lbfgs_memory)
            mem.erase(mem.begin());
        }
        if (mem.empty())
          alpha_sd = std::min(cfg.armijo_initial_step,
                              alpha / cfg.armijo_backtrack);
        x = xn;
        grad = gn;
        res.eval = en;
        phi = phin;
        accepted = true;
        stalls =
            (drop <= cfg.inner_stall_drop_tol * (1.0 + std::abs(phi)))
                ? stalls + 1
                : 0;
        break;
      }
      alpha *= cfg.armijo_backtrack;
    }
    ++res.iterations;
    if (!accepted) {
      res.line_search_failed = true;
      break;
    }
    if (stalls >= cfg.inner_stall_limit) break;
  }
  res.x = std::move(x);
  return res;
}

// One quadrature pass yielding both the trajectory energy and the integral
// hinge penalty sum_f int max(0, g_f(t) + margin)^2 dt over the continuous
// families. Sampling the constraints pointwise (only at the exchange set)
// lets the optimizer squeeze fast constraint crossings between the penalized
// instants; the integral prices a crossing at every time and shares the
// inverse-dynamics evaluation with the energy term. Throws std::runtime_error
// on non-finite samples, matching trajectory_energy.
struct FusedObjective {
  double energy = 0.0;
  double penalty_integral = 0.0;
};

FusedObjective fused_objective(const ArmParams& params,
                               const JointTrajectory& traj,
                               const std::vector<ConstraintSpec>& continuous,
                               double h, PowerMode mode, double margin) {
  const double t0 = traj.grid().t0, tf = traj.grid().tf;
  const int n = std::max(1, static_cast<int>(std::lround((tf - t0) / h)));
  const double step = (tf - t0) / n;

  std::vector<double> power(n + 1), hinge(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double t = (i == n) ? tf : t0 + i * step;
    const JointState st = traj.eval(t);
    const DynamicsSample ds = inverse_dynamics_with_points(params, st);

    double p = 0.0;
    for (int j = 0; j < kNumJoints; ++j) {
      const double raw = ds.tau.tau[j] * st.qdot[j];
      p += (mode == PowerMode::Abs) ? std::abs(raw) : std::max(0.0, raw);
    }
    if (!std::isfinite(p))
      throw std::runtime_error("fused_objective: non-finite power sample");
    power[i] = p;

    double pen = 0.0;
    for (const auto& spec : continuous) {
      double g;
      if (const auto* tl = std::get_if<TorqueLimit>(&spec)) {
        g = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < kNumJoints; ++j)
          g = std::max(g, std::abs(ds.tau.tau[j]) - tl->tau_max[j]);
      } else if (const auto* oc = std::get_if<ObstacleClearance>(&spec)) {
        const Vec2 c = oc->center_at(t);
        double dist = std::numeric_limits<double>::infinity();
        for (int j = 0; j < kNumJoints; ++j)
          dist = std::min(dist, segment_point_distance(ds.points.p[j],
                                                       ds.points.p[j + 1], c));
        g = (oc->radius + oc->margin) - dist;
      } else {
        g = violation(spec, params, traj, t);
      }
      const double v = std::max(0.0, g + margin);
      pen += v * v;
    }
    hinge[i] = pen;
  }

  auto simpson = [&](const std::vector<double>& f) {
    if (n == 1) return 0.5 * step * (f[0] + f[1]);
    double acc = 0.0;
    const int even_end = (n % 2 == 0) ? n : n - 3;
    for (int i = 0; i + 2 <= even_end; i += 2)
      acc += (step / 3.0) * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
    if (n % 2 != 0) {
      const int i = n - 3;
      acc += (3.0 * step / 8.0) *
             (f[i] + 3.0 * f[i + 1] + 3.0 * f[i + 2] + f[i + 3]);
    }
    return acc;
  };
  return {simpson(power), simpson(hinge)};
}

}  // namespace

void SolverConfig::validate() const {
  if (!(violation_tolerance > 0.0))
    throw std::invalid_argument("violation_tolerance must be > 0");
  if (outer_max_iters < 1 || inner_max_iters < 1)
    throw std::invalid_argument("iteration counts must be >= 1");
  if (!(penalty_growth > 1.0))
    throw std::invalid_argument("penalty_growth must be > 1");
  if (!(penalty_initial > 0.0) || !(gradient_fd_step > 0.0) ||
      !(armijo_initial_step > 0.0) || !(objective_quadrature_step > 0.0) ||
      !(verification_step > 0.0))
    throw std::invalid_argument("solver steps must be positive");
  if (!(armijo_backtrack > 0.0 && armijo_backtrack < 1.0))
    throw std::invalid_argument("armijo_backtrack must be in (0,1)");
  if (penalty_margin < 0.0)
    throw std::invalid_argument("penalty_margin must be >= 0");
  if (!(max_quasi_newton_step > 0.0) || !(inner_stall_drop_tol > 0.0) ||
      inner_stall_limit < 1)
    throw std::invalid_argument("inner descent knobs must be positive");
}

InnerResult solve_approximating(const PenaltyFn& fn, Eigen::VectorXd x0,
                                const SolverConfig& config, double& mu) {
  config.validate();
  InnerResult out;
  out.x = std::move(x0);
  // mu persists across outer iterations; the cap keeps the merit landscape
  // within a range steepest descent can actually navigate.
  const double mu_cap = config.penalty_initial *
                        std::pow(config.penalty_growth,
                                 config.max_penalty_escalations);
  for (int esc = 0; esc <= config.max_penalty_escalations; ++esc) {
    GdResult gd = gradient_descent(fn, out.x, config, mu);
    out.x = std::move(gd.x);
    out.iterations += gd.iterations;
    out.line_search_failed = gd.line_search_failed;
    out.merit = merit(gd.eval, mu, config.penalty_margin);
    if (gd.eval.g.empty() || worst_g(gd.eval) <= config.violation_tolerance)
      break;
    if (mu >= mu_cap) break;
    mu = std::min(mu_cap, mu * config.penalty_growth);
  }
  return out;
}

AuxiliaryResult solve_auxiliary(const ArmParams& params,
                                const JointTrajectory& traj,
                                const std::vector<ConstraintSpec>& continuous) {
  if (continuous.empty())
    throw std::invalid_argument("solve_auxiliary: no continuous families");
  AuxiliaryResult best{0, 0.0, -std::numeric_limits<double>::infinity()};
  for (int f = 0; f < static_cast<int>(continuous.size()); ++f) {
    const TimedViolation tv = max_violation_over_time(continuous[f], params, traj);
    if (tv.value > best.value ||
        (tv.value == best.value && f == best.family && tv.time < best.time)) {
      best = {f, tv.time, tv.value};
    }
  }
  return best;
}

double max_violation_on_grid(const ArmParams& params,
                             const JointTrajectory& traj,
                             const std::vector<ConstraintSpec>& continuous,
                             const std::vector<ConstraintSpec>& finite,
                             double step) {
  const double t0 = traj.grid().t0, tf = traj.grid().tf;
  const int n = std::max(1, static_cast<int>(std::lround((tf - t0) / step)));
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& spec : continuous) {
    for (int i = 0; i <= n; ++i) {
      const double t = (i == n) ? tf : t0 + i * (tf - t0) / n;
      worst = std::max(worst, violation(spec, params, traj, t));
    }
  }
  for (const auto& spec : finite)
    worst = std::max(worst, violation(spec, params, traj, t0));
  return worst;
}

SipResult local_reduction_solve(const SipProblem& problem,
                                const SolverConfig& config) {
  config.validate();
  problem.params.validate();
  const ArmParams& params = problem.params;
  const JointTrajectory& tmpl = problem.initial;
  const double eta = config.violation_tolerance;
  const double t0 = tmpl.grid().t0, tf = tmpl.grid().tf;

  ConstraintIndexSet Y;
  for (int f = 0; f < static_cast<int>(problem.continuous.size()); ++f) {
    Y.insert(f, t0);
    Y.insert(f, 0.5 * (t0 + tf));
    Y.insert(f, tf);
  }

  auto make_penalty_fn = [&](const ConstraintIndexSet& set) -> PenaltyFn {
    return [&params, &tmpl, &problem, set,
            h = config.objective_quadrature_step, mode = config.power_mode,
            margin = config.penalty_margin](const Eigen::VectorXd& x) {
      const JointTrajectory traj = unpack(x, tmpl);
      PenaltyEval e;
      FusedObjective fo;
      try {
        fo = fused_objective(params, traj, problem.continuous, h, mode, margin);
      } catch (const std::runtime_error&) {
        // Wild line-search candidate; report it as unacceptable instead of
        // aborting the solve.
        e.objective = std::numeric_limits<double>::infinity();
        return e;
      }
      e.objective = fo.energy;
      e.g.reserve(set.entries.size() + problem.finite.size() + 1);
      for (const auto& entry : set.entries)
        e.g.push_back(
            violation(problem.continuous[entry.family], params, traj, entry.time));
      for (const auto& spec : problem.finite)
        e.g.push_back(violation(spec, params, traj, tmpl.grid().t0));
      // Integral hinge penalty, encoded so the merit's max(0, g + margin)^2
      // recovers exactly mu * penalty_integral.
      e.g.push_back(std::sqrt(fo.penalty_integral) - margin);
      return e;
    };
  };

  auto full_energy = [&](const JointTrajectory& traj) {
    return trajectory_energy(params, traj, 0.01, config.power_mode).total_energy;
  };
  auto grid_violation = [&](const JointTrajectory& traj) {
    return max_violation_on_grid(params, traj, problem.continuous,
                                 problem.finite, config.verification_step);
  };

  SipResult result;
  SolverReport& report = result.report;

  JointTrajectory current = tmpl;
  Eigen::VectorXd x = pack(current);

  struct Incumbent {
    JointTrajectory traj;
    double energy;
  };
  std::optional<Incumbent> incumbent;
  if (grid_violation(current) <= eta)
    incumbent = Incumbent{current, full_energy(current)};

  std::vector<double> feasible_energies;  // for the stagnation stop
  bool converged = false;

  double mu = config.penalty_initial;
  for (int k = 0; k < config.outer_max_iters; ++k) {
    // Fresh penalty continuation each outer iteration: the low-mu stages let
    // the energy term iron out whatever the previous exchange left behind
    // before the constraints are tightened again. A persisted mu leaves the
    // landscape too stiff to escape bad intermediate iterates.
    mu = config.penalty_initial;
    const PenaltyFn fn = make_penalty_fn(Y);
    const InnerResult inner = solve_approximating(fn, x, config, mu);
    x = inner.x;
    report.total_inner_iterations += inner.iterations;
    current = unpack(x, tmpl);

    const AuxiliaryResult aux = solve_auxiliary(params, current, problem.continuous);
    double max_viol = aux.value;
    for (const auto& spec : problem.finite)
      max_viol = std::max(max_viol, violation(spec, params, current, t0));

    const double energy = full_energy(current);
    const double verr = grid_violation(current);
    if (verr <= eta && (!incumbent || energy < incumbent->energy))
      incumbent = Incumbent{current, energy};

    OuterRecord rec{k, static_cast<int>(Y.size()), energy, max_viol,
                    std::nullopt};

    if (max_viol <= eta && verr <= eta) {
      report.iterations.push_back(rec);
      converged = true;
      break;
    }

    if (verr <= eta) {
      feasible_energies.push_back(energy);
      const int w = config.stagnation_window;
      if (static_cast<int>(feasible_energies.size()) >= w) {
        const double oldest = feasible_energies[feasible_energies.size() - w];
        if (std::abs(oldest - energy) <=
            config.stagnation_rel_tol * (1.0 + std::abs(energy))) {
          report.iterations.push_back(rec);
          converged = true;
          break;
        }
      }
    } else {
      feasible_energies.clear();
    }

    // Exchange step: add the most violated time (or the verification-grid
    // worst point when the auxiliary search found nothing new).
    double t_add = aux.time;
    if (!Y.insert(aux.family, t_add)) {
      t_add = std::clamp(t_add + 10 * ConstraintIndexSet::kTimeResolution, t0, tf);
      Y.insert(aux.family, t_add);
    }
    rec.added_time = t_add;
    report.iterations.push_back(rec);
  }

  const double final_energy = full_energy(current);
  const double final_verr = grid_violation(current);
  if (incumbent && (final_verr > eta || incumbent->energy <= final_energy)) {
    result.trajectory = incumbent->traj;
  } else {
    result.trajectory = current;
  }

  const double returned_verr = grid_violation(result.trajectory);
  report.converged = converged && returned_verr <= eta + 1e-8;
  // A trajectory may also have become feasible through the incumbent rule
  // even if the loop ran out of iterations.
  if (!converged && returned_verr <= eta) report.converged = true;
  report.final_penalty = mu;

  if (converged && returned_verr > eta + 1e-8)
    throw InternalInconsistencyError(
        "local_reduction_solve: converged iterate fails verification grid");

  // Terminal record for the returned trajectory.
  OuterRecord last;
  last.k = report.iterations.empty() ? 0 : report.iterations.back().k + 1;
  last.constraint_set_size = static_cast<int>(Y.size());
  last.energy = trajectory_energy(params, result.trajectory, 0.01,
                                  config.power_mode).total_energy;
  last.max_violation = returned_verr;
  report.iterations.push_back(last);
  return result;
}

}  // namespace armopt
