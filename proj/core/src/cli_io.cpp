#include "armopt/cli_io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace armopt {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::invalid_argument("scenario: " + path + ": " + what);
}

const json& member(const json& obj, const std::string& path,
                   const std::string& key) {
  if (!obj.contains(key)) fail(path + "." + key, "missing required field");
  return obj.at(key);
}

double number_at(const json& obj, const std::string& path,
                 const std::string& key) {
  const json& v = member(obj, path, key);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

void reject_unknown(const json& obj, const std::string& path,
                    std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) fail(path + "." + key, "unknown field");
  }
}

template <int N>
Eigen::Matrix<double, N, 1> vector_at(const json& obj, const std::string& path,
                                      const std::string& key) {
  const json& v = member(obj, path, key);
  if (!v.is_array() || v.size() != N)
    fail(path + "." + key, "expected an array of " + std::to_string(N) + " numbers");
  Eigen::Matrix<double, N, 1> out;
  for (int i = 0; i < N; ++i) {
    if (!v[i].is_number()) fail(path + "." + key, "expected numeric entries");
    out[i] = v[i].get<double>();
  }
  return out;
}

}  // namespace

Scenario parse_scenario_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("scenario: invalid JSON: ") + e.what());
  }
  reject_unknown(root, "$",
                 {"name", "arm", "grid", "start_q", "goal", "vias", "obstacles"});

  Scenario s;
  const json& name = member(root, "$", "name");
  if (!name.is_string()) fail("$.name", "expected a string");
  s.name = name.get<std::string>();

  const json& arm = member(root, "$", "arm");
  reject_unknown(arm, "$.arm",
                 {"link_lengths", "link_masses", "gravity_accel",
                  "torque_limits", "joint_viscous_friction"});
  s.arm.link_lengths = vector_at<3>(arm, "$.arm", "link_lengths");
  s.arm.link_masses = vector_at<3>(arm, "$.arm", "link_masses");
  s.arm.gravity_accel = number_at(arm, "$.arm", "gravity_accel");
  s.arm.torque_limits = vector_at<3>(arm, "$.arm", "torque_limits");
  s.arm.joint_viscous_friction =
      arm.contains("joint_viscous_friction")
          ? vector_at<3>(arm, "$.arm", "joint_viscous_friction")
          : Vec3::Zero();

  const json& grid = member(root, "$", "grid");
  reject_unknown(grid, "$.grid", {"t0", "tf", "knot_spacing"});
  s.grid.t0 = number_at(grid, "$.grid", "t0");
  s.grid.tf = number_at(grid, "$.grid", "tf");
  s.grid.knot_spacing = number_at(grid, "$.grid", "knot_spacing");

  s.start_q = vector_at<3>(root, "$", "start_q");

  const json& goal = member(root, "$", "goal");
  reject_unknown(goal, "$.goal", {"target"});
  s.goal_point = vector_at<2>(goal, "$.goal", "target");

  if (root.contains("vias")) {
    const json& vias = root.at("vias");
    if (!vias.is_array()) fail("$.vias", "expected an array");
    for (std::size_t i = 0; i < vias.size(); ++i) {
      const std::string path = "$.vias[" + std::to_string(i) + "]";
      reject_unknown(vias[i], path, {"time", "point", "tolerance"});
      ViaWaypoint v;
      v.time = number_at(vias[i], path, "time");
      v.point = vector_at<2>(vias[i], path, "point");
      v.tolerance = vias[i].contains("tolerance")
                        ? number_at(vias[i], path, "tolerance")
                        : 1e-3;
      s.vias.push_back(v);
    }
  }
  if (root.contains("obstacles")) {
    const json& obs = root.at("obstacles");
    if (!obs.is_array()) fail("$.obstacles", "expected an array");
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const std::string path = "$.obstacles[" + std::to_string(i) + "]";
      reject_unknown(obs[i], path, {"center", "velocity", "radius", "margin"});
      ObstacleClearance o;
      o.center0 = vector_at<2>(obs[i], path, "center");
      o.velocity = obs[i].contains("velocity")
                       ? vector_at<2>(obs[i], path, "velocity")
                       : Vec2(Vec2::Zero());
      o.radius = number_at(obs[i], path, "radius");
      o.margin = obs[i].contains("margin") ? number_at(obs[i], path, "margin")
                                           : 0.05;
      o.t_ref = s.grid.t0;
      s.obstacles.push_back(o);
    }
  }
  return s;
}

Scenario parse_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw std::invalid_argument("scenario: cannot open file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario_json(buf.str());
}

std::string scenario_to_json(const Scenario& s) {
  json root;
  root["name"] = s.name;
  root["arm"] = {
      {"link_lengths", {s.arm.link_lengths[0], s.arm.link_lengths[1], s.arm.link_lengths[2]}},
      {"link_masses", {s.arm.link_masses[0], s.arm.link_masses[1], s.arm.link_masses[2]}},
      {"gravity_accel", s.arm.gravity_accel},
      {"torque_limits", {s.arm.torque_limits[0], s.arm.torque_limits[1], s.arm.torque_limits[2]}},
      {"joint_viscous_friction",
       {s.arm.joint_viscous_friction[0], s.arm.joint_viscous_friction[1],
        s.arm.joint_viscous_friction[2]}}};
  root["grid"] = {{"t0", s.grid.t0}, {"tf", s.grid.tf}, {"knot_spacing", s.grid.knot_spacing}};
  root["start_q"] = {s.start_q[0], s.start_q[1], s.start_q[2]};
  root["goal"] = {{"target", {s.goal_point.x(), s.goal_point.y()}}};
  root["vias"] = json::array();
  for (const auto& v : s.vias)
    root["vias"].push_back({{"time", v.time},
                            {"point", {v.point.x(), v.point.y()}},
                            {"tolerance", v.tolerance}});
  root["obstacles"] = json::array();
  for (const auto& o : s.obstacles)
    root["obstacles"].push_back({{"center", {o.center0.x(), o.center0.y()}},
                                 {"velocity", {o.velocity.x(), o.velocity.y()}},
                                 {"radius", o.radius},
                                 {"margin", o.margin}});
  return root.dump(2);
}

void apply_overrides(SolverConfig& config,
                     const std::vector<std::string>& overrides) {
  std::vector<std::string> bad;
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      bad.push_back(kv);
      continue;
    }
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    try {
      if (key == "violation_tolerance") config.violation_tolerance = std::stod(value);
      else if (key == "outer_max_iters") config.outer_max_iters = std::stoi(value);
      else if (key == "penalty_initial") config.penalty_initial = std::stod(value);
      else if (key == "penalty_growth") config.penalty_growth = std::stod(value);
      else if (key == "max_penalty_escalations") config.max_penalty_escalations = std::stoi(value);
      else if (key == "inner_max_iters") config.inner_max_iters = std::stoi(value);
      else if (key == "gradient_fd_step") config.gradient_fd_step = std::stod(value);
      else if (key == "armijo_c") config.armijo_c = std::stod(value);
      else if (key == "armijo_backtrack") config.armijo_backtrack = std::stod(value);
      else if (key == "armijo_initial_step") config.armijo_initial_step = std::stod(value);
      else if (key == "inner_grad_tolerance") config.inner_grad_tolerance = std::stod(value);
      else if (key == "objective_quadrature_step") config.objective_quadrature_step = std::stod(value);
      else if (key == "penalty_margin") config.penalty_margin = std::stod(value);
      else if (key == "stagnation_rel_tol") config.stagnation_rel_tol = std::stod(value);
      else if (key == "stagnation_window") config.stagnation_window = std::stoi(value);
      else if (key == "verification_step") config.verification_step = std::stod(value);
      else if (key == "power_mode") {
        if (value == "abs") config.power_mode = PowerMode::Abs;
        else if (value == "clamp") config.power_mode = PowerMode::Clamp;
        else bad.push_back(kv);
      } else bad.push_back(kv);
    } catch (const std::exception&) {
      bad.push_back(kv);
    }
  }
  if (!bad.empty()) {
    std::string msg = "unknown or malformed overrides:";
    for (const auto& b : bad) msg += " " + b;
    throw std::invalid_argument(msg);
  }
  config.validate();
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void write_summary_csv(std::ostream& os, const std::vector<ScenarioResult>& rows) {
  os << "scenario,energy_before_J,energy_after_J,reduction_pct,converged,outer_iters\n";
  for (const auto& r : rows) {
    const int outer_iters =
        std::max<int>(0, static_cast<int>(r.report.iterations.size()) - 1);
    os << r.name << ',' << format_number(r.energy_before) << ','
       << format_number(r.energy_after) << ',' << format_number(r.reduction_pct)
       << ',' << (r.converged ? "true" : "false") << ',' << outer_iters << '\n';
  }
}

void write_trace_csv(std::ostream& os, const ArmParams& params,
                     const JointTrajectory& traj, PowerMode mode) {
  os << "t,q1,q2,q3,w1,w2,w3,tau1,tau2,tau3,power_total\n";
  const double t0 = traj.grid().t0, tf = traj.grid().tf;
  const int n = static_cast<int>(std::lround((tf - t0) / 0.01));
  for (int i = 0; i <= n; ++i) {
    const double t = (i == n) ? tf : t0 + i * 0.01;
    const JointState st = traj.eval(t);
    const TorqueVector tau = inverse_dynamics(params, st);
    const Vec3 p = instantaneous_power(params, st, mode);
    os << format_number(t);
    for (int j = 0; j < kNumJoints; ++j) os << ',' << format_number(st.q[j]);
    for (int j = 0; j < kNumJoints; ++j) os << ',' << format_number(st.qdot[j]);
    for (int j = 0; j < kNumJoints; ++j) os << ',' << format_number(tau.tau[j]);
    os << ',' << format_number(p.sum()) << '\n';
  }
}

namespace {

std::vector<Scenario> resolve_scenarios(const std::string& selector) {
  if (selector.rfind("file:", 0) == 0)
    return {parse_scenario_file(selector.substr(5))};
  std::vector<Scenario> all = builtin_scenarios();
  if (selector == "all") return all;
  for (auto& s : all)
    if (s.name == selector) return {std::move(s)};
  throw std::invalid_argument(
      "unknown scenario selector '" + selector +
      "' (expected no-obstacles, static-obstacles, moving-obstacles, all, or "
      "file:<path>)");
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

}  // namespace

int cli_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    SolverConfig solver;
    apply_overrides(solver, config.overrides);
    const std::vector<Scenario> scenarios = resolve_scenarios(config.scenario);

    if (config.command == "validate") {
      bool ok = true;
      for (const auto& s : scenarios) {
        const auto problems = validate_scenario(s);
        if (problems.empty()) {
          out << s.name << ": ok\n";
        } else {
          ok = false;
          for (const auto& p : problems) err << s.name << ": " << p << '\n';
        }
      }
      return ok ? 0 : 1;
    }

    std::filesystem::create_directories(config.out_dir);

    if (config.command == "simulate") {
      for (const auto& s : scenarios) {
        const JointTrajectory baseline = scenario_baseline(s);
        const EnergyReport energy =
            trajectory_energy(s.arm, baseline, 0.01, solver.power_mode);
        out << s.name << ": baseline energy " << format_number(energy.total_energy)
            << " J\n";
        if (config.emit_trace) {
          const auto dir = config.out_dir / s.name;
          std::filesystem::create_directories(dir);
          std::ostringstream trace;
          write_trace_csv(trace, s.arm, baseline, solver.power_mode);
          write_file(dir / "trace_before.csv", trace.str());
        }
      }
      return 0;
    }

    if (config.command == "optimize") {
      std::vector<ScenarioResult> results;
      for (const auto& s : scenarios) {
        results.push_back(run_scenario(s, solver));
        const auto& r = results.back();
        out << r.name << ": before " << format_number(r.energy_before)
            << " J, after " << format_number(r.energy_after) << " J, reduction "
            << format_number(r.reduction_pct) << "%"
            << (r.converged ? "" : " (not converged)") << '\n';
        if (config.emit_trace) {
          const auto dir = config.out_dir / s.name;
          std::filesystem::create_directories(dir);
          std::ostringstream before, after;
          write_trace_csv(before, s.arm, r.baseline, solver.power_mode);
          write_trace_csv(after, s.arm, r.optimized, solver.power_mode);
          write_file(dir / "trace_before.csv", before.str());
          write_file(dir / "trace_after.csv", after.str());
        }
      }
      std::ostringstream summary;
      write_summary_csv(summary, results);
      write_file(config.out_dir / "summary.csv", summary.str());
      return 0;
    }

    err << "unknown command '" << config.command
        << "' (expected simulate, optimize, or validate)\n";
    return 1;
  } catch (const InternalInconsistencyError& e) {
    err << "internal inconsistency: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace armopt
