#include <benchmark/benchmark.h>

#include "armopt/energy.hpp"
#include "armopt/scenarios.hpp"

using namespace armopt;

namespace {

ArmParams bench_arm() {
  ArmParams arm;
  arm.link_lengths = Vec3(1.0, 0.8, 0.6);
  arm.link_masses = Vec3(4.0, 3.0, 2.0);
  arm.torque_limits = Vec3(120.0, 60.0, 30.0);
  return arm;
}

void BM_InverseDynamics(benchmark::State& state) {
  const ArmParams arm = bench_arm();
  JointState st{Vec3(0.3, -0.7, 1.1), Vec3(0.5, -0.2, 0.9), Vec3(1.0, 0.4, -0.3)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(inverse_dynamics(arm, st));
    st.q[0] += 1e-9;  // defeat value caching
  }
}
BENCHMARK(BM_InverseDynamics);

void BM_TrajectoryEnergy(benchmark::State& state) {
  const Scenario s = builtin_scenarios()[0];
  const JointTrajectory baseline = scenario_baseline(s);
  const double h = 1.0 / state.range(0);
  for (auto _ : state)
    benchmark::DoNotOptimize(trajectory_energy(s.arm, baseline, h));
}
BENCHMARK(BM_TrajectoryEnergy)->Arg(20)->Arg(100);

void BM_MaxViolationOverTime(benchmark::State& state) {
  const Scenario s = builtin_scenarios()[1];
  const JointTrajectory baseline = scenario_baseline(s);
  const ConstraintSpec spec = s.obstacles[0];
  for (auto _ : state)
    benchmark::DoNotOptimize(max_violation_over_time(spec, s.arm, baseline));
}
BENCHMARK(BM_MaxViolationOverTime);

}  // namespace

BENCHMARK_MAIN();
