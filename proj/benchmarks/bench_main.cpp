#include <benchmark/benchmark.h>

#include <Eigen/Core>

#include "fsreach/disturbance.hpp"
#include "fsreach/fsr.hpp"
#include "fsreach/occupancy.hpp"
#include "fsreach/planner.hpp"

using namespace fsreach;

namespace {

const Lattice kL = Lattice::uniform(2, 0.1);

SparsePMF gaussian_disturbance() {
    const TruncatedGaussian tg{BoxRegion(Eigen::Vector2d(1, 1), Eigen::Vector2d(2, 2)), Eigen::Vector2d(1.5, 1.5),
                               0.1 * Eigen::Matrix2d::Identity()};
    return discretize(tg, kL);
}

SparsePMF uniform_initial() { return SparsePMF::uniform(kL, BoxRegion(Eigen::Vector2d(0, 0), Eigen::Vector2d(2, 2))); }

void BM_FsrSparse(benchmark::State& state) {
    const SparsePMF w = gaussian_disturbance();
    const SparsePMF x0 = uniform_initial();
    const auto dyn = DynamicsMap::identity(2);
    const int tau = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(fsr_compute(x0, dyn, w, tau));
}
BENCHMARK(BM_FsrSparse)->Arg(2)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_DpBaseline(benchmark::State& state) {
    const SparsePMF w = gaussian_disturbance();
    const SparsePMF x0 = uniform_initial();
    const auto dyn = DynamicsMap::identity(2);
    const BoxRegion domain(Eigen::Vector2d(0, 0), Eigen::Vector2d(25, 25));
    const int tau = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(dp_baseline(x0, dyn, w, domain, tau));
}
BENCHMARK(BM_DpBaseline)->Arg(2)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_OccupancySuperlevel(benchmark::State& state) {
    const SparsePMF w = gaussian_disturbance();
    const SparsePMF pmf = fsr_compute(uniform_initial(), DynamicsMap::identity(2), w, 5).pmf(5);
    const ObstacleGeometry body = ObstacleGeometry::box(Eigen::Vector2d(0.5, 0.5));
    for (auto _ : state) benchmark::DoNotOptimize(superlevel(occupancy(pmf, body), 0.01));
}
BENCHMARK(BM_OccupancySuperlevel)->Unit(benchmark::kMillisecond);

void BM_PlannerSolve(benchmark::State& state) {
    const int boxes = static_cast<int>(state.range(0));
    PlanInputs in;
    in.robot = RobotModel{0.2 * Eigen::Matrix2d::Identity(),
                          BoxRegion(Eigen::Vector2d(-0.2, 0.1), Eigen::Vector2d(1, 1))};
    in.initial_state = Eigen::Vector2d(0, 0);
    in.goal = Eigen::Vector2d(0.5, 1.0);
    in.horizon = 5;
    in.cost_state = Eigen::Matrix2d::Identity();
    in.cost_input = 0.01 * Eigen::Matrix2d::Identity();
    in.workspace = BoxRegion(Eigen::Vector2d(-10, -10), Eigen::Vector2d(20, 20));
    for (int k = 1; k <= in.horizon; ++k) {
        AvoidBoxSet s;
        s.time_index = k;
        s.lattice = kL;
        for (int b = 0; b < boxes; ++b) {
            const double x = 0.05 * k - 0.3 + 0.25 * b;
            s.boxes.push_back(AvoidBox{{}, BoxRegion(Eigen::Vector2d(x, 0.1 * k), Eigen::Vector2d(x + 0.2, 0.1 * k + 0.3)), b});
        }
        in.avoid.push_back(s);
    }
    const PlanProblem p = build(in);
    for (auto _ : state) benchmark::DoNotOptimize(solve(p));
}
BENCHMARK(BM_PlannerSolve)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
