#include <doctest.h>

#include <random>
#include <set>
#include <thread>

#include "fsreach/disturbance.hpp"
#include "fsreach/predictor.hpp"
#include "oracles.hpp"

using namespace fsreach;

namespace {

const Lattice kL = Lattice::uniform(2, 0.05);
const ObstacleGeometry kUnit = ObstacleGeometry::box(Eigen::Vector2d(0.5, 0.5));

SparsePMF speed_set(double sx, double sy) {
    FiniteSpeedSet f;
    f.speeds = {3, 2.5, 1.5, 2, 1, 0.8, 0.5, 0.1};
    f.probs = {0.05, 0.05, 0.30, 0.20, 0.25, 0.10, 0.04, 0.01};
    f.per_axis_sign = Eigen::Vector2d(sx, sy);
    f.gain_matrix = Eigen::Matrix2d::Identity();
    f.sample_time = 0.2;
    return discretize(f, kL);
}

std::set<std::vector<std::int64_t>> covered(const AvoidBoxSet& s) {
    std::set<std::vector<std::int64_t>> out;
    for (const AvoidBox& b : s.boxes)
        for (Index i = b.cells.lower[0]; i <= b.cells.upper[0]; ++i)
            for (Index j = b.cells.lower[1]; j <= b.cells.upper[1]; ++j) out.insert({i, j});
    return out;
}

PlannerConfig config(int horizon) {
    PlannerConfig c;
    c.robot = RobotModel{0.2 * Eigen::Matrix2d::Identity(), BoxRegion(Eigen::Vector2d(-0.2, 0.1), Eigen::Vector2d(1, 1))};
    c.cost_state = Eigen::Matrix2d::Identity();
    c.cost_input = 0.01 * Eigen::Matrix2d::Identity();
    c.horizon = horizon;
    c.workspace = BoxRegion(Eigen::Vector2d(-10, -10), Eigen::Vector2d(20, 20));
    return c;
}

}  // namespace

TEST_SUITE("predictor") {
    TEST_CASE("offset FSR from a delta at the origin") {
        const ObstaclePredictor pred(kL, speed_set(1, -1), kUnit, 5);
        CHECK(pred.horizon() == 5);
        CHECK(pred.offset_fsr().pmf(0).size() == 1);
        CHECK(pred.offset_fsr().pmf(0).point(0) == LatticePoint{0, 0});
        const FsrResult direct = fsr_compute(SparsePMF::delta(kL, {0, 0}), DynamicsMap::identity(2), speed_set(1, -1), 5);
        for (int k = 0; k <= 5; ++k) CHECK(oracle::max_abs_diff(oracle::cells(pred.offset_fsr().pmf(k)), oracle::cells(direct.pmf(k))) == 0.0);
    }

    TEST_CASE("prediction equals the FSR from the snapped measurement") {
        const ObstaclePredictor pred(kL, speed_set(-1, 1), kUnit, 4);
        const Eigen::Vector2d pos(1.23, -0.71);  // snaps to (25, -14)
        const FsrResult direct = fsr_compute(SparsePMF::delta(kL, kL.snap(pos)), DynamicsMap::identity(2), speed_set(-1, 1), 4);
        for (int k = 1; k <= 4; ++k) {
            CHECK(oracle::max_abs_diff(oracle::cells(pred.pmf(k, pos)), oracle::cells(direct.pmf(k))) <= 1e-15);
            const AvoidBoxSet a = pred.avoid_set(k, pos, 0.01, 0);
            const AvoidBoxSet b = superlevel(occupancy(direct.pmf(k), kUnit), 0.01);
            CHECK(covered(a) == covered(b));
        }
    }

    TEST_CASE("translation by a lattice vector shifts the boxes exactly") {
        const ObstaclePredictor pred(kL, speed_set(1, 1), kUnit, 3);
        const Eigen::Vector2d p(0.4, 0.6);
        const LatticePoint d{13, -7};
        const Eigen::Vector2d q = p + Eigen::Vector2d(13 * 0.05, -7 * 0.05);
        for (int k = 1; k <= 3; ++k) {
            const AvoidBoxSet a = pred.avoid_set(k, p, 0.02, 0).translated(d);
            const AvoidBoxSet b = pred.avoid_set(k, q, 0.02, 0);
            REQUIRE(a.boxes.size() == b.boxes.size());
            for (std::size_t i = 0; i < a.boxes.size(); ++i) {
                CHECK(a.boxes[i].cells == b.boxes[i].cells);
                CHECK(a.boxes[i].region == b.boxes[i].region);
            }
        }
    }

    TEST_CASE("multi-obstacle prediction equals avoid_sets_multi") {
        auto a = std::make_shared<const ObstaclePredictor>(kL, speed_set(1, -1), kUnit, 3);
        auto b = std::make_shared<const ObstaclePredictor>(kL, speed_set(-1, -1), kUnit, 3);
        const std::vector<Eigen::VectorXd> pos{Eigen::Vector2d(-1.0, 2.0), Eigen::Vector2d(1.5, 2.5)};
        const auto sets = predict_avoid_sets({a, b}, pos, 0.045, 3);
        REQUIRE(sets.size() == 3);
        for (int k = 1; k <= 3; ++k) {
            const AvoidBoxSet ref = avoid_sets_multi({a->pmf(k, pos[0]), b->pmf(k, pos[1])}, kUnit, 0.045, k);
            CHECK(covered(sets[static_cast<std::size_t>(k - 1)]) == covered(ref));
            CHECK(sets[static_cast<std::size_t>(k - 1)].time_index == k);
        }
    }

    TEST_CASE("alpha = 0 avoids the dilated support") {
        const ObstaclePredictor pred(kL, speed_set(1, 1), kUnit, 2);
        const Eigen::Vector2d pos(0, 0);
        for (int k = 1; k <= 2; ++k) {
            std::set<std::vector<std::int64_t>> expected;
            const auto body = kUnit.rasterize(kL);
            const SparsePMF centers = pred.pmf(k, pos);
            for (const auto& z : centers.support())
                for (const auto& o : body) expected.insert(oracle::key(z + o));
            CHECK(covered(pred.avoid_set(k, pos, 0.0, 0)) == expected);
        }
    }

    TEST_CASE("far obstacle leaves the plan unchanged") {
        auto pred = std::make_shared<const ObstaclePredictor>(kL, speed_set(1, 1), kUnit, 5);
        const Eigen::Vector2d x0(0, 0);
        const Eigen::Vector2d goal(1, 4);
        const auto with = receding_horizon_step(x0, {Eigen::Vector2d(15, 15)}, {pred}, 0.045, config(5), goal);
        const auto without = receding_horizon_step(x0, {}, {}, 0.045, config(5), goal);
        REQUIRE(with.control.has_value());
        REQUIRE(without.control.has_value());
        CHECK(with.active_boxes == 0);
        CHECK(*with.control == *without.control);
        CHECK(with.plan.objective == without.plan.objective);
    }

    TEST_CASE("raising alpha never loses feasibility") {
        auto a = std::make_shared<const ObstaclePredictor>(kL, speed_set(1, -1), kUnit, 5);
        auto b = std::make_shared<const ObstaclePredictor>(kL, speed_set(-1, -1), kUnit, 5);
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        const std::vector<double> alphas{0.0, 0.01, 0.02, 0.045, 0.1, 0.3};
        int flips = 0;
        for (int trial = 0; trial < 12; ++trial) {
            const std::vector<Eigen::VectorXd> pos{Eigen::Vector2d(-1.5 + u(rng), 1.5 + u(rng)),
                                                   Eigen::Vector2d(1.5 + u(rng), 1.5 + u(rng))};
            bool feasible_before = false;
            for (double alpha : alphas) {
                const auto r = receding_horizon_step(Eigen::Vector2d(0, 0), pos, {a, b}, alpha, config(5), Eigen::Vector2d(0.5, 4));
                const bool feasible = r.plan.status == PlanStatus::Feasible;
                if (feasible_before) CHECK(feasible);
                if (feasible && !feasible_before && alpha > 0.0) ++flips;
                feasible_before = feasible_before || feasible;
            }
        }
        CHECK(flips > 0);
    }

    TEST_CASE("cache is consistent across threads") {
        const ObstaclePredictor pred(kL, speed_set(1, 1), kUnit, 5);
        const AvoidBoxSet ref = pred.avoid_set(5, Eigen::Vector2d(0, 0), 0.01, 0);
        std::vector<std::jthread> workers;
        std::vector<std::size_t> sizes(4);
        for (std::size_t i = 0; i < 4; ++i)
            workers.emplace_back([&, i] { sizes[i] = pred.avoid_set(5, Eigen::Vector2d(0, 0), 0.01, 0).boxes.size(); });
        workers.clear();
        for (std::size_t s : sizes) CHECK(s == ref.boxes.size());
    }
}
