#include <doctest.h>

#include <cstdlib>
#include <set>

#include "fsreach/disturbance.hpp"
#include "fsreach/fsr.hpp"
#include "fsreach/serialize.hpp"
#include "fsreach/simulation.hpp"
#include "oracles.hpp"

using namespace fsreach;

namespace {

Scenario fixture() { return load_scenario(FSREACH_SCENARIO_DIR "/sec4_reproduction.json"); }

std::string dump(const SimTrace& t) { return to_json(t).dump(); }

// Zero-displacement obstacle at `at`.
ObstacleSpec parked(const Scenario& s, const Eigen::Vector2d& at) {
    ObstacleSpec o;
    o.initial_position = at;
    o.disturbance = ExplicitPmf{SparsePMF::delta(s.lattice(), {0, 0})};
    return o;
}

}  // namespace

TEST_SUITE("simulation") {
    TEST_CASE("no obstacles reaches the goal") {
        Scenario s = fixture();
        s.obstacles.clear();
        const SimTrace t = run(s);
        CHECK(t.goal_reached);
        CHECK_FALSE(t.infeasible_at_step.has_value());
        CHECK_FALSE(t.collision_occurred);
        CHECK(t.steps.back().status == StepStatus::Goal);
        CHECK((t.steps.back().robot - s.goal).lpNorm<Eigen::Infinity>() <= s.goal_tolerance + 1e-12);
        CHECK(static_cast<int>(t.steps.size()) <= s.mission_length + 1);
    }

    TEST_CASE("fixture outcomes at both thresholds") {
        Scenario s = fixture();
        const SimTrace safe = run(s);
        CHECK(safe.goal_reached);
        CHECK_FALSE(safe.collision_occurred);
        CHECK_FALSE(safe.infeasible_at_step.has_value());
        s.alpha = 0.0;
        const SimTrace minmax = run(s);
        REQUIRE(minmax.infeasible_at_step.has_value());
        CHECK(*minmax.infeasible_at_step <= 15);
        CHECK(minmax.steps.back().status == StepStatus::Infeasible);
    }

    TEST_CASE("trace records are consistent") {
        const Scenario s = fixture();
        const SimTrace t = run(s);
        for (std::size_t i = 0; i < t.steps.size(); ++i) {
            const SimStep& st = t.steps[i];
            CHECK(st.t == static_cast<int>(i));
            CHECK(in_collision(s, st.robot, st.obstacles) == (st.status == StepStatus::Collision));
            if (st.status == StepStatus::Planned) {
                REQUIRE(st.control.has_value());
                REQUIRE(i + 1 < t.steps.size());
                CHECK((t.steps[i + 1].robot - (st.robot + s.input_gain * *st.control)).norm() <= 1e-12);
                CHECK(s.input_box.contains(*st.control, 1e-9));
            }
        }
    }

    TEST_CASE("same seed gives an identical trace") {
        const Scenario s = fixture();
        CHECK(dump(run(s)) == dump(run(s)));
        Scenario other = s;
        other.seed = s.seed + 1;
        CHECK(to_json(run(other))["steps"][3]["obstacles"] != to_json(run(s))["steps"][3]["obstacles"]);
    }

    TEST_CASE("obstacle paths stay inside the reach sets") {
        // At 0.02 every speed times the sample time is a lattice multiple,
        // so snapping is exact and the check is sharp.
        Scenario s = fixture();
        s.resolution = 0.02;
        s.goal_tolerance = 0.02;
        s.goal = Eigen::Vector2d(-8, 18);
        s.mission_length = 12;
        for (std::size_t i = 0; i < s.obstacles.size(); ++i) s.obstacles[i].initial_position = Eigen::Vector2d(10.0 + 2.0 * static_cast<double>(i), 12.0);
        const Lattice l = s.lattice();
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            s.seed = seed;
            const SimTrace t = run(s);
            REQUIRE(t.steps.size() >= 2);
            for (std::size_t i = 0; i < s.obstacles.size(); ++i) {
                const SparsePMF w = discretize(s.obstacles[i].disturbance, l);
                const FsrResult r = fsr_compute(SparsePMF::delta(l, l.snap(s.obstacles[i].initial_position)),
                                                DynamicsMap::identity(2), w, static_cast<int>(t.steps.size()) - 1);
                for (std::size_t k = 0; k < t.steps.size(); ++k) {
                    const Eigen::VectorXd& y = t.steps[k].obstacles[i];
                    CHECK((y - l.coord(l.snap(y))).lpNorm<Eigen::Infinity>() <= 1e-9);
                    CHECK(r.pmf(static_cast<int>(k)).contains(l.snap(y)));
                }
            }
        }
    }

    TEST_CASE("Monte Carlo trivial cases") {
        Scenario s = fixture();
        s.obstacles = {parked(s, Eigen::Vector2d(3, 3))};
        const std::vector<Eigen::VectorXd> start{Eigen::Vector2d(3, 3)};
        const auto hit = monte_carlo_collision(s, start, {Eigen::Vector2d(3, 3), Eigen::Vector2d(3.4, 2.6)}, 10000, 1);
        CHECK(hit[0].probability == 1.0);
        CHECK(hit[1].probability == 1.0);
        const auto miss = monte_carlo_collision(s, start, {Eigen::Vector2d(0, 0)}, 10000, 1);
        CHECK(miss[0].hits == 0);
        CHECK(miss[0].ci_high == 0.0);

        const Scenario f = fixture();
        std::vector<Eigen::VectorXd> far(f.obstacles.size(), Eigen::Vector2d(-9, -9));
        const auto none = monte_carlo_collision(f, far, {Eigen::Vector2d(15, 15)}, 20000, 3);
        CHECK(none[0].hits == 0);
    }

    TEST_CASE("points outside the avoid set are safe at the sampled level") {
        const Scenario s = fixture();
        const auto preds = make_predictors(s, 3);
        std::vector<Eigen::VectorXd> pos;
        for (const auto& o : s.obstacles) pos.push_back(o.initial_position);
        const auto sets = predict_avoid_sets(preds, pos, s.alpha, 3);
        const Lattice l = s.lattice();
        int tested = 0;
        for (int k = 1; k <= 3; ++k) {
            for (const AvoidBox& b : sets[static_cast<std::size_t>(k - 1)].boxes) {
                // Just outside the box, on each side along x.
                for (double side : {-1.0, 1.0}) {
                    Eigen::Vector2d y = l.coord(side < 0 ? b.cells.lower : b.cells.upper);
                    y[0] += side * l.resolution()[0];
                    if (sets[static_cast<std::size_t>(k - 1)].covers_cell(l.snap(y))) continue;
                    std::vector<Eigen::VectorXd> states(static_cast<std::size_t>(k), Eigen::Vector2d(-9, -9));
                    states.back() = y;
                    const auto est = monte_carlo_collision(s, pos, states, 20000, 11 + tested);
                    const auto& e = est.back();
                    CHECK(e.probability <= s.alpha + 3.0 * std::sqrt(s.alpha * (1 - s.alpha) / 20000.0));
                    ++tested;
                }
            }
        }
        CHECK(tested > 0);
    }

    TEST_CASE("estimates do not depend on the worker count") {
        const Scenario s = fixture();
        std::vector<Eigen::VectorXd> pos;
        for (const auto& o : s.obstacles) pos.push_back(o.initial_position);
        const std::vector<Eigen::VectorXd> plan{Eigen::Vector2d(0, 0.2), Eigen::Vector2d(0.1, 0.4), Eigen::Vector2d(0.2, 0.6)};
        ::setenv("FSREACH_THREADS", "1", 1);
        CHECK(worker_count() == 1);
        const auto one = monte_carlo_collision(s, pos, plan, 30000, 5);
        ::setenv("FSREACH_THREADS", "3", 1);
        CHECK(worker_count() == 3);
        const auto three = monte_carlo_collision(s, pos, plan, 30000, 5);
        ::unsetenv("FSREACH_THREADS");
        for (std::size_t k = 0; k < plan.size(); ++k) CHECK(one[k].hits == three[k].hits);
    }

    TEST_CASE("validation of the fixture trace") {
        const Scenario s = fixture();
        const SimTrace t = run(s);
        const auto est = validate_trace(s, t, 20000, 99);
        CHECK(est.size() + 1 == t.steps.size());
        for (const auto& e : est) CHECK(e.probability <= s.alpha + 3.0 * std::sqrt(s.alpha * (1 - s.alpha) / 20000.0));
    }

    TEST_CASE("streams differ and repeat") {
        auto a = make_stream(7, 0);
        auto b = make_stream(7, 0);
        auto c = make_stream(7, 1);
        const auto x = a();
        CHECK(x == b());
        CHECK(x != c());
    }
}
