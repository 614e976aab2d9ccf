#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "fsreach/error.hpp"
#include "fsreach/occupancy.hpp"
#include "oracles.hpp"

using namespace fsreach;

namespace {

using Entries = std::vector<std::pair<LatticePoint, double>>;
using KeySet = std::set<std::vector<std::int64_t>>;

const Lattice kL = Lattice::uniform(2, 0.1);
const ObstacleGeometry kUnit = ObstacleGeometry::box(Eigen::Vector2d(0.5, 0.5));

// Three unit boxes: two overlapping at the origin, one far to the right.
SparsePMF three_centers() {
    return SparsePMF(kL, Entries{{LatticePoint{0, 0}, 0.2}, {LatticePoint{5, 0}, 0.2}, {LatticePoint{30, 0}, 0.6}});
}

KeySet covered_cells(const AvoidBoxSet& s) {
    KeySet out;
    for (const AvoidBox& b : s.boxes) {
        for (Index i = b.cells.lower[0]; i <= b.cells.upper[0]; ++i)
            for (Index j = b.cells.lower[1]; j <= b.cells.upper[1]; ++j) out.insert({i, j});
    }
    return out;
}

KeySet threshold(const oracle::Cells& c, double alpha) {
    KeySet out;
    for (const auto& [k, v] : c)
        if (v >= alpha - 1e-12 && v > 0.0) out.insert(k);
    return out;
}

KeySet rect(Index x0, Index x1, Index y0, Index y1) {
    KeySet out;
    for (Index i = x0; i <= x1; ++i)
        for (Index j = y0; j <= y1; ++j) out.insert({i, j});
    return out;
}

SparsePMF random_pmf(std::mt19937_64& rng, int count, int spread) {
    std::uniform_int_distribution<Index> idx(-spread, spread);
    std::uniform_real_distribution<double> w(0.01, 1.0);
    Entries e;
    for (int i = 0; i < count; ++i) e.emplace_back(LatticePoint{idx(rng), idx(rng)}, w(rng));
    return SparsePMF::normalized(kL, e);
}

}  // namespace

TEST_SUITE("occupancy") {
    TEST_CASE("delta center gives the body indicator") {
        const OccupancyField f = occupancy(SparsePMF::delta(kL, {3, -2}), kUnit);
        CHECK(f.size() == 121);
        for (std::size_t i = 0; i < f.size(); ++i) CHECK(f.value(i) == 1.0);
        CHECK(f.bounding_box() == IndexBox{{-2, -7}, {8, 3}});
    }

    TEST_CASE("three-center field values") {
        const OccupancyField f = occupancy(three_centers(), kUnit);
        CHECK(f.value_at({2, 0}) == doctest::Approx(0.4));
        CHECK(f.value_at({-3, 4}) == doctest::Approx(0.2));
        CHECK(f.value_at({8, -5}) == doctest::Approx(0.2));
        CHECK(f.value_at({30, 0}) == doctest::Approx(0.6));
        CHECK(f.value_at({15, 0}) == 0.0);
        CHECK(f.max_value() <= 1.0);
        CHECK(f.sum() > 1.0);  // not a probability measure
        CHECK(oracle::max_abs_diff(oracle::cells(f), oracle::occupancy_direct(three_centers(), Eigen::Vector2d(0.5, 0.5))) <= 1e-12);
    }

    TEST_CASE("three-center superlevel set at 0.3") {
        const OccupancyField f = occupancy(three_centers(), kUnit);
        const AvoidBoxSet s = superlevel(f, 0.3);
        REQUIRE(s.boxes.size() == 2);
        KeySet expected = rect(0, 5, -5, 5);
        const KeySet far = rect(25, 35, -5, 5);
        expected.insert(far.begin(), far.end());
        CHECK(covered_cells(s) == expected);
        CHECK(covered_cells(s) == threshold(oracle::occupancy_direct(three_centers(), Eigen::Vector2d(0.5, 0.5)), 0.3));
        CHECK(s.boxes[0].region.lower()[0] == doctest::Approx(-0.05));
        CHECK(s.boxes[0].region.upper()[0] == doctest::Approx(0.55));
        CHECK(s.boxes[1].region.lower()[0] == doctest::Approx(2.45));
        // The continuous intersection of the two left bodies is covered.
        CHECK(s.covers_point(Eigen::Vector2d(0.0, -0.5)));
        CHECK(s.covers_point(Eigen::Vector2d(0.5, 0.5)));
        CHECK_FALSE(s.covers_point(Eigen::Vector2d(-0.3, 0.0)));
    }

    TEST_CASE("zero threshold keeps every body") {
        const AvoidBoxSet s = superlevel(occupancy(three_centers(), kUnit), 0.0);
        KeySet expected = rect(-5, 10, -5, 5);
        const KeySet far = rect(25, 35, -5, 5);
        expected.insert(far.begin(), far.end());
        CHECK(covered_cells(s) == expected);
    }

    TEST_CASE("threshold above the maximum is empty") {
        const OccupancyField f = occupancy(three_centers(), kUnit);
        CHECK(superlevel(f, 0.61).boxes.empty());
        CHECK(superlevel(f, 0.6).boxes.size() == 1);  // ties are included
    }

    TEST_CASE("direct double sum on random instances") {
        std::mt19937_64 rng(13);
        for (int trial = 0; trial < 25; ++trial) {
            const SparsePMF p = random_pmf(rng, 1 + trial * 3, 15);
            const Eigen::Vector2d hw(0.05 + 0.1 * (trial % 7), 0.05 + 0.07 * (trial % 5));
            CHECK(oracle::max_abs_diff(oracle::cells(occupancy(p, ObstacleGeometry::box(hw))), oracle::occupancy_direct(p, hw)) <= 1e-12);
        }
    }

    TEST_CASE("indicator kernels") {
        const IndicatorKernel k{{LatticePoint{0, 0}, LatticePoint{1, 0}, LatticePoint{0, 2}}};
        std::mt19937_64 rng(2);
        const SparsePMF p = random_pmf(rng, 12, 4);
        CHECK(oracle::max_abs_diff(oracle::cells(occupancy(p, k)), oracle::occupancy_direct(p, k.cells)) <= 1e-12);
    }

    TEST_CASE("bad geometry") {
        try {
            (void)ObstacleGeometry(IndicatorKernel{});
            FAIL("expected InvalidGeometry");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::InvalidGeometry);
        }
        CHECK_THROWS_AS(ObstacleGeometry::box(Eigen::Vector2d(0.5, 0.0)), Error);
    }

    TEST_CASE("superlevel sets shrink as alpha grows") {
        std::mt19937_64 rng(21);
        const OccupancyField f = occupancy(random_pmf(rng, 40, 12), kUnit);
        KeySet prev = covered_cells(superlevel(f, 0.0));
        for (double a = 0.05; a <= 1.0; a += 0.05) {
            const KeySet cur = covered_cells(superlevel(f, a));
            CHECK(std::includes(prev.begin(), prev.end(), cur.begin(), cur.end()));
            prev = cur;
        }
    }

    TEST_CASE("decomposition is an exact disjoint cover") {
        std::mt19937_64 rng(8);
        for (int trial = 0; trial < 20; ++trial) {
            const OccupancyField f = occupancy(random_pmf(rng, 30, 10), kUnit);
            const double alpha = 0.1 + 0.04 * trial;
            const std::vector<LatticePoint> cells = superlevel_cells(f, alpha);
            const std::vector<IndexBox> boxes = decompose_boxes(cells);
            std::size_t total = 0;
            KeySet covered;
            for (const IndexBox& b : boxes) {
                total += b.cell_count();
                for (Index i = b.lower[0]; i <= b.upper[0]; ++i)
                    for (Index j = b.lower[1]; j <= b.upper[1]; ++j) covered.insert({i, j});
            }
            CHECK(total == cells.size());
            CHECK(covered == threshold(oracle::cells(f), alpha));
        }
    }

    TEST_CASE("translation equivariance") {
        std::mt19937_64 rng(17);
        const SparsePMF p = random_pmf(rng, 25, 8);
        const LatticePoint d{7, -4};
        const OccupancyField a = occupancy(p.translated(d), kUnit);
        const OccupancyField b = occupancy(p, kUnit);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a.point(i) == b.point(i) + d);
            CHECK(a.value(i) == b.value(i));
        }
        const AvoidBoxSet sa = superlevel(a, 0.2);
        const AvoidBoxSet sb = superlevel(b, 0.2).translated(d);
        REQUIRE(sa.boxes.size() == sb.boxes.size());
        for (std::size_t i = 0; i < sa.boxes.size(); ++i) {
            CHECK(sa.boxes[i].cells == sb.boxes[i].cells);
            CHECK(sa.boxes[i].region == sb.boxes[i].region);
        }
    }

    TEST_CASE("single obstacle reduces to superlevel") {
        const SparsePMF p = three_centers();
        const AvoidBoxSet multi = avoid_sets_multi({p}, kUnit, 0.3);
        const AvoidBoxSet single = superlevel(occupancy(p, kUnit), 0.3);
        REQUIRE(multi.boxes.size() == single.boxes.size());
        for (std::size_t i = 0; i < multi.boxes.size(); ++i) CHECK(multi.boxes[i].region == single.boxes[i].region);
    }

    TEST_CASE("two far-apart atoms threshold at alpha / 2") {
        const std::vector<Entries> e{{{LatticePoint{0, 0}, 0.3}, {LatticePoint{2, 0}, 0.7}},
                                     {{LatticePoint{100, 0}, 0.2}, {LatticePoint{100, 3}, 0.8}}};
        const std::vector<SparsePMF> pmfs{SparsePMF(kL, e[0]), SparsePMF(kL, e[1])};
        const AvoidBoxSet s = avoid_sets_multi(pmfs, kUnit, 0.5);
        KeySet expected;
        for (std::size_t i = 0; i < 2; ++i) {
            const KeySet part = threshold(oracle::occupancy_direct(pmfs[i], Eigen::Vector2d(0.5, 0.5)), 0.25);
            expected.insert(part.begin(), part.end());
        }
        CHECK(covered_cells(s) == expected);
        // Cells near the 0.3 atom only (phi = 0.3 >= 0.25) are included.
        CHECK(s.covers_cell({-5, 0}));
        // Cells covered only by the 0.2 atom (phi = 0.2 < 0.25) are not.
        CHECK_FALSE(s.covers_cell({100, -5}));
        std::set<int> owners;
        for (const AvoidBox& b : s.boxes) owners.insert(b.obstacle);
        CHECK(owners == std::set<int>{0, 1});
    }

    TEST_CASE("alpha range") {
        const AvoidBoxSet s = avoid_sets_multi({SparsePMF::delta(kL, {0, 0})}, kUnit, 1.0);
        CHECK(s.boxes.size() == 1);
        CHECK_THROWS_AS((void)superlevel(occupancy(SparsePMF::delta(kL, {0, 0}), kUnit), 1.5), Error);
        CHECK_THROWS_AS((void)superlevel(occupancy(SparsePMF::delta(kL, {0, 0}), kUnit), -0.1), Error);
    }

    TEST_CASE("joint occupancy examples") {
        const SparsePMF a = SparsePMF::delta(kL, {0, 0});
        const SparsePMF far = SparsePMF::delta(kL, {50, 0});
        const OccupancyField single = joint_occupancy_bruteforce({a}, kUnit);
        CHECK(oracle::max_abs_diff(oracle::cells(single), oracle::cells(occupancy(a, kUnit))) == 0.0);
        const OccupancyField disjoint = joint_occupancy_bruteforce({a, far}, kUnit);
        CHECK(disjoint.size() == 242);
        CHECK(disjoint.max_value() == 1.0);

        const SparsePMF pa(kL, Entries{{LatticePoint{0, 0}, 0.3}, {LatticePoint{40, 0}, 0.7}});
        const SparsePMF pb(kL, Entries{{LatticePoint{3, 0}, 0.6}, {LatticePoint{-40, 0}, 0.4}});
        const OccupancyField j = joint_occupancy_bruteforce({pa, pb}, kUnit);
        CHECK(j.value_at({2, 0}) == doctest::Approx(0.3 + 0.6 - 0.3 * 0.6).epsilon(1e-14));
        CHECK(j.value_at({-4, 0}) == doctest::Approx(0.3));
    }

    TEST_CASE("joint occupancy is bounded by the Boole sum and matches inclusion-exclusion") {
        std::mt19937_64 rng(31);
        for (int trial = 0; trial < 10; ++trial) {
            const SparsePMF a = random_pmf(rng, 8, 10);
            const SparsePMF b = random_pmf(rng, 8, 10);
            const oracle::Cells fa = oracle::occupancy_direct(a, Eigen::Vector2d(0.5, 0.5));
            const oracle::Cells fb = oracle::occupancy_direct(b, Eigen::Vector2d(0.5, 0.5));
            const OccupancyField j = joint_occupancy_bruteforce({a, b}, kUnit);
            for (std::size_t i = 0; i < j.size(); ++i) {
                const auto k = oracle::key(j.point(i));
                const double va = fa.contains(k) ? fa.at(k) : 0.0;
                const double vb = fb.contains(k) ? fb.at(k) : 0.0;
                CHECK(j.value(i) <= va + vb + 1e-12);
                CHECK(j.value(i) == doctest::Approx(1.0 - (1.0 - va) * (1.0 - vb)).epsilon(1e-12));
            }
        }
    }

    TEST_CASE("joint brute force refuses huge configuration spaces") {
        std::vector<SparsePMF> many;
        std::mt19937_64 rng(1);
        for (int i = 0; i < 3; ++i) many.push_back(random_pmf(rng, 150, 40));
        try {
            (void)joint_occupancy_bruteforce(many, kUnit);
            FAIL("expected TooLarge");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::TooLarge);
        }
    }
}
