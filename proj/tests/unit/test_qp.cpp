#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "fsreach/qp.hpp"
#include "oracles.hpp"

using namespace fsreach;

namespace {

QpProblem random_qp(std::mt19937_64& rng, int n, int m) {
    std::normal_distribution<double> g;
    QpProblem p;
    Eigen::MatrixXd L(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) L(i, j) = g(rng);
    p.H = L * L.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);
    p.c.resize(n);
    for (int i = 0; i < n; ++i) p.c[i] = 3.0 * g(rng);
    p.A.resize(m, n);
    p.b.resize(m);
    for (int r = 0; r < m; ++r) {
        for (int j = 0; j < n; ++j) p.A(r, j) = g(rng);
        p.b[r] = g(rng);
    }
    return p;
}

}  // namespace

TEST_SUITE("qp") {
    TEST_CASE("unconstrained minimum") {
        QpProblem p;
        p.H = Eigen::Matrix2d{{2, 0}, {0, 4}};
        p.c = Eigen::Vector2d(-2, 4);
        p.A.resize(0, 2);
        p.b.resize(0);
        const QpResult r = solve_qp(p);
        REQUIRE(r.status == QpStatus::Optimal);
        CHECK(r.z[0] == doctest::Approx(1.0));
        CHECK(r.z[1] == doctest::Approx(-1.0));
        CHECK(r.objective == doctest::Approx(-3.0));
    }

    TEST_CASE("projection onto a half-plane") {
        QpProblem p;
        p.H = Eigen::Matrix2d::Identity();
        p.c = Eigen::Vector2d(-2, -2);  // target (2, 2)
        p.A = Eigen::RowVector2d(1, 1);
        p.b = Eigen::VectorXd::Constant(1, 2.0);
        const QpResult r = solve_qp(p);
        REQUIRE(r.status == QpStatus::Optimal);
        CHECK(r.z[0] == doctest::Approx(1.0));
        CHECK(r.z[1] == doctest::Approx(1.0));
        CHECK(r.multipliers[0] == doctest::Approx(1.0));
    }

    TEST_CASE("contradictory rows are infeasible") {
        QpProblem p;
        p.H = Eigen::Matrix2d::Identity();
        p.c = Eigen::Vector2d::Zero();
        p.A = Eigen::Matrix2d{{1, 0}, {-1, 0}};
        p.b = Eigen::Vector2d(-1, -1);
        CHECK(solve_qp(p).status == QpStatus::Infeasible);
    }

    TEST_CASE("agrees with active-set enumeration") {
        std::mt19937_64 rng(99);
        int feasible = 0;
        for (int trial = 0; trial < 300; ++trial) {
            const int n = 1 + trial % 4;
            const int m = trial % 11;
            const QpProblem p = random_qp(rng, n, m);
            const QpResult r = solve_qp(p);
            const oracle::KktResult e = oracle::qp_by_enumeration(p);
            CAPTURE(trial);
            REQUIRE(e.feasible == (r.status == QpStatus::Optimal));
            if (!e.feasible) continue;
            ++feasible;
            CHECK(r.objective == doctest::Approx(e.objective).epsilon(1e-7));
            CHECK((r.z - e.z).lpNorm<Eigen::Infinity>() <= 1e-6);
            if (m > 0) {
                CHECK((p.A * r.z - p.b).maxCoeff() <= 1e-8);
                CHECK(r.multipliers.minCoeff() >= -1e-10);
                // Stationarity and complementary slackness.
                const Eigen::VectorXd grad = p.H * r.z + p.c + p.A.transpose() * r.multipliers;
                CHECK(grad.lpNorm<Eigen::Infinity>() <= 1e-7);
                CHECK(std::abs(r.multipliers.dot(p.A * r.z - p.b)) <= 1e-7);
            }
        }
        CHECK(feasible > 150);
    }

    TEST_CASE("deterministic") {
        std::mt19937_64 rng(4);
        const QpProblem p = random_qp(rng, 4, 10);
        const QpResult a = solve_qp(p);
        const QpResult b = solve_qp(p);
        CHECK(a.status == b.status);
        CHECK(a.iterations == b.iterations);
        CHECK(a.z == b.z);
    }
}
