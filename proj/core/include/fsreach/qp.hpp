#pragma once

#include <Eigen/Core>

namespace fsreach {

/// minimize 1/2 z'Hz + c'z  subject to  A z <= b, with H positive definite.
struct QpProblem {
    Eigen::MatrixXd H;
    Eigen::VectorXd c;
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
};

enum class QpStatus { Optimal, Infeasible, NumericalFailure };

struct QpResult {
    QpStatus status = QpStatus::NumericalFailure;
    Eigen::VectorXd z;
    double objective = 0.0;
    /// Multipliers for every row of A (zero for inactive rows).
    Eigen::VectorXd multipliers;
    int iterations = 0;
};

/// Dual active-set method of Goldfarb and Idnani. Starts from the
/// unconstrained minimum and adds the most violated row each iteration, so the
/// pivot sequence (and result) is deterministic.
[[nodiscard]] QpResult solve_qp(const QpProblem& problem, double feasibility_tolerance = 1e-9);

}  // namespace fsreach
