#include "fsreach/qp.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Cholesky>

#include "fsreach/error.hpp"

namespace fsreach {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kZeroTolerance = 1e-13;

// Rotation taking (a, b) to (h, 0).
struct Givens {
    double c = 1.0;
    double s = 0.0;
    double h = 0.0;
};

Givens make_givens(double a, double b) {
    const double h = std::hypot(a, b);
    if (h == 0.0) return {1.0, 0.0, 0.0};
    return {a / h, b / h, h};
}

void rotate_columns(Eigen::MatrixXd& m, Eigen::Index i, Eigen::Index j, const Givens& g) {
    for (Eigen::Index k = 0; k < m.rows(); ++k) {
        const double a = m(k, i);
        const double b = m(k, j);
        m(k, i) = g.c * a + g.s * b;
        m(k, j) = -g.s * a + g.c * b;
    }
}

class DualActiveSet {
public:
    DualActiveSet(const QpProblem& p, double tolerance) : p_(p), tol_(tolerance) {
        n_ = p.H.rows();
        m_ = p.A.rows();
        // Rows scaled to unit norm so one tolerance fits every constraint.
        normals_.resize(n_, m_);
        rhs_.resize(m_);
        row_scale_.resize(m_);
        for (Eigen::Index i = 0; i < m_; ++i) {
            const double norm = p.A.row(i).norm();
            row_scale_[i] = norm;
            if (norm > 0.0) {
                normals_.col(i) = -p.A.row(i).transpose() / norm;
                rhs_[i] = p.b[i] / norm;
            } else {
                normals_.col(i).setZero();
                rhs_[i] = p.b[i];
            }
        }
    }

    QpResult run() {
        QpResult result;
        result.multipliers = Eigen::VectorXd::Zero(m_);
        for (Eigen::Index i = 0; i < m_; ++i) {
            if (row_scale_[i] == 0.0 && rhs_[i] < -tol_) {
                result.status = QpStatus::Infeasible;
                return result;
            }
        }
        const Eigen::LLT<Eigen::MatrixXd> llt(p_.H);
        if (llt.info() != Eigen::Success) throw Error(ErrorCode::InvalidInput, "QP Hessian is not positive definite");
        // J = L^-T, so J J' = H^-1.
        J_ = llt.matrixL().solve(Eigen::MatrixXd::Identity(n_, n_)).transpose();
        R_ = Eigen::MatrixXd::Zero(n_, n_);
        x_ = -llt.solve(p_.c);
        active_.clear();
        u_.clear();

        const int max_iterations = static_cast<int>(50 * (n_ + m_) + 100);
        int iter = 0;
        while (true) {
            if (++iter > max_iterations) {
                result.status = QpStatus::NumericalFailure;
                return finish(result, iter);
            }
            // Most violated row (slack = rhs - a'x  ==  n'x + rhs with n = -a).
            Eigen::Index worst = -1;
            double worst_slack = -tol_;
            for (Eigen::Index i = 0; i < m_; ++i) {
                if (row_scale_[i] == 0.0 || is_active(i)) continue;
                const double s = slack(i);
                if (s < worst_slack) {
                    worst_slack = s;
                    worst = i;
                }
            }
            if (worst < 0) {
                result.status = QpStatus::Optimal;
                return finish(result, iter);
            }
            const Eigen::VectorXd np = normals_.col(worst);
            double u_new = 0.0;
            while (true) {
                if (++iter > max_iterations) {
                    result.status = QpStatus::NumericalFailure;
                    return finish(result, iter);
                }
                const auto q = static_cast<Eigen::Index>(active_.size());
                const Eigen::VectorXd d = J_.transpose() * np;
                const Eigen::VectorXd z = J_.rightCols(n_ - q) * d.tail(n_ - q);
                Eigen::VectorXd r(q);
                if (q > 0) {
                    r = R_.topLeftCorner(q, q).triangularView<Eigen::Upper>().solve(d.head(q));
                }
                // Partial (dual) step: first active multiplier to hit zero.
                double t1 = kInf;
                Eigen::Index drop = -1;
                for (Eigen::Index k = 0; k < q; ++k) {
                    if (r[k] > kZeroTolerance) {
                        const double ratio = u_[static_cast<std::size_t>(k)] / r[k];
                        if (ratio < t1) {
                            t1 = ratio;
                            drop = k;
                        }
                    }
                }
                // Full (primal) step: makes the new row active.
                double t2 = kInf;
                const double znp = z.dot(np);
                if (z.norm() > kZeroTolerance && znp > kZeroTolerance) t2 = -slack(worst) / znp;
                const double t = std::min(t1, t2);
                if (t == kInf) {
                    result.status = QpStatus::Infeasible;
                    return finish(result, iter);
                }
                if (t2 == kInf) {
                    for (Eigen::Index k = 0; k < q; ++k) u_[static_cast<std::size_t>(k)] -= t * r[k];
                    u_new += t;
                    remove_active(drop);
                    continue;
                }
                x_ += t * z;
                for (Eigen::Index k = 0; k < q; ++k) u_[static_cast<std::size_t>(k)] -= t * r[k];
                u_new += t;
                if (t2 <= t1) {
                    add_active(worst, d, u_new);
                    break;
                }
                remove_active(drop);
            }
        }
    }

private:
    [[nodiscard]] double slack(Eigen::Index i) const { return normals_.col(i).dot(x_) + rhs_[i]; }

    [[nodiscard]] bool is_active(Eigen::Index i) const {
        for (auto a : active_) {
            if (a == i) return true;
        }
        return false;
    }

    void add_active(Eigen::Index row, Eigen::VectorXd d, double u_new) {
        const auto q = static_cast<Eigen::Index>(active_.size());
        for (Eigen::Index j = n_ - 1; j > q; --j) {
            const Givens g = make_givens(d[j - 1], d[j]);
            if (g.h == 0.0) continue;
            d[j - 1] = g.h;
            d[j] = 0.0;
            rotate_columns(J_, j - 1, j, g);
        }
        R_.col(q).head(q + 1) = d.head(q + 1);
        active_.push_back(row);
        u_.push_back(u_new);
    }

    void remove_active(Eigen::Index k) {
        const auto q = static_cast<Eigen::Index>(active_.size());
        for (Eigen::Index j = k; j < q - 1; ++j) R_.col(j) = R_.col(j + 1);
        R_.col(q - 1).setZero();
        active_.erase(active_.begin() + k);
        u_.erase(u_.begin() + k);
        for (Eigen::Index j = k; j < q - 1; ++j) {
            const Givens g = make_givens(R_(j, j), R_(j + 1, j));
            if (g.h == 0.0) continue;
            for (Eigen::Index col = j; col < q - 1; ++col) {
                const double a = R_(j, col);
                const double b = R_(j + 1, col);
                R_(j, col) = g.c * a + g.s * b;
                R_(j + 1, col) = -g.s * a + g.c * b;
            }
            R_(j + 1, j) = 0.0;
            rotate_columns(J_, j, j + 1, g);
        }
    }

    QpResult& finish(QpResult& result, int iterations) {
        result.iterations = iterations;
        result.z = x_;
        result.objective = 0.5 * x_.dot(p_.H * x_) + p_.c.dot(x_);
        for (std::size_t k = 0; k < active_.size(); ++k) {
            const Eigen::Index row = active_[k];
            result.multipliers[row] = u_[k] / row_scale_[row];
        }
        return result;
    }

    const QpProblem& p_;
    double tol_;
    Eigen::Index n_ = 0;
    Eigen::Index m_ = 0;
    Eigen::MatrixXd normals_;
    Eigen::VectorXd rhs_;
    Eigen::VectorXd row_scale_;
    Eigen::MatrixXd J_;
    Eigen::MatrixXd R_;
    Eigen::VectorXd x_;
    std::vector<Eigen::Index> active_;
    std::vector<double> u_;
};

}  // namespace

QpResult solve_qp(const QpProblem& problem, double feasibility_tolerance) {
    const auto n = problem.H.rows();
    if (n == 0 || problem.H.cols() != n || problem.c.size() != n) {
        throw Error(ErrorCode::InvalidInput, "QP dimensions are inconsistent");
    }
    if (problem.A.rows() != problem.b.size() || (problem.A.rows() > 0 && problem.A.cols() != n)) {
        throw Error(ErrorCode::InvalidInput, "QP constraint dimensions are inconsistent");
    }
    return DualActiveSet(problem, feasibility_tolerance).run();
}

}  // namespace fsreach
