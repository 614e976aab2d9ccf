#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <Eigen/Dense>

namespace oracle {

using fsreach::LatticePoint;
using fsreach::SparsePMF;

std::vector<std::int64_t> key(const LatticePoint& p) { return {p.begin(), p.end()}; }

Cells cells(const fsreach::SparseGrid& g) {
    Cells out;
    for (std::size_t i = 0; i < g.size(); ++i) out[key(g.point(i))] = g.value(i);
    return out;
}

Cells convolve(const SparsePMF& a, const SparsePMF& b) {
    Cells out;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            std::vector<std::int64_t> k = key(a.point(i));
            for (std::size_t d = 0; d < k.size(); ++d) k[d] += b.point(j)[d];
            out[k] += a.mass(i) * b.mass(j);
        }
    }
    return out;
}

double max_abs_diff(const Cells& a, const Cells& b) {
    double d = 0.0;
    for (const auto& [k, v] : a) {
        const auto it = b.find(k);
        d = std::max(d, std::abs(v - (it == b.end() ? 0.0 : it->second)));
    }
    for (const auto& [k, v] : b) {
        if (!a.contains(k)) d = std::max(d, std::abs(v));
    }
    return d;
}

std::vector<std::vector<std::int64_t>> interval_cells(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, double resolution) {
    std::vector<std::vector<std::int64_t>> out{{}};
    for (Eigen::Index d = 0; d < lo.size(); ++d) {
        const auto first = static_cast<std::int64_t>(std::ceil(lo[d] / resolution - 1e-9));
        const auto last = static_cast<std::int64_t>(std::floor(hi[d] / resolution + 1e-9));
        std::vector<std::vector<std::int64_t>> next;
        for (const auto& prefix : out) {
            for (std::int64_t i = first; i <= last; ++i) {
                auto p = prefix;
                p.push_back(i);
                next.push_back(std::move(p));
            }
        }
        out = std::move(next);
    }
    return out;
}

namespace {

template <class Covers>
Cells occupancy_loop(const SparsePMF& pmf, std::int64_t reach, Covers covers) {
    const auto n = pmf.dimension();
    std::vector<std::int64_t> lo(n, std::numeric_limits<std::int64_t>::max());
    std::vector<std::int64_t> hi(n, std::numeric_limits<std::int64_t>::min());
    for (const LatticePoint& p : pmf.support()) {
        for (std::size_t d = 0; d < n; ++d) {
            lo[d] = std::min(lo[d], p[d] - reach);
            hi[d] = std::max(hi[d], p[d] + reach);
        }
    }
    Cells out;
    std::vector<std::int64_t> y = lo;
    while (true) {
        double phi = 0.0;
        for (std::size_t i = 0; i < pmf.size(); ++i) {
            if (covers(y, pmf.point(i))) phi += pmf.mass(i);
        }
        if (phi > 0.0) out[y] = phi;
        std::size_t d = 0;
        while (d < n && ++y[d] > hi[d]) {
            y[d] = lo[d];
            ++d;
        }
        if (d == n) break;
    }
    return out;
}

}  // namespace

Cells occupancy_direct(const SparsePMF& pmf, const Eigen::VectorXd& half_widths) {
    const Eigen::VectorXd res = pmf.lattice().resolution();
    std::int64_t reach = 0;
    for (Eigen::Index d = 0; d < half_widths.size(); ++d) {
        reach = std::max(reach, static_cast<std::int64_t>(std::ceil(half_widths[d] / res[d])) + 1);
    }
    return occupancy_loop(pmf, reach, [&](const std::vector<std::int64_t>& y, const LatticePoint& z) {
        for (std::size_t d = 0; d < y.size(); ++d) {
            const auto a = static_cast<Eigen::Index>(d);
            if (std::abs(static_cast<double>(y[d] - z[d]) * res[a]) > half_widths[a] + 1e-9) return false;
        }
        return true;
    });
}

Cells occupancy_direct(const SparsePMF& pmf, const std::vector<LatticePoint>& kernel) {
    std::int64_t reach = 0;
    for (const LatticePoint& k : kernel) {
        for (std::int64_t v : k) reach = std::max(reach, std::abs(v));
    }
    return occupancy_loop(pmf, reach, [&](const std::vector<std::int64_t>& y, const LatticePoint& z) {
        return std::any_of(kernel.begin(), kernel.end(), [&](const LatticePoint& k) {
            for (std::size_t d = 0; d < y.size(); ++d) {
                if (y[d] - z[d] != k[d]) return false;
            }
            return true;
        });
    });
}

Cells joint_occupancy_enumerated(const SparsePMF& a, const SparsePMF& b, const Eigen::VectorXd& half_widths) {
    const Eigen::VectorXd res = a.lattice().resolution();
    const auto r0 = static_cast<std::int64_t>(std::ceil(half_widths[0] / res[0])) + 1;
    const auto r1 = static_cast<std::int64_t>(std::ceil(half_widths[1] / res[1])) + 1;
    auto body = [&](const LatticePoint& z, std::set<std::vector<std::int64_t>>& out) {
        for (std::int64_t i = z[0] - r0; i <= z[0] + r0; ++i) {
            for (std::int64_t j = z[1] - r1; j <= z[1] + r1; ++j) {
                if (std::abs(static_cast<double>(i - z[0]) * res[0]) <= half_widths[0] + 1e-9 &&
                    std::abs(static_cast<double>(j - z[1]) * res[1]) <= half_widths[1] + 1e-9)
                    out.insert({i, j});
            }
        }
    };
    Cells out;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            std::set<std::vector<std::int64_t>> covered;
            body(a.point(i), covered);
            body(b.point(j), covered);
            const double w = a.mass(i) * b.mass(j);
            for (const auto& y : covered) out[y] += w;
        }
    }
    return out;
}

KktResult qp_by_enumeration(const fsreach::QpProblem& p, double tol) {
    const Eigen::Index n = p.H.rows();
    const Eigen::Index m = p.A.rows();
    KktResult best;
    best.objective = std::numeric_limits<double>::infinity();
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
        std::vector<Eigen::Index> act;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (mask >> i & 1U) act.push_back(i);
        }
        const auto k = static_cast<Eigen::Index>(act.size());
        if (k > n) continue;
        // [H A_w'; A_w 0] [z; lambda] = [-c; b_w]
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + k, n + k);
        Eigen::VectorXd r(n + k);
        K.topLeftCorner(n, n) = p.H;
        r.head(n) = -p.c;
        for (Eigen::Index j = 0; j < k; ++j) {
            K.block(0, n + j, n, 1) = p.A.row(act[j]).transpose();
            K.block(n + j, 0, 1, n) = p.A.row(act[j]);
            r[n + j] = p.b[act[j]];
        }
        const Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
        if (!lu.isInvertible()) continue;
        const Eigen::VectorXd s = lu.solve(r);
        const Eigen::VectorXd z = s.head(n);
        if ((s.tail(k).array() < -tol).any()) continue;
        if (((p.A * z - p.b).array() > tol).any()) continue;
        const double obj = 0.5 * z.dot(p.H * z) + p.c.dot(z);
        if (obj < best.objective) {
            best.feasible = true;
            best.objective = obj;
            best.z = z;
        }
    }
    return best;
}

EnumerationResult miqp_by_enumeration(const fsreach::PlanProblem& p) {
    const auto n = static_cast<Eigen::Index>(p.robot.state_dim());
    const auto m = static_cast<Eigen::Index>(p.robot.input_dim());
    const Eigen::Index N = p.horizon;
    const Eigen::Index nu = m * N;
    const bool linear = p.objective == fsreach::ObjectiveMode::Linear;
    const Eigen::Index nz = linear ? nu + n * N : nu;
    const double eta = 1e-6;

    // x_k = x0 + G_k u with G_k = [B .. B 0 ..].
    auto G = [&](Eigen::Index k) {
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, nu);
        for (Eigen::Index t = 0; t < k; ++t) g.block(0, t * m, n, m) = p.robot.input_gain;
        return g;
    };
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(nz, nz);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(nz);
    double constant = 0.0;
    const Eigen::VectorXd d0 = p.initial_state - p.goal;
    for (Eigen::Index t = 0; t < N; ++t) H.block(t * m, t * m, m, m) += 2.0 * p.cost_input;
    for (Eigen::Index k = 1; k <= N; ++k) {
        const Eigen::MatrixXd g = G(k);
        if (!linear) {
            H.topLeftCorner(nu, nu) += 2.0 * g.transpose() * p.cost_state * g;
            c.head(nu) += 2.0 * g.transpose() * p.cost_state * d0;
            constant += d0.dot(p.cost_state * d0);
        } else {
            H.block(nu + (k - 1) * n, nu + (k - 1) * n, n, n) += 2.0 * eta * Eigen::MatrixXd::Identity(n, n);
            c.segment(nu + (k - 1) * n, n) = p.cost_state.diagonal();
        }
    }

    std::vector<Eigen::RowVectorXd> rows;
    std::vector<double> rhs;
    auto push = [&](Eigen::RowVectorXd r, double b) {
        rows.push_back(std::move(r));
        rhs.push_back(b);
    };
    for (Eigen::Index t = 0; t < N; ++t) {
        for (Eigen::Index j = 0; j < m; ++j) {
            Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(nz);
            r[t * m + j] = 1.0;
            push(r, p.robot.input_box.upper()[j]);
            push(-r, -p.robot.input_box.lower()[j]);
        }
    }
    for (Eigen::Index k = 1; k <= N; ++k) {
        const Eigen::MatrixXd g = G(k);
        for (Eigen::Index i = 0; i < n; ++i) {
            Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(nz);
            r.head(nu) = g.row(i);
            push(r, p.workspace.upper()[i] - p.initial_state[i]);
            push(-r, p.initial_state[i] - p.workspace.lower()[i]);
            if (linear) {
                Eigen::RowVectorXd e = r;
                e[nu + (k - 1) * n + i] = -1.0;
                push(e, p.goal[i] - p.initial_state[i]);
                Eigen::RowVectorXd f = -r;
                f[nu + (k - 1) * n + i] = -1.0;
                push(f, p.initial_state[i] - p.goal[i]);
            }
        }
    }
    const std::size_t base = rows.size();

    std::size_t total = 0;
    for (const auto& con : p.constraints) total += con.faces();
    EnumerationResult best;
    best.objective = std::numeric_limits<double>::infinity();
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << total); ++mask) {
        rows.resize(base);
        rhs.resize(base);
        bool valid = true;
        std::size_t bit = 0;
        for (const auto& con : p.constraints) {
            std::size_t ones = 0;
            for (std::size_t l = 0; l < con.faces(); ++l, ++bit) {
                const int delta = static_cast<int>(mask >> bit & 1U);
                ones += static_cast<std::size_t>(delta);
                const auto li = static_cast<Eigen::Index>(l);
                // -p'x <= -q - margin + M delta
                Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(nz);
                r.head(nu) = -con.P.row(li) * G(con.step);
                push(r, -con.q[li] - p.margin + p.big_m * delta + con.P.row(li).dot(p.initial_state));
            }
            if (ones > con.faces() - 1) valid = false;
        }
        if (!valid) continue;
        ++best.assignments;
        fsreach::QpProblem qp{H, c, Eigen::MatrixXd(static_cast<Eigen::Index>(rows.size()), nz),
                              Eigen::VectorXd(static_cast<Eigen::Index>(rows.size()))};
        for (std::size_t i = 0; i < rows.size(); ++i) {
            qp.A.row(static_cast<Eigen::Index>(i)) = rows[i];
            qp.b[static_cast<Eigen::Index>(i)] = rhs[i];
        }
        const fsreach::QpResult r = fsreach::solve_qp(qp);
        if (r.status != fsreach::QpStatus::Optimal) continue;
        const double obj = r.objective + constant;
        if (obj < best.objective) {
            best.feasible = true;
            best.objective = obj;
            best.controls.clear();
            for (Eigen::Index t = 0; t < N; ++t) best.controls.emplace_back(r.z.segment(t * m, m));
        }
    }
    return best;
}

Eigen::VectorXd uniform_vector(std::mt19937_64& rng, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    Eigen::VectorXd v(lo.size());
    for (Eigen::Index i = 0; i < lo.size(); ++i) v[i] = std::uniform_real_distribution<double>(lo[i], hi[i])(rng);
    return v;
}

}  // namespace oracle
