#include "fsreach/planner.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <spdlog/spdlog.h>

#include "fsreach/error.hpp"
#include "fsreach/qp.hpp"

namespace fsreach {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kProximalWeight = 1e-6;
constexpr double kSatisfiedTolerance = 1e-9;

// Interval hull of {x0 + k B u : u in U}, intersected with the workspace when they overlap.
BoxRegion reach_box(const PlanProblem& p, int k) {
    const Eigen::MatrixXd& B = p.robot.input_gain;
    const Eigen::VectorXd& lo = p.robot.input_box.lower();
    const Eigen::VectorXd& hi = p.robot.input_box.upper();
    Eigen::VectorXd rlo = p.initial_state;
    Eigen::VectorXd rhi = p.initial_state;
    for (Eigen::Index i = 0; i < B.rows(); ++i) {
        for (Eigen::Index j = 0; j < B.cols(); ++j) {
            const double a = B(i, j) * lo[j];
            const double b = B(i, j) * hi[j];
            rlo[i] += k * std::min(a, b);
            rhi[i] += k * std::max(a, b);
        }
    }
    const Eigen::VectorXd clo = rlo.cwiseMax(p.workspace.lower());
    const Eigen::VectorXd chi = rhi.cwiseMin(p.workspace.upper());
    if ((clo.array() <= chi.array()).all()) return {clo, chi};
    return {rlo, rhi};
}

// Range of p'x over a box.
std::pair<double, double> linear_range(const Eigen::VectorXd& p, const BoxRegion& box) {
    double lo = 0.0;
    double hi = 0.0;
    for (Eigen::Index j = 0; j < p.size(); ++j) {
        const double a = p[j] * box.lower()[j];
        const double b = p[j] * box.upper()[j];
        lo += std::min(a, b);
        hi += std::max(a, b);
    }
    return {lo, hi};
}

bool is_psd(const Eigen::MatrixXd& m) {
    if (!m.isApprox(m.transpose(), 1e-12)) return false;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -1e-12 * std::max(1.0, m.norm());
}

struct FaceInfo {
    std::size_t binary = 0;  // global index
    double big_m = 1.0;      // tightened over the reach box
    bool satisfiable = true;
};

struct ConstraintInfo {
    std::size_t first_binary = 0;
    bool always_satisfied = false;
    std::vector<FaceInfo> faces;
    Eigen::MatrixXd PS;  // P S_k
    Eigen::VectorXd a0;  // q + margin - P x0, so a(u) = a0 - PS u
};

class BranchAndBound {
public:
    BranchAndBound(const PlanProblem& p, const SolveOptions& o) : p_(p), opt_(o) {
        n_ = static_cast<Eigen::Index>(p.robot.state_dim());
        m_ = static_cast<Eigen::Index>(p.robot.input_dim());
        N_ = p.horizon;
        nu_ = m_ * N_;
        nz_ = p.objective == ObjectiveMode::Linear ? nu_ + n_ * N_ : nu_;
        assemble_objective();
        assemble_base_rows();
        presolve();
    }

    PlanSolution run() {
        const auto start = Clock::now();
        PlanSolution out;
        std::vector<Node> stack;
        const bool blocked = std::any_of(constraints_.begin(), constraints_.end(), [&](const ConstraintInfo& c) {
            return std::all_of(c.faces.begin(), c.faces.end(), [&](const FaceInfo& f) { return initial_fixing_[f.binary] == 1; });
        });
        if (!blocked) stack.push_back(Node{initial_fixing_, -kInf});
        bool timed_out = false;
        while (!stack.empty()) {
            if (Clock::now() - start > opt_.time_budget) {
                timed_out = true;
                break;
            }
            Node node = std::move(stack.back());
            stack.pop_back();
            if (prunable(node.bound)) continue;
            ++out.nodes;
            const QpResult r = solve_qp(node_problem(node.fix));
            if (r.status != QpStatus::Optimal) {
                if (r.status == QpStatus::NumericalFailure) spdlog::warn("planner: QP relaxation failed numerically; node dropped");
                continue;
            }
            const double objective = r.objective + constant_;
            if (prunable(objective)) continue;
            const Eigen::VectorXd u = r.z.head(nu_);

            // Pick a branching face among boxes not yet escaped.
            std::size_t branch = kNone;
            double best_score = kInf;
            double branch_delta = 0.0;
            for (const ConstraintInfo& c : constraints_) {
                if (c.always_satisfied) continue;
                const Eigen::VectorXd a = c.a0 - c.PS * u;
                bool escaped = false;
                for (std::size_t l = 0; l < c.faces.size(); ++l) {
                    const int f = node.fix[c.faces[l].binary];
                    if (f == 0 || (f < 0 && a[static_cast<Eigen::Index>(l)] <= kSatisfiedTolerance)) {
                        escaped = true;
                        break;
                    }
                }
                if (escaped) continue;
                for (std::size_t l = 0; l < c.faces.size(); ++l) {
                    const FaceInfo& face = c.faces[l];
                    if (node.fix[face.binary] >= 0) continue;
                    const double al = a[static_cast<Eigen::Index>(l)];
                    const double delta = std::clamp(al / face.big_m, 0.0, 1.0);
                    const double score = opt_.branch_rule == BranchRule::MostFractional ? std::abs(delta - 0.5) : al;
                    if (score < best_score) {
                        best_score = score;
                        branch = face.binary;
                        branch_delta = delta;
                    }
                }
            }
            if (branch == kNone) {
                incumbent_ = objective;
                out.controls.clear();
                for (Eigen::Index t = 0; t < N_; ++t) out.controls.emplace_back(u.segment(t * m_, m_));
                out.binaries = binaries_for(node.fix, u);
                continue;
            }
            Node zero{node.fix, objective};
            zero.fix[branch] = 0;
            Node one{std::move(node.fix), objective};
            one.fix[branch] = 1;
            const bool one_ok = has_open_face(one.fix, branch);
            // Depth first; the child nearer the relaxed value is explored first.
            if (branch_delta <= 0.5) {
                if (one_ok) stack.push_back(std::move(one));
                stack.push_back(std::move(zero));
            } else {
                stack.push_back(std::move(zero));
                if (one_ok) stack.push_back(std::move(one));
            }
        }
        out.solve_time = Clock::now() - start;
        if (!out.controls.empty()) {
            out.states = rollout(p_, out.controls);
            out.objective = evaluate_objective(p_, out.controls);
        }
        out.status = timed_out ? PlanStatus::Timeout : (out.controls.empty() ? PlanStatus::Infeasible : PlanStatus::Feasible);
        return out;
    }

private:
    static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

    struct Node {
        std::vector<int> fix;  // -1 free, 0 or 1 fixed
        double bound = -kInf;
    };

    [[nodiscard]] bool prunable(double bound) const {
        if (incumbent_ == kInf) return false;
        return bound >= incumbent_ - opt_.relative_gap * std::max(1.0, std::abs(incumbent_));
    }

    Eigen::MatrixXd S(int k) const {
        Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n_, nu_);
        for (int t = 0; t < k; ++t) s.middleCols(t * m_, m_) = p_.robot.input_gain;
        return s;
    }

    void assemble_objective() {
        const Eigen::VectorXd d = p_.initial_state - p_.goal;
        H_ = Eigen::MatrixXd::Zero(nz_, nz_);
        c_ = Eigen::VectorXd::Zero(nz_);
        for (Eigen::Index t = 0; t < N_; ++t) H_.block(t * m_, t * m_, m_, m_) = 2.0 * p_.cost_input;
        constant_ = 0.0;
        if (p_.objective == ObjectiveMode::Quadratic) {
            for (int k = 1; k <= N_; ++k) {
                const Eigen::MatrixXd s = S(k);
                H_.topLeftCorner(nu_, nu_) += 2.0 * s.transpose() * p_.cost_state * s;
                c_.head(nu_) += 2.0 * s.transpose() * p_.cost_state * d;
                constant_ += d.dot(p_.cost_state * d);
            }
        } else {
            const Eigen::VectorXd w = p_.cost_state.diagonal();
            for (Eigen::Index k = 0; k < N_; ++k) {
                c_.segment(nu_ + k * n_, n_) = w;
                H_.block(nu_ + k * n_, nu_ + k * n_, n_, n_) = 2.0 * kProximalWeight * Eigen::MatrixXd::Identity(n_, n_);
            }
        }
    }

    void add_row(const Eigen::RowVectorXd& row, double rhs) {
        base_rows_.push_back(row);
        base_rhs_.push_back(rhs);
    }

    void assemble_base_rows() {
        const Eigen::VectorXd& ulo = p_.robot.input_box.lower();
        const Eigen::VectorXd& uhi = p_.robot.input_box.upper();
        for (Eigen::Index t = 0; t < N_; ++t) {
            for (Eigen::Index j = 0; j < m_; ++j) {
                Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(nz_);
                r[t * m_ + j] = 1.0;
                add_row(r, uhi[j]);
                add_row(-r, -ulo[j]);
            }
        }
        const Eigen::VectorXd& x0 = p_.initial_state;
        for (int k = 1; k <= N_; ++k) {
            const Eigen::MatrixXd s = S(k);
            for (Eigen::Index i = 0; i < n_; ++i) {
                Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(nz_);
                r.head(nu_) = s.row(i);
                add_row(r, p_.workspace.upper()[i] - x0[i]);
                add_row(-r, x0[i] - p_.workspace.lower()[i]);
                if (p_.objective == ObjectiveMode::Linear) {
                    // |x_k - g|_i <= e_{k,i}
                    Eigen::RowVectorXd e = r;
                    e[nu_ + (k - 1) * n_ + i] = -1.0;
                    add_row(e, p_.goal[i] - x0[i]);
                    Eigen::RowVectorXd f = -r;
                    f[nu_ + (k - 1) * n_ + i] = -1.0;
                    add_row(f, x0[i] - p_.goal[i]);
                }
            }
        }
    }

    // Faces that cannot be satisfied anywhere in the step's reach box are fixed
    // to 1; boxes the reach box clears entirely never bind.
    void presolve() {
        std::size_t next = 0;
        for (const AvoidConstraint& ac : p_.constraints) {
            ConstraintInfo c;
            c.first_binary = next;
            const BoxRegion reach = reach_box(p_, ac.step);
            c.PS = ac.P * S(ac.step);
            c.a0 = ac.q + Eigen::VectorXd::Constant(ac.q.size(), p_.margin) - ac.P * p_.initial_state;
            for (std::size_t l = 0; l < ac.faces(); ++l) {
                const auto li = static_cast<Eigen::Index>(l);
                const auto [plo, phi] = linear_range(ac.P.row(li).transpose(), reach);
                const double amax = ac.q[li] + p_.margin - plo;
                const double amin = ac.q[li] + p_.margin - phi;
                FaceInfo f;
                f.binary = next++;
                f.satisfiable = amin <= 0.0;
                f.big_m = std::clamp(amax, 1e-9, p_.big_m);
                if (amax <= 0.0) c.always_satisfied = true;
                c.faces.push_back(f);
            }
            constraints_.push_back(std::move(c));
        }
        initial_fixing_.assign(next, -1);
        for (const ConstraintInfo& c : constraints_) {
            if (c.always_satisfied) {
                for (const FaceInfo& f : c.faces) initial_fixing_[f.binary] = 1;
                initial_fixing_[c.faces.front().binary] = 0;
                continue;
            }
            for (const FaceInfo& f : c.faces) {
                if (!f.satisfiable) initial_fixing_[f.binary] = 1;
            }
        }
    }

    [[nodiscard]] bool has_open_face(const std::vector<int>& fix, std::size_t binary) const {
        for (const ConstraintInfo& c : constraints_) {
            if (binary < c.first_binary || binary >= c.first_binary + c.faces.size()) continue;
            return std::any_of(c.faces.begin(), c.faces.end(), [&](const FaceInfo& f) { return fix[f.binary] != 1; });
        }
        return true;
    }

    QpProblem node_problem(const std::vector<int>& fix) const {
        std::vector<Eigen::RowVectorXd> rows = base_rows_;
        std::vector<double> rhs = base_rhs_;
        for (const ConstraintInfo& c : constraints_) {
            if (c.always_satisfied) continue;
            std::vector<std::size_t> free;
            bool has_zero = false;
            std::size_t ones = 0;
            for (std::size_t l = 0; l < c.faces.size(); ++l) {
                const int f = fix[c.faces[l].binary];
                const auto li = static_cast<Eigen::Index>(l);
                if (f == 0) {
                    // a_l(u) <= 0
                    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(nz_);
                    r.head(nu_) = -c.PS.row(li);
                    rows.push_back(r);
                    rhs.push_back(-c.a0[li]);
                    has_zero = true;
                } else if (f == 1) {
                    ++ones;
                } else {
                    free.push_back(l);
                }
            }
            if (has_zero || free.empty()) continue;
            // Binaries projected out: some delta in [a_l / M_l, 1] per free face
            // with sum <= n - 1 - ones exists iff every subset S of free faces has
            // sum_S a_l / M_l <= budget and each a_l <= M_l. Subsets no larger
            // than the budget are implied by the single-face rows.
            const std::size_t budget = c.faces.size() - 1 - ones;
            for (std::size_t l : free) {
                const auto li = static_cast<Eigen::Index>(l);
                Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(nz_);
                r.head(nu_) = -c.PS.row(li) / c.faces[l].big_m;
                rows.push_back(r);
                rhs.push_back(1.0 - c.a0[li] / c.faces[l].big_m);
            }
            if (free.size() <= budget) continue;
            const std::size_t count = free.size();
            for (std::size_t mask = 1; mask < (std::size_t{1} << count); ++mask) {
                if (static_cast<std::size_t>(std::popcount(mask)) <= budget) continue;
                Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(nz_);
                double b = static_cast<double>(budget);
                for (std::size_t s = 0; s < count; ++s) {
                    if ((mask >> s & 1U) == 0) continue;
                    const std::size_t l = free[s];
                    const auto li = static_cast<Eigen::Index>(l);
                    r.head(nu_) -= c.PS.row(li) / c.faces[l].big_m;
                    b -= c.a0[li] / c.faces[l].big_m;
                }
                rows.push_back(r);
                rhs.push_back(b);
            }
        }
        QpProblem qp{H_, c_, Eigen::MatrixXd(static_cast<Eigen::Index>(rows.size()), nz_),
                     Eigen::VectorXd(static_cast<Eigen::Index>(rows.size()))};
        for (std::size_t i = 0; i < rows.size(); ++i) {
            qp.A.row(static_cast<Eigen::Index>(i)) = rows[i];
            qp.b[static_cast<Eigen::Index>(i)] = rhs[i];
        }
        return qp;
    }

    // Integral delta consistent with `fix`: free faces the plan clears get 0.
    std::vector<std::vector<int>> binaries_for(const std::vector<int>& fix, const Eigen::VectorXd& u) const {
        std::vector<std::vector<int>> out;
        for (const ConstraintInfo& c : constraints_) {
            const Eigen::VectorXd a = c.a0 - c.PS * u;
            std::vector<int> d;
            for (std::size_t l = 0; l < c.faces.size(); ++l) {
                const int f = fix[c.faces[l].binary];
                if (f >= 0) {
                    d.push_back(f);
                } else {
                    d.push_back(a[static_cast<Eigen::Index>(l)] <= kSatisfiedTolerance ? 0 : 1);
                }
            }
            if (c.always_satisfied) {
                for (std::size_t l = 0; l < c.faces.size(); ++l) d[l] = a[static_cast<Eigen::Index>(l)] <= kSatisfiedTolerance ? 0 : 1;
            }
            out.push_back(std::move(d));
        }
        return out;
    }

    const PlanProblem& p_;
    SolveOptions opt_;
    Eigen::Index n_ = 0, m_ = 0, N_ = 0, nu_ = 0, nz_ = 0;
    Eigen::MatrixXd H_;
    Eigen::VectorXd c_;
    double constant_ = 0.0;
    std::vector<Eigen::RowVectorXd> base_rows_;
    std::vector<double> base_rhs_;
    std::vector<ConstraintInfo> constraints_;
    std::vector<int> initial_fixing_;
    double incumbent_ = kInf;
};

}  // namespace

AvoidConstraint box_faces(const BoxRegion& box, int step, int obstacle) {
    const auto n = static_cast<Eigen::Index>(box.dimension());
    AvoidConstraint c;
    c.step = step;
    c.obstacle = obstacle;
    c.region = box;
    c.P = Eigen::MatrixXd::Zero(2 * n, n);
    c.q.resize(2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        c.P(2 * i, i) = -1.0;
        c.q[2 * i] = -box.lower()[i];
        c.P(2 * i + 1, i) = 1.0;
        c.q[2 * i + 1] = box.upper()[i];
    }
    return c;
}

std::size_t PlanProblem::binary_count() const {
    std::size_t n = 0;
    for (const AvoidConstraint& c : constraints) n += c.faces();
    return n;
}

PlanProblem build(const PlanInputs& in) {
    const std::size_t n = in.robot.state_dim();
    const std::size_t m = in.robot.input_dim();
    const auto ni = static_cast<Eigen::Index>(n);
    const auto mi = static_cast<Eigen::Index>(m);
    if (n == 0 || m == 0) throw Error(ErrorCode::InvalidInput, "robot input_gain must be nonempty");
    if (in.robot.input_box.dimension() != m) throw Error(ErrorCode::InvalidInput, "input_box dimension must equal input_dim");
    if (in.horizon < 1) throw Error(ErrorCode::InvalidInput, "horizon must be at least 1");
    if (in.initial_state.size() != ni || in.goal.size() != ni) throw Error(ErrorCode::InvalidInput, "initial_state and goal must have state_dim entries");
    if (in.workspace.dimension() != n) throw Error(ErrorCode::InvalidInput, "workspace dimension must equal state_dim");
    if (!in.workspace.contains(in.initial_state, 1e-9)) throw Error(ErrorCode::InvalidInput, "initial_state lies outside the workspace");
    if (in.cost_state.rows() != ni || in.cost_state.cols() != ni || !is_psd(in.cost_state)) throw Error(ErrorCode::InvalidInput, "cost_state must be a symmetric PSD state_dim matrix");
    if (in.cost_input.rows() != mi || in.cost_input.cols() != mi || !in.cost_input.isApprox(in.cost_input.transpose(), 1e-12) ||
        Eigen::LLT<Eigen::MatrixXd>(in.cost_input).info() != Eigen::Success) {
        throw Error(ErrorCode::InvalidInput, "cost_input must be a symmetric positive definite input_dim matrix");
    }
    if (!(in.margin > 0.0) || !std::isfinite(in.margin)) throw Error(ErrorCode::InvalidInput, "margin must be positive");
    if (in.avoid.size() > static_cast<std::size_t>(in.horizon)) throw Error(ErrorCode::InvalidInput, "more avoid sets than horizon steps");

    PlanProblem p;
    p.robot = in.robot;
    p.initial_state = in.initial_state;
    p.goal = in.goal;
    p.horizon = in.horizon;
    p.cost_state = in.cost_state;
    p.cost_input = in.cost_input;
    p.margin = in.margin;
    p.workspace = in.workspace;
    p.objective = in.objective;

    for (std::size_t s = 0; s < in.avoid.size(); ++s) {
        const int step = static_cast<int>(s) + 1;
        for (const AvoidBox& box : in.avoid[s].boxes) {
            if (box.region.dimension() != n) throw Error(ErrorCode::InvalidInput, "avoid box dimension must equal state_dim");
            if (!box.region.has_interior()) {
                spdlog::warn("planner: dropping avoid box with empty interior at step {}", step);
                ++p.dropped_boxes;
                continue;
            }
            if (in.drop_unreachable) {
                const BoxRegion reach = reach_box(p, step);
                const BoxRegion grown(box.region.lower().array() - in.margin, box.region.upper().array() + in.margin);
                if (!grown.intersects(reach)) {
                    ++p.dropped_boxes;
                    continue;
                }
            }
            p.constraints.push_back(box_faces(box.region, step, box.obstacle));
        }
    }

    double max_p = 0.0;
    double max_q = 0.0;
    for (const AvoidConstraint& c : p.constraints) {
        max_p = std::max(max_p, c.P.rowwise().norm().maxCoeff());
        max_q = std::max(max_q, c.q.cwiseAbs().maxCoeff());
    }
    p.big_m = in.big_m ? *in.big_m : (p.constraints.empty() ? 1.0 : 2.0 * in.workspace.diameter() * max_p + max_q);
    if (!(p.big_m > 0.0) || !std::isfinite(p.big_m)) throw Error(ErrorCode::BadBigM, "big_m must be positive and finite");
    // delta = 1 must leave each row slack everywhere in the workspace.
    for (const AvoidConstraint& c : p.constraints) {
        for (Eigen::Index l = 0; l < c.q.size(); ++l) {
            const auto [lo, hi] = linear_range(c.P.row(l).transpose(), in.workspace);
            const double worst = std::max(std::abs(lo - c.q[l]), std::abs(hi - c.q[l])) + in.margin;
            if (!(worst < p.big_m)) {
                throw Error(ErrorCode::BadBigM, "big_m " + std::to_string(p.big_m) + " does not dominate face value " +
                                                    std::to_string(worst) + " at step " + std::to_string(c.step));
            }
        }
    }
    return p;
}

PlanSolution solve(const PlanProblem& problem, const SolveOptions& options) {
    return BranchAndBound(problem, options).run();
}

std::vector<Eigen::VectorXd> rollout(const PlanProblem& problem, const std::vector<Eigen::VectorXd>& controls) {
    std::vector<Eigen::VectorXd> states{problem.initial_state};
    for (const Eigen::VectorXd& u : controls) states.push_back(states.back() + problem.robot.input_gain * u);
    return states;
}

double evaluate_objective(const PlanProblem& problem, const std::vector<Eigen::VectorXd>& controls) {
    const std::vector<Eigen::VectorXd> states = rollout(problem, controls);
    double j = 0.0;
    for (const Eigen::VectorXd& u : controls) j += u.dot(problem.cost_input * u);
    for (std::size_t k = 1; k < states.size(); ++k) {
        const Eigen::VectorXd d = states[k] - problem.goal;
        if (problem.objective == ObjectiveMode::Quadratic) {
            j += d.dot(problem.cost_state * d);
        } else {
            j += problem.cost_state.diagonal().dot(d.cwiseAbs()) + kProximalWeight * d.squaredNorm();
        }
    }
    return j;
}

double certificate_violation(const PlanProblem& problem, const PlanSolution& solution) {
    if (!solution.has_plan()) return kInf;
    const auto N = static_cast<std::size_t>(problem.horizon);
    if (solution.controls.size() != N || solution.states.size() != N + 1 ||
        solution.binaries.size() != problem.constraints.size()) {
        return kInf;
    }
    double worst = -kInf;
    worst = std::max(worst, (solution.states[0] - problem.initial_state).cwiseAbs().maxCoeff());
    for (std::size_t t = 0; t < N; ++t) {
        const Eigen::VectorXd& u = solution.controls[t];
        const Eigen::VectorXd next = solution.states[t] + problem.robot.input_gain * u;
        worst = std::max(worst, (solution.states[t + 1] - next).cwiseAbs().maxCoeff());
        worst = std::max(worst, (u - problem.robot.input_box.upper()).maxCoeff());
        worst = std::max(worst, (problem.robot.input_box.lower() - u).maxCoeff());
        const Eigen::VectorXd& x = solution.states[t + 1];
        worst = std::max(worst, (x - problem.workspace.upper()).maxCoeff());
        worst = std::max(worst, (problem.workspace.lower() - x).maxCoeff());
    }
    for (std::size_t i = 0; i < problem.constraints.size(); ++i) {
        const AvoidConstraint& c = problem.constraints[i];
        const std::vector<int>& d = solution.binaries[i];
        if (d.size() != c.faces()) return kInf;
        const Eigen::VectorXd& x = solution.states[static_cast<std::size_t>(c.step)];
        int sum = 0;
        for (std::size_t l = 0; l < c.faces(); ++l) {
            if (d[l] != 0 && d[l] != 1) return kInf;
            sum += d[l];
            const auto li = static_cast<Eigen::Index>(l);
            // -p'x <= -q - margin + M delta
            worst = std::max(worst, -c.P.row(li).dot(x) + c.q[li] + problem.margin - problem.big_m * d[l]);
        }
        worst = std::max(worst, static_cast<double>(sum) - static_cast<double>(c.faces() - 1));
    }
    return worst;
}

}  // namespace fsreach
