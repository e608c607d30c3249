#include "frontier/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace frontier::qp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Constraints in >= 0 form, indexed 0..m-1: first the stored Afriat rows
/// (plane `other` minus plane `own`, both at X_obs), then the slope bounds.
class ConstraintSet {
public:
    explicit ConstraintSet(const QPProblem& qp)
        : qp_(qp), p_(qp.block_size()), afriat_(static_cast<Index>(qp.rows.size())),
          bounds_(static_cast<Index>(qp.K) * qp.d) {}

    Index size() const { return afriat_ + bounds_; }
    Index afriat_count() const { return afriat_; }

    Index bound_variable(Index c) const {
        const Index s = c - afriat_;
        return (s / qp_.d) * p_ + 1 + (s % qp_.d);
    }

    void normal(Index c, VectorXd& out) const {
        out.setZero();
        if (c < afriat_) {
            const AfriatRow& row = qp_.rows[static_cast<std::size_t>(c)];
            out.segment(row.other * p_, p_) = qp_.xtilde.row(row.obs).transpose();
            out.segment(row.own * p_, p_) -= qp_.xtilde.row(row.obs).transpose();
        } else {
            out(bound_variable(c)) = 1.0;
        }
    }

    /// Slacks of every constraint at beta.
    void slacks(const VectorXd& beta, VectorXd& out) const {
        out.resize(size());
        const Eigen::Map<const MatrixXd> coef(beta.data(), p_, qp_.K);  // column k = plane k
        const MatrixXd values = qp_.xtilde * coef;                       // n x K
        for (Index c = 0; c < afriat_; ++c) {
            const AfriatRow& row = qp_.rows[static_cast<std::size_t>(c)];
            out(c) = values(row.obs, row.other) - values(row.obs, row.own);
        }
        for (Index c = afriat_; c < size(); ++c) out(c) = beta(bound_variable(c));
    }

private:
    const QPProblem& qp_;
    Index p_;
    Index afriat_;
    Index bounds_;
};

/// Goldfarb-Idnani working state: J = L^{-T} Q, R upper triangular with
/// the transformed normals of the q active constraints.
struct DualActiveSet {
    MatrixXd J;
    MatrixXd R;
    Index q = 0;
    double r_norm = 1.0;
    std::vector<Index> active;
    VectorXd u;  // multipliers of active constraints

    /// Appends a constraint whose transformed normal is d = J' n. Returns
    /// false when the normal is numerically dependent on the active set.
    bool add(VectorXd& d) {
        const Index N = J.rows();
        for (Index j = N - 1; j > q; --j) {
            double cc = d(j - 1);
            double ss = d(j);
            const double h = std::hypot(cc, ss);
            if (h == 0.0) continue;
            d(j) = 0.0;
            ss /= h;
            cc /= h;
            if (cc < 0.0) {
                cc = -cc;
                ss = -ss;
                d(j - 1) = -h;
            } else {
                d(j - 1) = h;
            }
            const double xny = ss / (1.0 + cc);
            for (Index k = 0; k < N; ++k) {
                const double t1 = J(k, j - 1);
                const double t2 = J(k, j);
                J(k, j - 1) = t1 * cc + t2 * ss;
                J(k, j) = xny * (t1 + J(k, j - 1)) - t2;
            }
        }
        R.col(q).head(q + 1) = d.head(q + 1);
        ++q;
        if (std::abs(d(q - 1)) <= std::numeric_limits<double>::epsilon() * r_norm) {
            --q;
            return false;
        }
        r_norm = std::max(r_norm, std::abs(d(q - 1)));
        return true;
    }

    /// Removes the active constraint at position pos and restores R to
    /// upper-triangular form.
    void drop(Index pos) {
        const Index N = J.rows();
        for (Index i = pos; i < q - 1; ++i) {
            active[static_cast<std::size_t>(i)] = active[static_cast<std::size_t>(i + 1)];
            u(i) = u(i + 1);
            R.col(i) = R.col(i + 1);
        }
        active.pop_back();
        R.col(q - 1).setZero();
        u(q - 1) = 0.0;
        --q;
        if (q == 0) return;
        for (Index j = pos; j < q; ++j) {
            double cc = R(j, j);
            double ss = R(j + 1, j);
            const double h = std::hypot(cc, ss);
            if (h == 0.0) continue;
            cc /= h;
            ss /= h;
            R(j + 1, j) = 0.0;
            if (cc < 0.0) {
                R(j, j) = -h;
                cc = -cc;
                ss = -ss;
            } else {
                R(j, j) = h;
            }
            const double xny = ss / (1.0 + cc);
            for (Index k = j + 1; k < q; ++k) {
                const double t1 = R(j, k);
                const double t2 = R(j + 1, k);
                R(j, k) = t1 * cc + t2 * ss;
                R(j + 1, k) = xny * (t1 + R(j, k)) - t2;
            }
            for (Index k = 0; k < N; ++k) {
                const double t1 = J(k, j);
                const double t2 = J(k, j + 1);
                J(k, j) = t1 * cc + t2 * ss;
                J(k, j + 1) = xny * (J(k, j) + t1) - t2;
            }
        }
    }
};

double scaled_kkt(const KktReport& rep, const QPProblem& qp) {
    const double gscale = 1.0 + qp.g.cwiseAbs().maxCoeff();
    const double yscale = 1.0 + qp.output_scale;
    return std::max({rep.stationarity / gscale, rep.primal_infeasibility / yscale,
                     rep.complementarity / gscale, rep.dual_infeasibility / gscale});
}

}  // namespace

std::string to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::max_iter: return "max_iter";
        case SolveStatus::infeasible: return "infeasible";
    }
    return "unknown";
}

double KktReport::max() const {
    return std::max({stationarity, primal_infeasibility, complementarity, dual_infeasibility});
}

VectorXd constraint_slacks(const QPProblem& problem, const VectorXd& beta) {
    VectorXd s;
    ConstraintSet(problem).slacks(beta, s);
    return s;
}

KktReport kkt_residuals(const QPProblem& problem, const QPSolution& solution) {
    const ConstraintSet cons(problem);
    KktReport rep;
    VectorXd slack;
    cons.slacks(solution.beta, slack);
    VectorXd grad = problem.H * solution.beta + solution.ridge * solution.beta + problem.g;
    VectorXd normal(problem.num_variables());
    const bool have_multipliers = solution.multipliers.size() == cons.size();
    for (Index c = 0; c < cons.size(); ++c) {
        rep.primal_infeasibility = std::max(rep.primal_infeasibility, -slack(c));
        if (!have_multipliers) continue;
        const double lambda = solution.multipliers(c);
        if (lambda == 0.0) continue;
        cons.normal(c, normal);
        grad -= lambda * normal;
        rep.complementarity = std::max(rep.complementarity, std::abs(lambda * slack(c)));
        rep.dual_infeasibility = std::max(rep.dual_infeasibility, -lambda);
    }
    rep.stationarity = grad.cwiseAbs().maxCoeff();
    return rep;
}

QPSolution solve(const QPProblem& problem, const SolverConfig& config) {
    if (config.kkt_tolerance <= 0.0) throw std::invalid_argument("solve: kkt_tolerance must be positive");
    if (config.ridge < 0.0) throw std::invalid_argument("solve: ridge must be nonnegative");
    const Index N = problem.num_variables();
    if (problem.H.rows() != N || problem.g.size() != N)
        throw std::invalid_argument("solve: problem dimensions are inconsistent");

    const ConstraintSet cons(problem);
    const Index m = cons.size();
    const int max_iter = config.max_iterations > 0
                             ? config.max_iterations
                             : static_cast<int>(std::min<Index>(20 * (N + m) + 100, 5'000'000));
    const double violation_tol = 1e-10 * (1.0 + problem.output_scale);
    const double eps = std::numeric_limits<double>::epsilon();

    MatrixXd G = problem.H;
    G.diagonal().array() += config.ridge;
    Eigen::LLT<MatrixXd> llt(G);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("solve: Hessian is not positive definite; increase the ridge");

    DualActiveSet ws;
    ws.J = llt.matrixU().solve(MatrixXd::Identity(N, N));  // U^{-1} = L^{-T}
    ws.R = MatrixXd::Zero(N, N);
    ws.u = VectorXd::Zero(N);
    ws.active.reserve(static_cast<std::size_t>(N));

    VectorXd x = -(ws.J * (ws.J.transpose() * problem.g));
    std::vector<char> is_active(static_cast<std::size_t>(m), 0);

    VectorXd slack, np(N), d(N), z(N), r(N);
    QPSolution sol;
    sol.status = SolveStatus::optimal;
    int iter = 0;
    bool done = false;

    while (!done) {
        cons.slacks(x, slack);
        Index p = -1;
        double worst = -violation_tol;
        for (Index c = 0; c < m; ++c) {
            if (is_active[static_cast<std::size_t>(c)]) continue;
            if (slack(c) < worst) {
                worst = slack(c);
                p = c;
            }
        }
        if (p < 0) break;

        cons.normal(p, np);
        double sp = slack(p);
        double u_plus = 0.0;

        for (;;) {
            if (++iter > max_iter) {
                sol.status = SolveStatus::max_iter;
                done = true;
                break;
            }
            const Index q = ws.q;
            d.noalias() = ws.J.transpose() * np;
            z.noalias() = ws.J.rightCols(N - q) * d.tail(N - q);
            if (q > 0)
                r.head(q) = ws.R.topLeftCorner(q, q).triangularView<Eigen::Upper>().solve(d.head(q));

            // Partial step: largest dual step keeping active multipliers >= 0.
            double t1 = kInf;
            Index drop_pos = -1;
            for (Index j = 0; j < q; ++j) {
                if (r(j) > 0.0) {
                    const double ratio = ws.u(j) / r(j);
                    if (ratio < t1) {
                        t1 = ratio;
                        drop_pos = j;
                    }
                }
            }
            // Full step: makes constraint p active.
            const double zn = z.dot(np);
            const double t2 = (z.cwiseAbs().maxCoeff() > eps * 1e3 && zn > 0.0) ? -sp / zn : kInf;
            const double t = std::min(t1, t2);
            if (!std::isfinite(t)) {
                sol.status = SolveStatus::infeasible;
                done = true;
                break;
            }
            if (!std::isfinite(t2)) {
                // Dual-space step only.
                ws.u.head(q) -= t * r.head(q);
                u_plus += t;
                is_active[static_cast<std::size_t>(ws.active[static_cast<std::size_t>(drop_pos)])] = 0;
                ws.drop(drop_pos);
                continue;
            }
            x += t * z;
            ws.u.head(q) -= t * r.head(q);
            u_plus += t;
            if (t == t2) {
                d.noalias() = ws.J.transpose() * np;
                if (!ws.add(d)) {
                    sol.status = SolveStatus::infeasible;
                    done = true;
                    break;
                }
                ws.u(ws.q - 1) = u_plus;
                ws.active.push_back(p);
                is_active[static_cast<std::size_t>(p)] = 1;
                break;
            }
            is_active[static_cast<std::size_t>(ws.active[static_cast<std::size_t>(drop_pos)])] = 0;
            ws.drop(drop_pos);
            sp = np.dot(x);
        }
    }

    sol.beta = x;
    sol.iterations = iter;
    sol.ridge = config.ridge;
    sol.multipliers = VectorXd::Zero(m);
    for (Index j = 0; j < ws.q; ++j)
        sol.multipliers(ws.active[static_cast<std::size_t>(j)]) = std::max(0.0, ws.u(j));
    sol.objective = problem.objective(x);
    sol.kkt_residual = scaled_kkt(kkt_residuals(problem, sol), problem);
    if (sol.status == SolveStatus::optimal && sol.kkt_residual > config.kkt_tolerance)
        sol.status = SolveStatus::max_iter;
    return sol;
}

}  // namespace frontier::qp
