#ifndef FRONTIER_QP_HPP
#define FRONTIER_QP_HPP

#include "frontier/core.hpp"

#include <Eigen/Sparse>

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace frontier::qp {

/// One stored Afriat row: the fitted value of observation `obs` (taken
/// from its own region's plane) may not exceed plane `other` at X_obs.
struct AfriatRow {
    Index obs = 0;
    int own = 0;
    int other = 0;
};

/// Block-structured concave least-squares QP
///
///     min  1/2 b'Hb + g'b   s.t.  A b <= 0,  b >= l
///
/// over the stacked plane coefficients b = (b_1, ..., b_K), b_k = (intercept, slopes).
/// A logically has n*K rows; the n rows pairing an observation with its own
/// plane vanish identically and are not stored.
struct QPProblem {
    Index n = 0;
    Index d = 0;
    int K = 0;
    MatrixXd H;
    VectorXd g;
    Eigen::SparseMatrix<double, Eigen::RowMajor> A;
    std::vector<AfriatRow> rows;  // label of each stored row of A
    VectorXd l;

    MatrixXd xtilde;              // n x (d+1), rows (1, X_i)
    std::vector<int> assignment;  // copy of the partition labels
    double output_scale = 1.0;    // max |Y_i|, scales feasibility tolerances

    Index block_size() const { return d + 1; }
    Index num_variables() const { return K * (d + 1); }
    Index logical_rows() const { return n * K; }

    /// Full nK x K(d+1) constraint matrix including the zero rows; row
    /// index K*i + k.
    MatrixXd dense_constraints() const;

    /// 1/2 b'Hb + g'b (the least-squares objective without sum Y^2 / 2).
    double objective(const VectorXd& beta) const;
};

QPProblem assemble_qp(const Dataset& data, const Partition& partition);

/// CNLS: one region per observation.
QPProblem assemble_cnls_qp(const Dataset& data);

struct SolverConfig {
    double kkt_tolerance = 1e-6;
    int max_iterations = 0;  // 0 selects a size-based limit
    double ridge = 1e-8;
};

enum class SolveStatus { optimal, max_iter, infeasible };

/// Raised by callers that require an optimal solve.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string to_string(SolveStatus status);

struct QPSolution {
    VectorXd beta;
    /// Multipliers in constraint order: stored Afriat rows, then the K*d
    /// slope bounds (block-major).
    VectorXd multipliers;
    double objective = 0.0;
    double kkt_residual = 0.0;
    SolveStatus status = SolveStatus::optimal;
    int iterations = 0;
    double ridge = 0.0;  // diagonal term the solution is optimal for
};

/// Dual active-set (Goldfarb-Idnani) solve of the ridged problem.
QPSolution solve(const QPProblem& problem, const SolverConfig& config = {});

struct KktReport {
    double stationarity = 0.0;          // ||H b + g - grad of active constraints||_inf
    double primal_infeasibility = 0.0;  // max constraint violation
    double complementarity = 0.0;       // max |lambda_j * slack_j|
    double dual_infeasibility = 0.0;    // max(-lambda_j, 0)

    double max() const;
};

/// Residuals of the problem actually solved (H plus solution.ridge on the
/// diagonal), using the solution's multipliers. A hand-built solution with
/// ridge 0 is checked against H itself.
KktReport kkt_residuals(const QPProblem& problem, const QPSolution& solution);

/// Constraint slacks in multiplier order; feasible iff all >= 0.
VectorXd constraint_slacks(const QPProblem& problem, const VectorXd& beta);

/// Reshape the stacked solution into a model over the problem's partition.
PiecewiseLinearModel to_model(const QPProblem& problem, const VectorXd& beta,
                              const Dataset& data, const Partition& partition);

/// Text dump: n d K, dense H, g, A triplets (logical row indices), l.
void write_dump(std::ostream& os, const QPProblem& problem);

}  // namespace frontier::qp

#endif  // FRONTIER_QP_HPP
