#include "frontier/qp.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace frontier::qp {

namespace {

MatrixXd augmented_inputs(const Dataset& data) {
    MatrixXd xt(data.size(), data.dims() + 1);
    xt.col(0).setOnes();
    xt.rightCols(data.dims()) = data.inputs();
    return xt;
}

}  // namespace

MatrixXd QPProblem::dense_constraints() const {
    MatrixXd dense = MatrixXd::Zero(logical_rows(), num_variables());
    for (Index r = 0; r < A.outerSize(); ++r) {
        const AfriatRow& label = rows[static_cast<std::size_t>(r)];
        const Index logical = label.obs * K + label.other;
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(A, r); it; ++it)
            dense(logical, it.col()) = it.value();
    }
    return dense;
}

double QPProblem::objective(const VectorXd& beta) const {
    return 0.5 * beta.dot(H * beta) + g.dot(beta);
}

QPProblem assemble_qp(const Dataset& data, const Partition& partition) {
    partition.validate(data.size());
    QPProblem qp;
    qp.n = data.size();
    qp.d = data.dims();
    qp.K = partition.regions;
    qp.xtilde = augmented_inputs(data);
    qp.assignment = partition.assignment;
    qp.output_scale = std::max(1.0, data.outputs().cwiseAbs().maxCoeff());

    const Index p = qp.block_size();
    const Index N = qp.num_variables();
    qp.H = MatrixXd::Zero(N, N);
    qp.g = VectorXd::Zero(N);
    for (Index i = 0; i < qp.n; ++i) {
        const Index off = partition.assignment[static_cast<std::size_t>(i)] * p;
        const auto x = qp.xtilde.row(i).transpose();
        qp.H.block(off, off, p, p).noalias() += x * x.transpose();
        qp.g.segment(off, p) -= x * data.outputs()(i);
    }

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(qp.n * (qp.K - 1) * 2 * p));
    for (Index i = 0; i < qp.n; ++i) {
        const int own = partition.assignment[static_cast<std::size_t>(i)];
        for (int k = 0; k < qp.K; ++k) {
            if (k == own) continue;
            const auto r = static_cast<Index>(qp.rows.size());
            qp.rows.push_back(AfriatRow{i, own, k});
            for (Index j = 0; j < p; ++j) {
                triplets.emplace_back(r, own * p + j, qp.xtilde(i, j));
                triplets.emplace_back(r, k * p + j, -qp.xtilde(i, j));
            }
        }
    }
    qp.A.resize(static_cast<Index>(qp.rows.size()), N);
    qp.A.setFromTriplets(triplets.begin(), triplets.end());

    qp.l = VectorXd::Zero(N);
    for (int k = 0; k < qp.K; ++k) qp.l(k * p) = -std::numeric_limits<double>::infinity();
    return qp;
}

QPProblem assemble_cnls_qp(const Dataset& data) {
    if (data.size() < 2) throw std::invalid_argument("assemble_cnls_qp: need at least two observations");
    return assemble_qp(data, Partition::identity(data.size()));
}

PiecewiseLinearModel to_model(const QPProblem& problem, const VectorXd& beta,
                              const Dataset& data, const Partition& partition) {
    if (beta.size() != problem.num_variables()) throw std::invalid_argument("to_model: wrong solution length");
    PiecewiseLinearModel model;
    const Index p = problem.block_size();
    for (int k = 0; k < problem.K; ++k) {
        Hyperplane plane;
        plane.intercept = beta(k * p);
        // Bound-active slopes can sit a rounding error below zero.
        plane.slopes = beta.segment(k * p + 1, problem.d).cwiseMax(0.0);
        model.hyperplanes.push_back(std::move(plane));
    }
    model.partition = partition;
    model.learning_mse = mean_squared_error(evaluate_in_sample(model, data), data.outputs());
    return model;
}

void write_dump(std::ostream& os, const QPProblem& problem) {
    const auto old_precision = os.precision();
    os << std::setprecision(17);
    os << "n " << problem.n << "\nd " << problem.d << "\nK " << problem.K << "\n";
    const Index N = problem.num_variables();
    os << "H " << N << " " << N << "\n";
    for (Index r = 0; r < N; ++r) {
        for (Index c = 0; c < N; ++c) os << (c ? " " : "") << problem.H(r, c);
        os << "\n";
    }
    os << "g " << N << "\n";
    for (Index r = 0; r < N; ++r) os << problem.g(r) << "\n";
    os << "A " << problem.logical_rows() << " " << N << " " << problem.A.nonZeros() << "\n";
    for (Index r = 0; r < problem.A.outerSize(); ++r) {
        const AfriatRow& label = problem.rows[static_cast<std::size_t>(r)];
        const Index logical = label.obs * problem.K + label.other;
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(problem.A, r); it; ++it)
            os << logical << " " << it.col() << " " << it.value() << "\n";
    }
    os << "l " << N << "\n";
    for (Index r = 0; r < N; ++r) {
        if (std::isinf(problem.l(r))) os << "-inf\n";
        else os << problem.l(r) << "\n";
    }
    os.precision(old_precision);
}

}  // namespace frontier::qp
