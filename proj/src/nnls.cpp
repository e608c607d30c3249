#include "frontier/nnls.hpp"

#include <limits>
#include <stdexcept>
#include <vector>

namespace frontier {

namespace {

// Minimum-norm least squares restricted to the passive columns.
VectorXd passive_solve(const MatrixXd& x, const VectorXd& y, const std::vector<Index>& passive) {
    MatrixXd sub(x.rows(), static_cast<Index>(passive.size()));
    for (std::size_t j = 0; j < passive.size(); ++j) sub.col(static_cast<Index>(j)) = x.col(passive[j]);
    return sub.completeOrthogonalDecomposition().solve(y);
}

}  // namespace

VectorXd nnls(const MatrixXd& x, const VectorXd& y, int max_iterations) {
    if (x.rows() != y.size()) throw std::invalid_argument("nnls: dimension mismatch");
    const Index p = x.cols();
    if (max_iterations <= 0) max_iterations = static_cast<int>(30 * p + 30);
    VectorXd b = VectorXd::Zero(p);
    std::vector<char> in_passive(static_cast<std::size_t>(p), 0);
    const double tol = 10.0 * std::numeric_limits<double>::epsilon() *
                       (1.0 + x.cwiseAbs().maxCoeff()) * (1.0 + y.cwiseAbs().sum()) * static_cast<double>(p);

    for (int outer = 0; outer < max_iterations; ++outer) {
        const VectorXd w = x.transpose() * (y - x * b);
        Index enter = -1;
        double best = tol;
        for (Index j = 0; j < p; ++j) {
            if (!in_passive[static_cast<std::size_t>(j)] && w(j) > best) {
                best = w(j);
                enter = j;
            }
        }
        if (enter < 0) break;
        in_passive[static_cast<std::size_t>(enter)] = 1;

        for (int inner = 0; inner < max_iterations; ++inner) {
            std::vector<Index> passive;
            for (Index j = 0; j < p; ++j)
                if (in_passive[static_cast<std::size_t>(j)]) passive.push_back(j);
            const VectorXd s_p = passive_solve(x, y, passive);
            VectorXd s = VectorXd::Zero(p);
            for (std::size_t j = 0; j < passive.size(); ++j) s(passive[j]) = s_p(static_cast<Index>(j));

            bool positive = true;
            for (Index j : passive) positive = positive && s(j) > 0.0;
            if (positive) {
                b = s;
                break;
            }
            double alpha = 1.0;
            Index blocking = -1;
            for (Index j : passive) {
                if (s(j) > 0.0) continue;
                const double a = b(j) / (b(j) - s(j));
                if (blocking < 0 || a < alpha) {
                    alpha = a;
                    blocking = j;
                }
            }
            b += alpha * (s - b);
            b(blocking) = 0.0;  // exact, whatever the rounding in the step
            for (Index j : passive) {
                if (b(j) <= 0.0) {
                    b(j) = 0.0;
                    in_passive[static_cast<std::size_t>(j)] = 0;
                }
            }
        }
    }
    return b;
}

Hyperplane fit_monotone_plane(const MatrixXd& x, const VectorXd& y) {
    if (x.rows() == 0 || x.rows() != y.size()) throw std::invalid_argument("fit_monotone_plane: bad dimensions");
    const VectorXd mean_x = x.colwise().mean().transpose();
    const double mean_y = y.mean();
    const MatrixXd centered = x.rowwise() - mean_x.transpose();
    const VectorXd sx = column_scales(centered);
    const double sy = output_scale(y.array() - mean_y);
    Hyperplane plane;
    plane.slopes = nnls(centered * sx.cwiseInverse().asDiagonal(), (y.array() - mean_y).matrix() / sy);
    plane.slopes = (sy * plane.slopes.array() / sx.array()).matrix();
    plane.intercept = mean_y - mean_x.dot(plane.slopes);
    return plane;
}

}  // namespace frontier
