#ifndef FRONTIER_NNLS_HPP
#define FRONTIER_NNLS_HPP

#include "frontier/core.hpp"

namespace frontier {

/// Lawson-Hanson active-set solution of min ||X b - y|| s.t. b >= 0.
VectorXd nnls(const MatrixXd& x, const VectorXd& y, int max_iterations = 0);

/// Least-squares plane with a free intercept and nonnegative slopes.
/// With fewer observations than coefficients the minimum-norm slope
/// vector among the optimal ones is returned.
Hyperplane fit_monotone_plane(const MatrixXd& x, const VectorXd& y);

}  // namespace frontier

#endif  // FRONTIER_NNLS_HPP
