#ifndef FRONTIER_TEST_HELPERS_HPP
#define FRONTIER_TEST_HELPERS_HPP

#include "frontier/core.hpp"
#include "frontier/simlab.hpp"

#include <cmath>
#include <random>

namespace testing {

using namespace frontier;

inline Dataset make_data(std::initializer_list<std::initializer_list<double>> x, std::initializer_list<double> y) {
    MatrixXd m(static_cast<Index>(x.size()), static_cast<Index>(x.begin()->size()));
    Index i = 0;
    for (const auto& row : x) {
        Index j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    VectorXd v(static_cast<Index>(y.size()));
    i = 0;
    for (double e : y) v(i++) = e;
    return Dataset(m, v);
}

inline Dataset cobb_douglas(Index n, double sigma, std::uint64_t seed, Index d = 2) {
    std::mt19937_64 rng(seed);
    DGPSpec spec = d == 2 ? DGPSpec::bivariate(sigma) : d == 3 ? DGPSpec::trivariate(sigma) : DGPSpec::fourvariate(sigma);
    return generate(spec, n, rng);
}

/// y = 0.5 + 2 x1 + x2 (+ ...) on U(0.1, 1) inputs, no noise.
inline Dataset linear_data(Index n, Index d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    MatrixXd x(n, d);
    VectorXd y(n);
    for (Index i = 0; i < n; ++i) {
        y(i) = 0.5;
        for (Index j = 0; j < d; ++j) {
            x(i, j) = u(rng);
            y(i) += (j == 0 ? 2.0 : 1.0) * x(i, j);
        }
    }
    return Dataset(x, y);
}

inline Hyperplane plane(double a, std::initializer_list<double> b) {
    Hyperplane h;
    h.intercept = a;
    h.slopes.resize(static_cast<Index>(b.size()));
    Index j = 0;
    for (double v : b) h.slopes(j++) = v;
    return h;
}

}  // namespace testing

#endif  // FRONTIER_TEST_HELPERS_HPP
