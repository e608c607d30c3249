#ifndef FRONTIER_COBB_DOUGLAS_HPP
#define FRONTIER_COBB_DOUGLAS_HPP

#include "frontier/core.hpp"

#include <cstdint>

namespace frontier {

enum class ErrorForm { additive, multiplicative };

std::string to_string(ErrorForm form);

/// A * prod_j x_j^alpha_j with nonnegative exponents.
struct CobbDouglasModel {
    double scale = 1.0;
    VectorXd exponents;
    ErrorForm error_form = ErrorForm::additive;
    double sse = 0.0;  // on the level scale for both error forms

    double operator()(const VectorXd& x) const;
    VectorXd predict(const MatrixXd& x) const;
};

nlohmann::ordered_json to_json(const CobbDouglasModel& model);

struct CdaOptions {
    int n_starts = 5;
    bool fix_scale = false;  // pin A = 1
    std::uint64_t rng_seed = 0;
    int max_iterations = 500;
};

/// Bound-constrained nonlinear least squares for Y = A prod X^alpha + e.
/// The first start is the exponentiated log-linear fit; the others are
/// random exponent vectors with the scale set by least squares. Outputs
/// may be nonpositive (additive noise); observations with Y <= 0 are
/// simply left out of the log-linear start.
CobbDouglasModel fit_cd_additive(const Dataset& data, const CdaOptions& options = {});

/// Least squares of log Y on (1, log X) with exponents held nonnegative.
/// Requires strictly positive outputs.
CobbDouglasModel fit_cd_multiplicative(const Dataset& data);

/// Gradient of the level-scale SSE with respect to (A, alpha).
VectorXd cd_sse_gradient(const CobbDouglasModel& model, const Dataset& data);

}  // namespace frontier

#endif  // FRONTIER_COBB_DOUGLAS_HPP
