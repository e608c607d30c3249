#include "frontier/cobb_douglas.hpp"
#include "frontier/nnls.hpp"

#include <ceres/ceres.h>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace frontier {

std::string to_string(ErrorForm form) {
    return form == ErrorForm::additive ? "additive" : "multiplicative";
}

double CobbDouglasModel::operator()(const VectorXd& x) const {
    return scale * std::exp(exponents.dot(x.array().log().matrix()));
}

VectorXd CobbDouglasModel::predict(const MatrixXd& x) const {
    if (x.cols() != exponents.size()) throw std::invalid_argument("CobbDouglasModel::predict: dimension mismatch");
    if ((x.array() <= 0.0).any()) throw std::invalid_argument("CobbDouglasModel::predict: inputs must be positive");
    return scale * (x.array().log().matrix() * exponents).array().exp().matrix();
}

nlohmann::ordered_json to_json(const CobbDouglasModel& model) {
    nlohmann::ordered_json j;
    j["scale"] = model.scale;
    j["exponents"] = std::vector<double>(model.exponents.data(), model.exponents.data() + model.exponents.size());
    j["error_form"] = to_string(model.error_form);
    j["sse"] = model.sse;
    return j;
}

namespace {

void check_inputs(const Dataset& data, const char* who) {
    if (data.size() < data.dims() + 1)
        throw std::invalid_argument(std::string(who) + ": need at least d+1 observations");
}

double level_sse(const CobbDouglasModel& m, const Dataset& data) {
    return (data.outputs() - m.predict(data.inputs())).squaredNorm();
}

// r_i = Y_i - A exp(alpha' log X_i); parameter blocks are A and alpha.
class CdResidual final : public ceres::CostFunction {
public:
    CdResidual(const MatrixXd& log_x, const VectorXd& y) : log_x_(log_x), y_(y) {
        set_num_residuals(static_cast<int>(y.size()));
        mutable_parameter_block_sizes()->push_back(1);
        mutable_parameter_block_sizes()->push_back(static_cast<int>(log_x.cols()));
    }

    bool Evaluate(double const* const* params, double* residuals, double** jacobians) const override {
        const double a = params[0][0];
        const Eigen::Map<const VectorXd> alpha(params[1], log_x_.cols());
        const VectorXd g = (log_x_ * alpha).array().exp().matrix();
        Eigen::Map<VectorXd>(residuals, y_.size()) = y_ - a * g;
        if (jacobians == nullptr) return true;
        if (jacobians[0] != nullptr) Eigen::Map<VectorXd>(jacobians[0], y_.size()) = -g;
        if (jacobians[1] != nullptr) {
            Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> jac(
                jacobians[1], y_.size(), log_x_.cols());
            jac = -a * (log_x_.array().colwise() * g.array()).matrix();
        }
        return true;
    }

private:
    const MatrixXd& log_x_;
    const VectorXd& y_;
};

// Least-squares scale for fixed exponents, clipped at zero.
double best_scale(const MatrixXd& log_x, const VectorXd& y, const VectorXd& alpha) {
    const VectorXd g = (log_x * alpha).array().exp().matrix();
    const double denom = g.squaredNorm();
    return denom > 0.0 ? std::max(0.0, g.dot(y) / denom) : 0.0;
}

}  // namespace

VectorXd cd_sse_gradient(const CobbDouglasModel& model, const Dataset& data) {
    const MatrixXd log_x = data.inputs().array().log().matrix();
    const VectorXd g = (log_x * model.exponents).array().exp().matrix();
    const VectorXd r = data.outputs() - model.scale * g;
    VectorXd grad(model.exponents.size() + 1);
    grad(0) = -2.0 * r.dot(g);
    grad.tail(model.exponents.size()) = -2.0 * model.scale * log_x.transpose() * (r.array() * g.array()).matrix();
    return grad;
}

CobbDouglasModel fit_cd_multiplicative(const Dataset& data) {
    check_inputs(data, "fit_cd_multiplicative");
    if ((data.outputs().array() <= 0.0).any())
        throw std::invalid_argument("fit_cd_multiplicative: outputs must be positive");
    const Hyperplane plane =
        fit_monotone_plane(data.inputs().array().log().matrix(), data.outputs().array().log().matrix());
    CobbDouglasModel m;
    m.scale = std::exp(plane.intercept);
    m.exponents = plane.slopes;
    m.error_form = ErrorForm::multiplicative;
    m.sse = level_sse(m, data);
    return m;
}

CobbDouglasModel fit_cd_additive(const Dataset& data, const CdaOptions& options) {
    check_inputs(data, "fit_cd_additive");
    if (options.n_starts < 1) throw std::invalid_argument("fit_cd_additive: n_starts must be positive");
    const Index d = data.dims();
    const MatrixXd log_x = data.inputs().array().log().matrix();
    const VectorXd& y = data.outputs();

    std::vector<VectorXd> starts;
    {
        std::vector<Index> positive;
        for (Index i = 0; i < data.size(); ++i)
            if (y(i) > 0.0) positive.push_back(i);
        if (static_cast<Index>(positive.size()) >= d + 1) {
            const Dataset pos = data.subset(positive);
            const Hyperplane plane = fit_monotone_plane(pos.inputs().array().log().matrix(),
                                                        pos.outputs().array().log().matrix());
            starts.push_back(plane.slopes);
        } else {
            starts.push_back(VectorXd::Constant(d, 1.0 / static_cast<double>(d)));
        }
    }
    std::mt19937_64 rng(options.rng_seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    while (static_cast<int>(starts.size()) < options.n_starts) {
        VectorXd a(d);
        for (Index j = 0; j < d; ++j) a(j) = unif(rng);
        starts.push_back(a);
    }

    CobbDouglasModel best;
    double best_sse = std::numeric_limits<double>::infinity();
    int usable = 0;
    for (const VectorXd& start : starts) {
        double scale = options.fix_scale ? 1.0 : best_scale(log_x, y, start);
        VectorXd alpha = start;

        ceres::Problem problem;
        problem.AddResidualBlock(new CdResidual(log_x, y), nullptr, &scale, alpha.data());
        problem.SetParameterLowerBound(&scale, 0, 0.0);
        for (int j = 0; j < static_cast<int>(d); ++j) problem.SetParameterLowerBound(alpha.data(), j, 0.0);
        if (options.fix_scale) problem.SetParameterBlockConstant(&scale);

        ceres::Solver::Options opts;
        opts.linear_solver_type = ceres::DENSE_QR;
        opts.max_num_iterations = options.max_iterations;
        opts.function_tolerance = 1e-15;
        opts.gradient_tolerance = 1e-14;
        opts.parameter_tolerance = 1e-14;
        opts.logging_type = ceres::SILENT;
        opts.num_threads = 1;
        ceres::Solver::Summary summary;
        ceres::Solve(opts, &problem, &summary);
        if (!summary.IsSolutionUsable()) continue;
        ++usable;

        CobbDouglasModel m;
        m.scale = scale;
        m.exponents = alpha;
        m.error_form = ErrorForm::additive;
        m.sse = level_sse(m, data);
        if (m.sse < best_sse) {
            best_sse = m.sse;
            best = m;
        }
    }
    if (usable == 0) throw std::runtime_error("fit_cd_additive: optimizer failed from every start");
    return best;
}

}  // namespace frontier
