#ifndef FRONTIER_ESTIMATOR_HPP
#define FRONTIER_ESTIMATOR_HPP

#include "frontier/cobb_douglas.hpp"
#include "frontier/core.hpp"
#include "frontier/estimators.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace frontier {

/// A fitted function as seen by the selection and simulation code.
class FittedModel {
public:
    virtual ~FittedModel() = default;
    virtual VectorXd predict(const MatrixXd& x) const = 0;
    /// Values at the learning inputs, in learning order.
    virtual const VectorXd& fitted() const = 0;
    virtual double learning_mse() const = 0;
    /// Hyperplane count for piecewise-linear fits (distinct planes for
    /// CNLS, selected K otherwise); empty for parametric fits.
    virtual std::optional<int> hyperplanes() const { return std::nullopt; }
    virtual nlohmann::ordered_json to_json() const = 0;
};

class Estimator {
public:
    virtual ~Estimator() = default;
    virtual std::string name() const = 0;
    /// The seed replaces any seed in the estimator's own settings.
    virtual std::unique_ptr<FittedModel> fit(const Dataset& data, std::uint64_t seed) const = 0;
    virtual Index min_sample_size(Index d) const = 0;
    /// Log-scale fits cannot use nonpositive outputs.
    virtual bool requires_positive_outputs() const { return false; }
};

class PiecewiseFit final : public FittedModel {
public:
    PiecewiseFit(PiecewiseLinearModel model, const Dataset& data, bool count_distinct);
    VectorXd predict(const MatrixXd& x) const override { return frontier::predict(model_, x); }
    const VectorXd& fitted() const override { return fitted_; }
    double learning_mse() const override { return model_.learning_mse; }
    std::optional<int> hyperplanes() const override { return planes_; }
    nlohmann::ordered_json to_json() const override { return frontier::to_json(model_); }
    const PiecewiseLinearModel& model() const { return model_; }

private:
    PiecewiseLinearModel model_;
    VectorXd fitted_;
    int planes_;
};

class ParametricFit final : public FittedModel {
public:
    ParametricFit(CobbDouglasModel model, const Dataset& data);
    VectorXd predict(const MatrixXd& x) const override { return model_.predict(x); }
    const VectorXd& fitted() const override { return fitted_; }
    double learning_mse() const override { return learning_mse_; }
    nlohmann::ordered_json to_json() const override { return frontier::to_json(model_); }
    const CobbDouglasModel& model() const { return model_; }

private:
    CobbDouglasModel model_;
    VectorXd fitted_;
    double learning_mse_;
};

struct EstimatorOptions {
    CapNlsParams capnls;
    qp::SolverConfig solver;
    CdaOptions cda;
};

nlohmann::ordered_json to_json(const EstimatorOptions& options);
/// Missing keys keep their defaults; unknown keys are rejected.
EstimatorOptions estimator_options_from_json(const nlohmann::json& j);

/// Known names: cnls, capnls, capnlsf, cap, cda, cdm. Throws
/// std::invalid_argument for anything else.
std::unique_ptr<Estimator> make_estimator(const std::string& name, const EstimatorOptions& options = {});
const std::vector<std::string>& estimator_names();

}  // namespace frontier

#endif  // FRONTIER_ESTIMATOR_HPP
