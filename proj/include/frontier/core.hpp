#ifndef FRONTIER_CORE_HPP
#define FRONTIER_CORE_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace frontier {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Observations of d strictly positive inputs and one output.
///
/// In simulation mode the dataset also carries the noise-free frontier
/// value f(X_i) of every observation.
class Dataset {
public:
    Dataset() = default;
    Dataset(MatrixXd inputs, VectorXd outputs,
            std::optional<VectorXd> true_frontier = std::nullopt);

    const MatrixXd& inputs() const { return inputs_; }
    const VectorXd& outputs() const { return outputs_; }
    const std::optional<VectorXd>& true_frontier() const { return true_frontier_; }
    bool has_frontier() const { return true_frontier_.has_value(); }

    Index size() const { return inputs_.rows(); }
    Index dims() const { return inputs_.cols(); }

    /// Rows of the dataset selected by index, in the given order.
    Dataset subset(std::span<const Index> rows) const;

    /// Same inputs (and frontier) with a replaced output vector.
    Dataset with_outputs(VectorXd outputs) const;

    /// Sample variance of the outputs (n - 1 denominator).
    double output_variance() const;

private:
    MatrixXd inputs_;
    VectorXd outputs_;
    std::optional<VectorXd> true_frontier_;
};

/// Observation-to-region assignment. Region labels are 0-based in memory
/// and 1-based in serialized documents.
struct Partition {
    std::vector<int> assignment;
    int regions = 0;
    int min_region_size = 1;

    static Partition single(Index n);
    static Partition identity(Index n);

    Index size() const { return static_cast<Index>(assignment.size()); }
    std::vector<int> region_sizes() const;
    std::vector<std::vector<Index>> members() const;

    /// Throws std::invalid_argument unless every region 0..regions-1 is
    /// populated with at least min_region_size observations.
    void validate(Index n) const;
};

struct Hyperplane {
    double intercept = 0.0;
    VectorXd slopes;

    template <typename Derived>
    double operator()(const Eigen::MatrixBase<Derived>& x) const {
        return intercept + slopes.dot(x);
    }
};

/// K hyperplanes with nonnegative slopes. In-sample values come from each
/// observation's assigned plane; everywhere else the model is the lower
/// envelope of the planes.
struct PiecewiseLinearModel {
    std::vector<Hyperplane> hyperplanes;
    std::optional<Partition> partition;
    double learning_mse = 0.0;
    double feasibility_tolerance = 1e-6;

    int size() const { return static_cast<int>(hyperplanes.size()); }
    Index dims() const { return hyperplanes.empty() ? 0 : hyperplanes.front().slopes.size(); }

    /// Planes stacked as rows of [intercept, slopes...].
    MatrixXd coefficient_matrix() const;
};

VectorXd evaluate_in_sample(const PiecewiseLinearModel& model, const Dataset& data);

VectorXd predict(const PiecewiseLinearModel& model, const MatrixXd& x);
double predict(const PiecewiseLinearModel& model, const VectorXd& x);

/// Values of every plane at every row of x (rows: observations, cols: planes).
MatrixXd plane_values(const PiecewiseLinearModel& model, const MatrixXd& x);

struct ModelDiagnostics {
    double max_afriat_violation = 0.0;
    double min_slope = 0.0;
    double learning_mse = 0.0;
    double envelope_gap = 0.0;  // max |assigned value - envelope value|
    bool monotone = true;
    bool feasible = true;
};

ModelDiagnostics validate_model(const PiecewiseLinearModel& model, const Dataset& data);

/// Number of hyperplanes that differ from every earlier plane by more than
/// tol in some coefficient.
int count_distinct_planes(const PiecewiseLinearModel& model, double tol = 1e-6);

double mean_squared_error(const VectorXd& fitted, const VectorXd& observed);

/// Largest absolute entry of each column (1 for an all-zero column).
VectorXd column_scales(const MatrixXd& x);
/// Largest absolute entry of y (1 if y is zero).
double output_scale(const VectorXd& y);

nlohmann::ordered_json to_json(const PiecewiseLinearModel& model);
PiecewiseLinearModel model_from_json(const nlohmann::json& doc);

}  // namespace frontier

#endif  // FRONTIER_CORE_HPP
