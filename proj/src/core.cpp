#include "frontier/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace frontier {

Dataset::Dataset(MatrixXd inputs, VectorXd outputs, std::optional<VectorXd> true_frontier)
    : inputs_(std::move(inputs)), outputs_(std::move(outputs)),
      true_frontier_(std::move(true_frontier)) {
    if (inputs_.rows() == 0 || inputs_.cols() == 0)
        throw std::invalid_argument("Dataset: empty input matrix");
    if (outputs_.size() != inputs_.rows())
        throw std::invalid_argument("Dataset: output length does not match input rows");
    if (!inputs_.allFinite() || !outputs_.allFinite())
        throw std::invalid_argument("Dataset: non-finite value");
    if ((inputs_.array() <= 0.0).any())
        throw std::invalid_argument("Dataset: inputs must be strictly positive");
    if (true_frontier_) {
        if (true_frontier_->size() != inputs_.rows())
            throw std::invalid_argument("Dataset: frontier length does not match input rows");
        if (!true_frontier_->allFinite())
            throw std::invalid_argument("Dataset: non-finite frontier value");
    }
}

Dataset Dataset::subset(std::span<const Index> rows) const {
    const auto m = static_cast<Index>(rows.size());
    MatrixXd x(m, dims());
    VectorXd y(m);
    std::optional<VectorXd> f;
    if (true_frontier_) f = VectorXd(m);
    for (Index r = 0; r < m; ++r) {
        const Index i = rows[static_cast<std::size_t>(r)];
        if (i < 0 || i >= size()) throw std::out_of_range("Dataset::subset: row index out of range");
        x.row(r) = inputs_.row(i);
        y(r) = outputs_(i);
        if (f) (*f)(r) = (*true_frontier_)(i);
    }
    return Dataset(std::move(x), std::move(y), std::move(f));
}

Dataset Dataset::with_outputs(VectorXd outputs) const {
    return Dataset(inputs_, std::move(outputs), true_frontier_);
}

double Dataset::output_variance() const {
    if (size() < 2) return 0.0;
    const double mean = outputs_.mean();
    return (outputs_.array() - mean).square().sum() / static_cast<double>(size() - 1);
}

Partition Partition::single(Index n) {
    return Partition{std::vector<int>(static_cast<std::size_t>(n), 0), 1, 1};
}

Partition Partition::identity(Index n) {
    Partition p;
    p.assignment.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) p.assignment[static_cast<std::size_t>(i)] = static_cast<int>(i);
    p.regions = static_cast<int>(n);
    p.min_region_size = 1;
    return p;
}

std::vector<int> Partition::region_sizes() const {
    std::vector<int> sizes(static_cast<std::size_t>(std::max(regions, 0)), 0);
    for (int r : assignment) {
        if (r < 0 || r >= regions) throw std::invalid_argument("Partition: region label out of range");
        ++sizes[static_cast<std::size_t>(r)];
    }
    return sizes;
}

std::vector<std::vector<Index>> Partition::members() const {
    std::vector<std::vector<Index>> out(static_cast<std::size_t>(std::max(regions, 0)));
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        const int r = assignment[i];
        if (r < 0 || r >= regions) throw std::invalid_argument("Partition: region label out of range");
        out[static_cast<std::size_t>(r)].push_back(static_cast<Index>(i));
    }
    return out;
}

void Partition::validate(Index n) const {
    if (regions < 1) throw std::invalid_argument("Partition: needs at least one region");
    if (min_region_size < 1) throw std::invalid_argument("Partition: min_region_size must be positive");
    if (size() != n) throw std::invalid_argument("Partition: assignment length does not match dataset");
    for (int count : region_sizes()) {
        if (count == 0) throw std::invalid_argument("Partition: empty region");
        if (count < min_region_size)
            throw std::invalid_argument("Partition: region smaller than min_region_size");
    }
}

MatrixXd PiecewiseLinearModel::coefficient_matrix() const {
    MatrixXd c(size(), dims() + 1);
    for (int k = 0; k < size(); ++k) {
        c(k, 0) = hyperplanes[static_cast<std::size_t>(k)].intercept;
        c.row(k).tail(dims()) = hyperplanes[static_cast<std::size_t>(k)].slopes.transpose();
    }
    return c;
}

MatrixXd plane_values(const PiecewiseLinearModel& model, const MatrixXd& x) {
    if (model.size() == 0) throw std::invalid_argument("plane_values: model has no hyperplanes");
    if (x.cols() != model.dims()) throw std::invalid_argument("plane_values: dimension mismatch");
    const MatrixXd coef = model.coefficient_matrix();
    MatrixXd values = x * coef.rightCols(model.dims()).transpose();
    values.rowwise() += coef.col(0).transpose();
    return values;
}

VectorXd evaluate_in_sample(const PiecewiseLinearModel& model, const Dataset& data) {
    if (!model.partition) throw std::invalid_argument("evaluate_in_sample: model has no partition");
    const Partition& part = *model.partition;
    if (part.size() != data.size())
        throw std::invalid_argument("evaluate_in_sample: partition length does not match dataset");
    if (data.dims() != model.dims()) throw std::invalid_argument("evaluate_in_sample: dimension mismatch");
    VectorXd out(data.size());
    for (Index i = 0; i < data.size(); ++i) {
        const int k = part.assignment[static_cast<std::size_t>(i)];
        if (k < 0 || k >= model.size()) throw std::invalid_argument("evaluate_in_sample: bad region label");
        out(i) = model.hyperplanes[static_cast<std::size_t>(k)](data.inputs().row(i).transpose());
    }
    return out;
}

VectorXd predict(const PiecewiseLinearModel& model, const MatrixXd& x) {
    if (!x.allFinite()) throw std::invalid_argument("predict: non-finite input");
    return plane_values(model, x).rowwise().minCoeff();
}

double predict(const PiecewiseLinearModel& model, const VectorXd& x) {
    return predict(model, MatrixXd(x.transpose()))(0);
}

ModelDiagnostics validate_model(const PiecewiseLinearModel& model, const Dataset& data) {
    ModelDiagnostics diag;
    diag.min_slope = std::numeric_limits<double>::infinity();
    for (const auto& plane : model.hyperplanes)
        if (plane.slopes.size() > 0) diag.min_slope = std::min(diag.min_slope, plane.slopes.minCoeff());
    diag.monotone = diag.min_slope >= -model.feasibility_tolerance;

    const MatrixXd values = plane_values(model, data.inputs());
    const VectorXd envelope = values.rowwise().minCoeff();
    VectorXd fitted = envelope;
    if (model.partition && model.partition->size() == data.size()) {
        fitted = evaluate_in_sample(model, data);
        for (Index i = 0; i < data.size(); ++i) {
            // assigned(i) <= plane_k(i) for all k, i.e. assigned - envelope <= 0
            diag.max_afriat_violation = std::max(diag.max_afriat_violation, fitted(i) - envelope(i));
            diag.envelope_gap = std::max(diag.envelope_gap, std::abs(fitted(i) - envelope(i)));
        }
    }
    diag.learning_mse = mean_squared_error(fitted, data.outputs());
    diag.feasible = diag.max_afriat_violation <= model.feasibility_tolerance;
    return diag;
}

int count_distinct_planes(const PiecewiseLinearModel& model, double tol) {
    const MatrixXd coef = model.coefficient_matrix();
    std::vector<Index> kept;
    for (Index k = 0; k < coef.rows(); ++k) {
        bool duplicate = false;
        for (Index j : kept) {
            if ((coef.row(k) - coef.row(j)).cwiseAbs().maxCoeff() <= tol) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) kept.push_back(k);
    }
    return static_cast<int>(kept.size());
}

double mean_squared_error(const VectorXd& fitted, const VectorXd& observed) {
    if (fitted.size() != observed.size()) throw std::invalid_argument("mean_squared_error: length mismatch");
    if (fitted.size() == 0) return 0.0;
    return (fitted - observed).squaredNorm() / static_cast<double>(fitted.size());
}

nlohmann::ordered_json to_json(const PiecewiseLinearModel& model) {
    nlohmann::ordered_json doc;
    doc["K"] = model.size();
    auto planes = nlohmann::ordered_json::array();
    for (const auto& plane : model.hyperplanes) {
        nlohmann::ordered_json p;
        p["intercept"] = plane.intercept;
        p["slopes"] = std::vector<double>(plane.slopes.data(), plane.slopes.data() + plane.slopes.size());
        planes.push_back(std::move(p));
    }
    doc["hyperplanes"] = std::move(planes);
    auto assignment = nlohmann::ordered_json::array();
    if (model.partition)
        for (int r : model.partition->assignment) assignment.push_back(r + 1);
    doc["assignment"] = std::move(assignment);
    doc["learning_mse"] = model.learning_mse;
    return doc;
}

PiecewiseLinearModel model_from_json(const nlohmann::json& doc) {
    PiecewiseLinearModel model;
    const int K = doc.at("K").get<int>();
    for (const auto& p : doc.at("hyperplanes")) {
        Hyperplane plane;
        plane.intercept = p.at("intercept").get<double>();
        const auto slopes = p.at("slopes").get<std::vector<double>>();
        plane.slopes = Eigen::Map<const VectorXd>(slopes.data(), static_cast<Index>(slopes.size()));
        model.hyperplanes.push_back(std::move(plane));
    }
    if (model.size() != K) throw std::invalid_argument("model_from_json: K does not match hyperplane count");
    for (const auto& plane : model.hyperplanes)
        if (plane.slopes.size() != model.dims())
            throw std::invalid_argument("model_from_json: inconsistent slope lengths");
    const auto labels = doc.at("assignment").get<std::vector<int>>();
    if (!labels.empty()) {
        Partition part;
        part.regions = K;
        for (int r : labels) {
            if (r < 1 || r > K) throw std::invalid_argument("model_from_json: assignment label out of range");
            part.assignment.push_back(r - 1);
        }
        model.partition = std::move(part);
    }
    model.learning_mse = doc.at("learning_mse").get<double>();
    return model;
}

VectorXd column_scales(const MatrixXd& x) {
    VectorXd s(x.cols());
    for (Index j = 0; j < x.cols(); ++j) {
        const double m = x.rows() > 0 ? x.col(j).cwiseAbs().maxCoeff() : 0.0;
        s(j) = m > 0.0 && std::isfinite(m) ? m : 1.0;
    }
    return s;
}

double output_scale(const VectorXd& y) {
    const double m = y.size() > 0 ? y.cwiseAbs().maxCoeff() : 0.0;
    return m > 0.0 && std::isfinite(m) ? m : 1.0;
}

}  // namespace frontier
