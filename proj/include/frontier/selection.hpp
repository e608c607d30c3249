#ifndef FRONTIER_SELECTION_HPP
#define FRONTIER_SELECTION_HPP

#include "frontier/estimator.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace frontier {

struct RltConfig {
    std::vector<double> fractions{0.2, 0.3, 0.4, 0.5};
    int V = 100;
    std::uint64_t rng_seed = 0;

    void validate() const;
};

struct BootstrapConfig {
    int B = 500;
    double variance_inflation = 1.0;  // c
    std::uint64_t rng_seed = 0;

    void validate() const;
};

struct SelectionConfig {
    RltConfig rlt;
    BootstrapConfig bootstrap;
    /// Learning sets (the first ones of the RLT draw) on which the expected
    /// optimism is bootstrapped when the fraction is below 1.
    int optimism_sets = 1;
    int threads = 0;

    void validate() const;
};

nlohmann::ordered_json to_json(const SelectionConfig& cfg);
/// Reads {"rlt": {"fractions", "V", "seed"}, "bootstrap": {"B",
/// "variance_inflation", "seed"}, "optimism_sets", "threads"}; missing keys
/// keep their defaults and unknown keys are rejected.
SelectionConfig selection_config_from_json(const nlohmann::json& j);

struct RltResult {
    double mse_rlt = 0.0;
    Index n_learn = 0;
    std::vector<double> per_replicate;   // testing MSE of each successful replicate
    std::vector<double> learning_mse;    // learning MSE of the same replicates
    std::vector<int> hyperplanes;        // empty for parametric estimators
    int failed = 0;
};

/// Learning-set indices of RLT replicate r (sorted); the complement is the
/// testing set. Shared by every estimator evaluated under the same seed.
std::vector<Index> rlt_learning_set(Index n, Index n_learn, std::uint64_t seed, int replicate);

/// Mean over V random learning/testing splits of the per-replicate testing
/// MSE. Fails unless at least 90% of replicates fit.
RltResult rlt_predictive_error(const Dataset& data, const Estimator& estimator, double fraction,
                               const RltConfig& cfg, int threads = 0);

struct OptimismResult {
    double optimism = 0.0;
    std::vector<double> covariances;  // per observation
    double mean_hyperplanes = 0.0;    // over bootstrap refits; 0 for parametric fits
    int failed = 0;
};

/// Efron's parametric bootstrap: B draws Y* ~ N(fitted, c sigma2_hat I),
/// each refitted; cov_i = sum_b Yhat*_i (Y*_i - mean Y*_i) / (B - 1) and the
/// optimism is (2/n) sum_i cov_i. Fails if more than 10% of refits fail.
OptimismResult bootstrap_optimism(const Dataset& data, const Estimator& estimator, const VectorXd& fitted,
                                  double sigma2_hat, const BootstrapConfig& cfg, int threads = 0);

/// Learning MSE of CNLS, used as the bootstrap variance.
double sigma2_from_cnls(const Dataset& data, const qp::SolverConfig& solver = {});

/// (n_T/n) mse_rlt + (n_L/n) (mse_learn + optimism), n_T = n - n_L.
double full_set_error(double mse_rlt, double mse_learn, double optimism, Index n_learn, Index n);

double r2_fs(double err_fullset, double var_y);
double r2_pred(double err_pred, double var_y);

struct ErrorEstimates {
    std::string estimator;
    double fraction = 1.0;
    Index n_learn = 0;
    double mse_learn = 0.0;
    std::optional<double> mse_rlt;  // empty in the census case
    double optimism = 0.0;
    double err_insample = 0.0;
    double err_fullset = 0.0;
    double r2_fs = 0.0;
    std::optional<double> r2_pred;
    std::optional<double> k_avg;
    std::vector<double> per_replicate;     // testing MSEs
    std::vector<double> per_replicate_r2;  // R2_FS of each replicate
};

/// Full-set error and R2 summaries of one estimator at one fraction.
/// fraction = 1 is the census case: learning MSE plus bootstrap optimism.
ErrorEstimates estimate_errors(const Dataset& data, const Estimator& estimator, double fraction,
                               const SelectionConfig& cfg);

struct ComparisonRow {
    std::string dataset;
    double fraction = 1.0;
    std::string estimator;
    std::optional<double> r2_fs;  // empty when the estimator failed
    std::optional<double> r2_pred;
    std::optional<double> k_avg;
    bool best = false;
    std::optional<double> ratio_vs_best;
    std::string best_method;  // highest-R2 estimator at this fraction
    std::string error;
};

struct MethodComparison {
    std::vector<ComparisonRow> rows;
    double tie_band = 0.02;
    std::vector<ErrorEstimates> estimates;  // successful evaluations only

    std::vector<std::string> best_set(double fraction) const;
    /// Estimator in the most best sets; ties go to the higher mean R2_FS
    /// over fractions, then to the earlier one. Empty if every fit failed.
    std::string best_method() const;
};

/// Marks every estimator within `band` (absolute R2) of the best one and
/// fills the ratio and best-method columns. Rows are grouped by fraction.
void mark_best(std::vector<ComparisonRow>& rows, double band = 0.02);

/// Evaluates every estimator at every fraction. Failing estimators are
/// recorded with their error message and left out of the best set.
MethodComparison compare_methods(const Dataset& data, const std::string& dataset_name,
                                 const std::vector<const Estimator*>& estimators,
                                 const std::vector<double>& fractions, const SelectionConfig& cfg,
                                 double band = 0.02);

void write_comparison_csv(std::ostream& out, const MethodComparison& comparison);
nlohmann::ordered_json to_json(const MethodComparison& comparison);

}  // namespace frontier

#endif  // FRONTIER_SELECTION_HPP
