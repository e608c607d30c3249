#ifndef FRONTIER_SIMLAB_HPP
#define FRONTIER_SIMLAB_HPP

#include "frontier/estimator.hpp"

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace frontier {

/// Y = prod_j X_j^alpha_j + N(0, sigma^2), X_j ~ U(low, high).
struct DGPSpec {
    VectorXd exponents;
    double sigma = 0.1;
    double input_low = 0.1;
    double input_high = 1.0;

    Index dims() const { return exponents.size(); }
    void validate() const;
    double frontier(const VectorXd& x) const;

    /// The bivariate, trivariate and four-input benchmark designs.
    static DGPSpec bivariate(double sigma);
    static DGPSpec trivariate(double sigma);
    static DGPSpec fourvariate(double sigma);
};

Dataset generate(const DGPSpec& spec, Index n, std::mt19937_64& rng);

/// Exact E f(X) and Var f(X) under the uniform input design.
double frontier_mean(const DGPSpec& spec);
double frontier_variance(const DGPSpec& spec);

struct SimCell {
    Index n_full = 0;
    Index n_learn = 0;
};

struct ExperimentConfig {
    DGPSpec dgp;
    std::vector<Index> full_sizes{100, 200, 300};
    /// nL = round(fraction * nF) for every full size, unless cells is set.
    std::vector<double> learning_fractions{1.0, 0.8, 0.5, 0.3};
    std::vector<SimCell> cells;
    int V = 100;
    int W = 30;
    Index n_test = 1000;
    std::vector<std::string> estimators{"capnls", "cap", "cnls", "cda"};
    EstimatorOptions options;
    std::uint64_t rng_seed = 0;
    int threads = 0;

    std::vector<SimCell> grid() const;
    void validate() const;
};

nlohmann::ordered_json to_json(const ExperimentConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

struct MetricsRow {
    std::string estimator;
    Index n_learn = 0;
    Index n_full = 0;
    double sigma = 0.0;
    Index d = 0;
    double mse_is_f = 0.0;
    double mse_f = 0.0;
    double mse_fs_f = 0.0;
    double mse_is_y = 0.0;
    double mse_y = 0.0;
    double mse_fs_y = 0.0;
    double mse_fs_y_over_var_y = 0.0;
    double var_y = 0.0;  // mean full-set output variance
    std::optional<double> k_avg;
    double runtime_seconds = 0.0;  // mean fit time; not part of the metrics CSV
    int replicates = 0;
    int failed = 0;
    bool partial = false;  // more than 10% of replicates failed
};

/// Full-set blend: (nL/nF) in-sample + ((nF - nL)/nF) predictive.
double full_set_blend(double in_sample, double predictive, Index n_learn, Index n_full);

/// Runs every replicate of one grid cell for one estimator. Learning,
/// testing and noise draws depend only on (seed, cell, replicate), so all
/// estimators see the same data.
MetricsRow sim_errors(const ExperimentConfig& cfg, const SimCell& cell, const Estimator& estimator);

/// Rows ordered by cell, then by estimator as listed in the config.
std::vector<MetricsRow> run_experiment(const ExperimentConfig& cfg);

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows);
void write_timing_csv(std::ostream& out, const std::vector<MetricsRow>& rows);

}  // namespace frontier

#endif  // FRONTIER_SIMLAB_HPP
