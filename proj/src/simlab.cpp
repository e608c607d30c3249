#include "frontier/simlab.hpp"
#include "frontier/io.hpp"
#include "frontier/parallel.hpp"

#include <chrono>
#include <cmath>
#include <ostream>
#include <set>
#include <stdexcept>

namespace frontier {

namespace {

constexpr std::uint64_t kLearnStream = 1;
constexpr std::uint64_t kTestStream = 2;
constexpr std::uint64_t kNoiseStream = 3;
constexpr std::uint64_t kFitStream = 4;

// E[X^a] for X ~ U(lo, hi).
double uniform_power_moment(double a, double lo, double hi) {
    return (std::pow(hi, a + 1.0) - std::pow(lo, a + 1.0)) / ((a + 1.0) * (hi - lo));
}

std::uint64_t cell_seed(std::uint64_t base, const SimCell& cell) {
    return derive_seed(derive_seed(base, static_cast<std::uint64_t>(cell.n_full)), static_cast<std::uint64_t>(cell.n_learn));
}

void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw std::invalid_argument(where + ": expected an object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) throw std::invalid_argument(where + ": unknown key '" + key + "'");
}

}  // namespace

void DGPSpec::validate() const {
    if (exponents.size() == 0) throw std::invalid_argument("dgp: at least one exponent is required");
    if ((exponents.array() < 0.0).any()) throw std::invalid_argument("dgp: exponents must be nonnegative");
    if (!(sigma >= 0.0)) throw std::invalid_argument("dgp: sigma must be nonnegative");
    if (!(input_low > 0.0 && input_low < input_high)) throw std::invalid_argument("dgp: need 0 < input_low < input_high");
}

double DGPSpec::frontier(const VectorXd& x) const { return std::exp(exponents.dot(x.array().log().matrix())); }

DGPSpec DGPSpec::bivariate(double sigma) {
    DGPSpec s;
    s.exponents = (VectorXd(2) << 0.4, 0.5).finished();
    s.sigma = sigma;
    return s;
}

DGPSpec DGPSpec::trivariate(double sigma) {
    DGPSpec s;
    s.exponents = (VectorXd(3) << 0.4, 0.3, 0.2).finished();
    s.sigma = sigma;
    return s;
}

DGPSpec DGPSpec::fourvariate(double sigma) {
    DGPSpec s;
    s.exponents = (VectorXd(4) << 0.3, 0.25, 0.25, 0.1).finished();
    s.sigma = sigma;
    return s;
}

Dataset generate(const DGPSpec& spec, Index n, std::mt19937_64& rng) {
    spec.validate();
    if (n < 1) throw std::invalid_argument("generate: n must be positive");
    const Index d = spec.dims();
    std::uniform_real_distribution<double> unif(spec.input_low, spec.input_high);
    std::normal_distribution<double> noise(0.0, 1.0);
    MatrixXd x(n, d);
    VectorXd f(n), y(n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < d; ++j) x(i, j) = unif(rng);
        f(i) = spec.frontier(x.row(i).transpose());
    }
    for (Index i = 0; i < n; ++i) y(i) = f(i) + spec.sigma * noise(rng);
    return Dataset(std::move(x), std::move(y), std::move(f));
}

double frontier_mean(const DGPSpec& spec) {
    double m = 1.0;
    for (Index j = 0; j < spec.dims(); ++j) m *= uniform_power_moment(spec.exponents(j), spec.input_low, spec.input_high);
    return m;
}

double frontier_variance(const DGPSpec& spec) {
    double m2 = 1.0;
    for (Index j = 0; j < spec.dims(); ++j)
        m2 *= uniform_power_moment(2.0 * spec.exponents(j), spec.input_low, spec.input_high);
    const double m = frontier_mean(spec);
    return m2 - m * m;
}

std::vector<SimCell> ExperimentConfig::grid() const {
    if (!cells.empty()) return cells;
    std::vector<SimCell> out;
    for (Index nf : full_sizes)
        for (double f : learning_fractions)
            out.push_back({nf, static_cast<Index>(std::llround(f * static_cast<double>(nf)))});
    return out;
}

void ExperimentConfig::validate() const {
    dgp.validate();
    if (V < 1 || W < 1) throw std::invalid_argument("experiment: V and W must be positive");
    if (n_test < 1) throw std::invalid_argument("experiment: n_test must be positive");
    for (double f : learning_fractions)
        if (!(f > 0.0 && f <= 1.0)) throw std::invalid_argument("experiment: learning fractions must lie in (0, 1]");
    for (const SimCell& c : grid())
        if (c.n_learn < 1 || c.n_learn > c.n_full)
            throw std::invalid_argument("experiment: each learning size must lie in 1..nF");
    for (const auto& name : estimators) {
        const auto e = make_estimator(name, options);
        for (const SimCell& c : grid())
            if (c.n_learn < e->min_sample_size(dgp.dims()))
                throw std::invalid_argument("experiment: nL=" + std::to_string(c.n_learn) + " is too small for " + name);
    }
    options.capnls.validate(dgp.dims());
}

nlohmann::ordered_json to_json(const ExperimentConfig& cfg) {
    nlohmann::ordered_json j;
    j["dgp"] = {{"exponents", std::vector<double>(cfg.dgp.exponents.data(), cfg.dgp.exponents.data() + cfg.dgp.dims())},
                {"sigma", cfg.dgp.sigma},
                {"input_low", cfg.dgp.input_low},
                {"input_high", cfg.dgp.input_high}};
    j["full_sizes"] = cfg.full_sizes;
    j["learning_fractions"] = cfg.learning_fractions;
    j["cells"] = nlohmann::ordered_json::array();
    for (const SimCell& c : cfg.cells) j["cells"].push_back({{"n_full", c.n_full}, {"n_learn", c.n_learn}});
    j["V"] = cfg.V;
    j["W"] = cfg.W;
    j["n_test"] = cfg.n_test;
    j["estimators"] = cfg.estimators;
    j["options"] = to_json(cfg.options);
    j["seed"] = cfg.rng_seed;
    return j;
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
    check_keys(j, {"dgp", "full_sizes", "learning_fractions", "cells", "V", "W", "n_test", "estimators", "options", "seed",
                   "threads", "description"},
               "experiment config");
    ExperimentConfig cfg;
    if (!j.contains("dgp")) throw std::invalid_argument("experiment config: missing 'dgp'");
    const auto& d = j.at("dgp");
    check_keys(d, {"preset", "exponents", "sigma", "input_low", "input_high"}, "dgp");
    const double sigma = d.value("sigma", 0.1);
    const std::string preset = d.value("preset", std::string());
    if (preset == "bivariate") cfg.dgp = DGPSpec::bivariate(sigma);
    else if (preset == "trivariate") cfg.dgp = DGPSpec::trivariate(sigma);
    else if (preset == "fourvariate") cfg.dgp = DGPSpec::fourvariate(sigma);
    else if (!preset.empty()) throw std::invalid_argument("dgp: unknown preset '" + preset + "'");
    if (d.contains("exponents")) {
        const auto e = d.at("exponents").get<std::vector<double>>();
        cfg.dgp.exponents = Eigen::Map<const VectorXd>(e.data(), static_cast<Index>(e.size()));
    }
    cfg.dgp.sigma = sigma;
    cfg.dgp.input_low = d.value("input_low", cfg.dgp.input_low);
    cfg.dgp.input_high = d.value("input_high", cfg.dgp.input_high);
    if (j.contains("full_sizes")) cfg.full_sizes = j.at("full_sizes").get<std::vector<Index>>();
    if (j.contains("learning_fractions")) cfg.learning_fractions = j.at("learning_fractions").get<std::vector<double>>();
    if (j.contains("cells")) {
        for (const auto& c : j.at("cells")) {
            check_keys(c, {"n_full", "n_learn"}, "cells");
            cfg.cells.push_back({c.at("n_full").get<Index>(), c.at("n_learn").get<Index>()});
        }
    }
    cfg.V = j.value("V", cfg.V);
    cfg.W = j.value("W", cfg.W);
    cfg.n_test = j.value("n_test", cfg.n_test);
    if (j.contains("estimators")) cfg.estimators = j.at("estimators").get<std::vector<std::string>>();
    if (j.contains("options")) cfg.options = estimator_options_from_json(j.at("options"));
    cfg.rng_seed = j.value("seed", cfg.rng_seed);
    cfg.threads = j.value("threads", cfg.threads);
    return cfg;
}

double full_set_blend(double in_sample, double predictive, Index n_learn, Index n_full) {
    if (n_full <= 0 || n_learn <= 0 || n_learn > n_full) throw std::invalid_argument("full_set_blend: need 0 < nL <= nF");
    const double wl = static_cast<double>(n_learn) / static_cast<double>(n_full);
    const double wt = static_cast<double>(n_full - n_learn) / static_cast<double>(n_full);
    return wl * in_sample + wt * predictive;
}

MetricsRow sim_errors(const ExperimentConfig& cfg, const SimCell& cell, const Estimator& estimator) {
    const Index nl = cell.n_learn;
    const Index nf = cell.n_full;
    const std::uint64_t base = cell_seed(cfg.rng_seed, cell);

    struct Slot {
        double is_f = 0, f = 0, is_y = 0, y = 0, var_y = 0, seconds = 0;
        std::optional<int> planes;
    };
    std::vector<Slot> slots(static_cast<std::size_t>(cfg.V));
    const auto errors = parallel_for(cfg.V, [&](int v) {
        const std::uint64_t rep = derive_seed(base, static_cast<std::uint64_t>(v));
        std::mt19937_64 learn_rng(derive_seed(rep, kLearnStream));
        const Dataset full = generate(cfg.dgp, nf, learn_rng);
        std::vector<Index> first(static_cast<std::size_t>(nl));
        for (Index i = 0; i < nl; ++i) first[static_cast<std::size_t>(i)] = i;
        const Dataset learn = full.subset(first);
        std::mt19937_64 test_rng(derive_seed(rep, kTestStream));
        const Dataset test = generate(cfg.dgp, cfg.n_test, test_rng);

        const auto t0 = std::chrono::steady_clock::now();
        const auto fit = estimator.fit(learn, derive_seed(rep, kFitStream));
        const auto t1 = std::chrono::steady_clock::now();

        Slot& s = slots[static_cast<std::size_t>(v)];
        const VectorXd& fhat = fit->fitted();
        const VectorXd& f = *learn.true_frontier();
        s.is_f = mean_squared_error(fhat, f);
        const VectorXd pred = fit->predict(test.inputs());
        s.f = mean_squared_error(pred, *test.true_frontier());
        s.y = mean_squared_error(pred, test.outputs());

        std::mt19937_64 noise_rng(derive_seed(rep, kNoiseStream));
        std::normal_distribution<double> noise(0.0, cfg.dgp.sigma);
        double acc = 0.0;
        for (int w = 0; w < cfg.W; ++w) {
            for (Index i = 0; i < nl; ++i) {
                const double e = fhat(i) - (f(i) + noise(noise_rng));
                acc += e * e;
            }
        }
        s.is_y = acc / (static_cast<double>(cfg.W) * static_cast<double>(nl));
        s.var_y = full.output_variance();
        s.seconds = std::chrono::duration<double>(t1 - t0).count();
        s.planes = fit->hyperplanes();
    }, cfg.threads);

    MetricsRow row;
    row.estimator = estimator.name();
    row.n_learn = nl;
    row.n_full = nf;
    row.sigma = cfg.dgp.sigma;
    row.d = cfg.dgp.dims();
    double planes = 0.0;
    int with_planes = 0;
    for (int v = 0; v < cfg.V; ++v) {
        if (errors[static_cast<std::size_t>(v)]) {
            ++row.failed;
            continue;
        }
        const Slot& s = slots[static_cast<std::size_t>(v)];
        ++row.replicates;
        row.mse_is_f += s.is_f;
        row.mse_f += s.f;
        row.mse_is_y += s.is_y;
        row.mse_y += s.y;
        row.var_y += s.var_y;
        row.runtime_seconds += s.seconds;
        if (s.planes) {
            planes += *s.planes;
            ++with_planes;
        }
    }
    row.partial = 10 * row.failed > cfg.V;
    const double m = static_cast<double>(row.replicates);
    if (row.replicates == 0) {
        const double nan = std::nan("");
        row.mse_is_f = row.mse_f = row.mse_is_y = row.mse_y = row.var_y = nan;
    } else {
        row.mse_is_f /= m;
        row.mse_f /= m;
        row.mse_is_y /= m;
        row.mse_y /= m;
        row.var_y /= m;
        row.runtime_seconds /= m;
    }
    if (with_planes > 0) row.k_avg = planes / with_planes;
    row.mse_fs_f = full_set_blend(row.mse_is_f, row.mse_f, nl, nf);
    row.mse_fs_y = full_set_blend(row.mse_is_y, row.mse_y, nl, nf);
    row.mse_fs_y_over_var_y = row.mse_fs_y / row.var_y;
    return row;
}

std::vector<MetricsRow> run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<std::unique_ptr<Estimator>> estimators;
    for (const auto& name : cfg.estimators) estimators.push_back(make_estimator(name, cfg.options));
    std::vector<MetricsRow> rows;
    for (const SimCell& cell : cfg.grid())
        for (const auto& e : estimators) rows.push_back(sim_errors(cfg, cell, *e));
    return rows;
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
    using io::format_number;
    out << "estimator,nL,nF,sigma,d,mse_is_f,mse_f,mse_fs_f,mse_is_y,mse_y,mse_fs_y,mse_fs_y_over_varY,k_avg,"
           "replicates,failed,partial\n";
    for (const auto& r : rows) {
        out << r.estimator << ',' << r.n_learn << ',' << r.n_full << ',' << format_number(r.sigma) << ',' << r.d << ','
            << format_number(r.mse_is_f) << ',' << format_number(r.mse_f) << ',' << format_number(r.mse_fs_f) << ','
            << format_number(r.mse_is_y) << ',' << format_number(r.mse_y) << ',' << format_number(r.mse_fs_y) << ','
            << format_number(r.mse_fs_y_over_var_y) << ',' << format_number(r.k_avg) << ',' << r.replicates << ','
            << r.failed << ',' << (r.partial ? "true" : "false") << '\n';
    }
}

void write_timing_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
    out << "estimator,nL,nF,runtime_seconds\n";
    for (const auto& r : rows)
        out << r.estimator << ',' << r.n_learn << ',' << r.n_full << ',' << io::format_number(r.runtime_seconds) << '\n';
}

}  // namespace frontier
