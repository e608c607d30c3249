#include "frontier/selection.hpp"
#include "frontier/io.hpp"
#include "frontier/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <stdexcept>

namespace frontier {

namespace {

// Stream tags keep subset draws, estimator seeds and bootstrap noise
// independent of each other within one replicate.
constexpr std::uint64_t kFitStream = 0x66697421ULL;
constexpr std::uint64_t kBootStream = 0x626f6f74ULL;

double mean(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

Index learning_size(double fraction, Index n) {
    return static_cast<Index>(std::floor(fraction * static_cast<double>(n) + 1e-9));
}

}  // namespace

void RltConfig::validate() const {
    if (fractions.empty()) throw std::invalid_argument("rlt: at least one fraction is required");
    for (double f : fractions)
        if (!(f > 0.0 && f < 1.0)) throw std::invalid_argument("rlt: fractions must lie in (0, 1)");
    if (V < 2) throw std::invalid_argument("rlt: V must be at least 2");
}

void BootstrapConfig::validate() const {
    if (B < 2) throw std::invalid_argument("bootstrap: B must be at least 2");
    if (!(variance_inflation >= 1.0)) throw std::invalid_argument("bootstrap: variance_inflation must be >= 1");
}

void SelectionConfig::validate() const {
    rlt.validate();
    bootstrap.validate();
    if (optimism_sets < 0) throw std::invalid_argument("selection: optimism_sets must be nonnegative");
}

namespace {

void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw std::invalid_argument(where + ": expected an object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) throw std::invalid_argument(where + ": unknown key '" + key + "'");
}

}  // namespace

nlohmann::ordered_json to_json(const SelectionConfig& cfg) {
    nlohmann::ordered_json j;
    j["rlt"] = {{"fractions", cfg.rlt.fractions}, {"V", cfg.rlt.V}, {"seed", cfg.rlt.rng_seed}};
    j["bootstrap"] = {{"B", cfg.bootstrap.B},
                      {"variance_inflation", cfg.bootstrap.variance_inflation},
                      {"seed", cfg.bootstrap.rng_seed}};
    j["optimism_sets"] = cfg.optimism_sets;
    return j;
}

SelectionConfig selection_config_from_json(const nlohmann::json& j) {
    check_keys(j, {"rlt", "bootstrap", "optimism_sets", "threads"}, "selection config");
    SelectionConfig cfg;
    if (j.contains("rlt")) {
        const auto& r = j.at("rlt");
        check_keys(r, {"fractions", "V", "seed"}, "rlt");
        if (r.contains("fractions")) cfg.rlt.fractions = r.at("fractions").get<std::vector<double>>();
        cfg.rlt.V = r.value("V", cfg.rlt.V);
        cfg.rlt.rng_seed = r.value("seed", cfg.rlt.rng_seed);
    }
    if (j.contains("bootstrap")) {
        const auto& b = j.at("bootstrap");
        check_keys(b, {"B", "variance_inflation", "seed"}, "bootstrap");
        cfg.bootstrap.B = b.value("B", cfg.bootstrap.B);
        cfg.bootstrap.variance_inflation = b.value("variance_inflation", cfg.bootstrap.variance_inflation);
        cfg.bootstrap.rng_seed = b.value("seed", cfg.bootstrap.rng_seed);
    }
    cfg.optimism_sets = j.value("optimism_sets", cfg.optimism_sets);
    cfg.threads = j.value("threads", cfg.threads);
    cfg.validate();
    return cfg;
}

std::vector<Index> rlt_learning_set(Index n, Index n_learn, std::uint64_t seed, int replicate) {
    if (n_learn < 1 || n_learn > n) throw std::invalid_argument("rlt_learning_set: bad learning size");
    std::vector<Index> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), Index{0});
    std::vector<Index> out;
    out.reserve(static_cast<std::size_t>(n_learn));
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(replicate)));
    std::sample(all.begin(), all.end(), std::back_inserter(out), n_learn, rng);
    return out;
}

RltResult rlt_predictive_error(const Dataset& data, const Estimator& estimator, double fraction,
                               const RltConfig& cfg, int threads) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("rlt_predictive_error: fraction must lie in (0, 1)");
    if (cfg.V < 2) throw std::invalid_argument("rlt_predictive_error: V must be at least 2");
    const Index n = data.size();
    const Index n_learn = learning_size(fraction, n);
    if (n_learn < estimator.min_sample_size(data.dims()))
        throw std::invalid_argument("rlt_predictive_error: learning sets too small for " + estimator.name());
    if (n_learn >= n) throw std::invalid_argument("rlt_predictive_error: empty testing set");

    struct Slot {
        double test = 0.0;
        double learn = 0.0;
        std::optional<int> planes;
    };
    std::vector<Slot> slots(static_cast<std::size_t>(cfg.V));
    const auto errors = parallel_for(cfg.V, [&](int r) {
        const std::vector<Index> learn = rlt_learning_set(n, n_learn, cfg.rng_seed, r);
        std::vector<char> in_learn(static_cast<std::size_t>(n), 0);
        for (Index i : learn) in_learn[static_cast<std::size_t>(i)] = 1;
        std::vector<Index> test;
        for (Index i = 0; i < n; ++i)
            if (!in_learn[static_cast<std::size_t>(i)]) test.push_back(i);
        const Dataset learn_set = data.subset(learn);
        const Dataset test_set = data.subset(test);
        const auto fit = estimator.fit(learn_set, derive_seed(derive_seed(cfg.rng_seed, r), kFitStream));
        Slot& s = slots[static_cast<std::size_t>(r)];
        s.test = mean_squared_error(fit->predict(test_set.inputs()), test_set.outputs());
        s.learn = fit->learning_mse();
        s.planes = fit->hyperplanes();
    }, threads);

    RltResult res;
    res.n_learn = n_learn;
    for (int r = 0; r < cfg.V; ++r) {
        if (errors[static_cast<std::size_t>(r)]) {
            ++res.failed;
            continue;
        }
        const Slot& s = slots[static_cast<std::size_t>(r)];
        res.per_replicate.push_back(s.test);
        res.learning_mse.push_back(s.learn);
        if (s.planes) res.hyperplanes.push_back(*s.planes);
    }
    if (10 * res.failed > cfg.V) {
        std::string why = "unknown error";
        for (const auto& e : errors) {
            if (!e) continue;
            try {
                std::rethrow_exception(e);
            } catch (const std::exception& ex) {
                why = ex.what();
            }
            break;
        }
        throw std::runtime_error("rlt_predictive_error: " + std::to_string(res.failed) + " of " +
                                 std::to_string(cfg.V) + " replicates failed for " + estimator.name() + " (" + why + ")");
    }
    res.mse_rlt = mean(res.per_replicate);
    return res;
}

OptimismResult bootstrap_optimism(const Dataset& data, const Estimator& estimator, const VectorXd& fitted,
                                  double sigma2_hat, const BootstrapConfig& cfg, int threads) {
    cfg.validate();
    if (!(sigma2_hat >= 0.0)) throw std::invalid_argument("bootstrap_optimism: sigma2_hat must be nonnegative");
    const Index n = data.size();
    if (fitted.size() != n) throw std::invalid_argument("bootstrap_optimism: fitted length mismatch");
    const double sd = std::sqrt(cfg.variance_inflation * sigma2_hat);

    MatrixXd ystar(n, cfg.B), yhat(n, cfg.B);
    std::vector<std::optional<int>> planes(static_cast<std::size_t>(cfg.B));
    const auto errors = parallel_for(cfg.B, [&](int b) {
        const std::uint64_t seed = derive_seed(cfg.rng_seed, static_cast<std::uint64_t>(b));
        std::mt19937_64 rng(derive_seed(seed, kBootStream));
        std::normal_distribution<double> noise(0.0, 1.0);
        VectorXd y(n);
        for (Index i = 0; i < n; ++i) y(i) = fitted(i) + sd * noise(rng);
        ystar.col(b) = y;
        const Dataset drawn = data.with_outputs(y);
        if (estimator.requires_positive_outputs() && y.minCoeff() <= 0.0) {
            // Refit on the usable draws, predict everywhere.
            std::vector<Index> keep;
            for (Index i = 0; i < n; ++i)
                if (y(i) > 0.0) keep.push_back(i);
            const auto fit = estimator.fit(drawn.subset(keep), derive_seed(seed, kFitStream));
            yhat.col(b) = fit->predict(data.inputs());
            planes[static_cast<std::size_t>(b)] = fit->hyperplanes();
            return;
        }
        const auto fit = estimator.fit(drawn, derive_seed(seed, kFitStream));
        yhat.col(b) = fit->fitted();
        planes[static_cast<std::size_t>(b)] = fit->hyperplanes();
    }, threads);

    std::vector<Index> ok;
    OptimismResult res;
    for (int b = 0; b < cfg.B; ++b) {
        if (errors[static_cast<std::size_t>(b)]) ++res.failed;
        else ok.push_back(b);
    }
    if (10 * res.failed > cfg.B || ok.size() < 2)
        throw std::runtime_error("bootstrap_optimism: " + std::to_string(res.failed) + " of " +
                                 std::to_string(cfg.B) + " refits failed for " + estimator.name());

    const double m = static_cast<double>(ok.size());
    res.covariances.assign(static_cast<std::size_t>(n), 0.0);
    for (Index i = 0; i < n; ++i) {
        // Centre on the first draw so identical draws give exact zeros.
        const double base = ystar(i, ok.front());
        double shift = 0.0;
        for (Index b : ok) shift += ystar(i, b) - base;
        const double ybar = base + shift / m;
        double c = 0.0;
        for (Index b : ok) c += yhat(i, b) * (ystar(i, b) - ybar);
        res.covariances[static_cast<std::size_t>(i)] = c / (m - 1.0);
    }
    res.optimism = 2.0 * std::accumulate(res.covariances.begin(), res.covariances.end(), 0.0) / static_cast<double>(n);

    double total = 0.0;
    int counted = 0;
    for (Index b : ok) {
        if (const auto& p = planes[static_cast<std::size_t>(b)]) {
            total += *p;
            ++counted;
        }
    }
    res.mean_hyperplanes = counted > 0 ? total / counted : 0.0;
    return res;
}

double sigma2_from_cnls(const Dataset& data, const qp::SolverConfig& solver) {
    return fit_cnls(data, solver).learning_mse;
}

double full_set_error(double mse_rlt, double mse_learn, double optimism, Index n_learn, Index n) {
    if (n <= 0 || n_learn <= 0 || n_learn > n) throw std::invalid_argument("full_set_error: need 0 < nL <= n");
    const double wl = static_cast<double>(n_learn) / static_cast<double>(n);
    const double wt = static_cast<double>(n - n_learn) / static_cast<double>(n);
    if (n_learn == n) return mse_learn + optimism;
    return wt * mse_rlt + wl * (mse_learn + optimism);
}

double r2_fs(double err_fullset, double var_y) {
    if (!(var_y > 0.0)) throw std::invalid_argument("r2: output variance must be positive");
    const double r = 1.0 - err_fullset / var_y;
    return std::clamp(std::isnan(r) ? 0.0 : r, 0.0, 1.0);
}

double r2_pred(double err_pred, double var_y) { return r2_fs(err_pred, var_y); }

ErrorEstimates estimate_errors(const Dataset& data, const Estimator& estimator, double fraction,
                               const SelectionConfig& cfg) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("estimate_errors: fraction must lie in (0, 1]");
    const Index n = data.size();
    const double var_y = data.output_variance();
    ErrorEstimates est;
    est.estimator = estimator.name();
    est.fraction = fraction;

    if (fraction == 1.0) {
        est.n_learn = n;
        const auto fit = estimator.fit(data, derive_seed(cfg.rlt.rng_seed, kFitStream));
        est.mse_learn = fit->learning_mse();
        const double s2 = sigma2_from_cnls(data);
        BootstrapConfig bc = cfg.bootstrap;
        const OptimismResult opt = bootstrap_optimism(data, estimator, fit->fitted(), s2, bc, cfg.threads);
        est.optimism = opt.optimism;
        est.err_insample = est.mse_learn + est.optimism;
        est.err_fullset = full_set_error(0.0, est.mse_learn, est.optimism, n, n);
        est.r2_fs = r2_fs(est.err_fullset, var_y);
        if (fit->hyperplanes()) est.k_avg = opt.mean_hyperplanes;
        est.per_replicate_r2 = {est.r2_fs};
        return est;
    }

    const RltResult rlt = rlt_predictive_error(data, estimator, fraction, cfg.rlt, cfg.threads);
    est.n_learn = rlt.n_learn;
    est.mse_rlt = rlt.mse_rlt;
    est.mse_learn = mean(rlt.learning_mse);
    est.per_replicate = rlt.per_replicate;

    std::vector<double> optimisms;
    for (int j = 0; j < std::min(cfg.optimism_sets, cfg.rlt.V); ++j) {
        const Dataset learn = data.subset(rlt_learning_set(n, rlt.n_learn, cfg.rlt.rng_seed, j));
        try {
            const auto fit = estimator.fit(learn, derive_seed(derive_seed(cfg.rlt.rng_seed, j), kFitStream));
            BootstrapConfig bc = cfg.bootstrap;
            bc.rng_seed = derive_seed(cfg.bootstrap.rng_seed, static_cast<std::uint64_t>(j));
            optimisms.push_back(
                bootstrap_optimism(learn, estimator, fit->fitted(), sigma2_from_cnls(learn), bc, cfg.threads).optimism);
        } catch (const std::exception&) {
            // A learning set the RLT loop also failed on; try the next one.
        }
    }
    if (cfg.optimism_sets > 0 && optimisms.empty())
        throw std::runtime_error("estimate_errors: optimism could not be bootstrapped for " + estimator.name());
    est.optimism = mean(optimisms);
    est.err_insample = est.mse_learn + est.optimism;
    est.err_fullset = full_set_error(rlt.mse_rlt, est.mse_learn, est.optimism, rlt.n_learn, n);
    est.r2_fs = r2_fs(est.err_fullset, var_y);
    est.r2_pred = r2_pred(rlt.mse_rlt, var_y);
    if (!rlt.hyperplanes.empty())
        est.k_avg = std::accumulate(rlt.hyperplanes.begin(), rlt.hyperplanes.end(), 0.0) /
                    static_cast<double>(rlt.hyperplanes.size());
    for (std::size_t r = 0; r < rlt.per_replicate.size(); ++r)
        est.per_replicate_r2.push_back(r2_fs(
            full_set_error(rlt.per_replicate[r], rlt.learning_mse[r], est.optimism, rlt.n_learn, n), var_y));
    return est;
}

std::vector<std::string> MethodComparison::best_set(double fraction) const {
    std::vector<std::string> out;
    for (const auto& row : rows)
        if (row.fraction == fraction && row.best) out.push_back(row.estimator);
    return out;
}

std::string MethodComparison::best_method() const {
    struct Tally {
        std::string name;
        int wins = 0;
        double r2 = 0.0;
        int count = 0;
    };
    std::vector<Tally> tally;
    for (const auto& row : rows) {
        if (!row.r2_fs) continue;
        auto it = std::find_if(tally.begin(), tally.end(), [&](const Tally& t) { return t.name == row.estimator; });
        if (it == tally.end()) it = tally.insert(tally.end(), Tally{row.estimator});
        it->wins += row.best;
        it->r2 += *row.r2_fs;
        ++it->count;
    }
    const Tally* top = nullptr;
    for (const auto& t : tally) {
        if (!top || t.wins > top->wins ||
            (t.wins == top->wins && t.r2 / t.count > top->r2 / top->count))
            top = &t;
    }
    return top ? top->name : std::string();
}

void mark_best(std::vector<ComparisonRow>& rows, double band) {
    std::map<double, std::vector<ComparisonRow*>> groups;
    for (auto& row : rows) groups[row.fraction].push_back(&row);
    for (auto& [fraction, group] : groups) {
        const ComparisonRow* top = nullptr;
        for (const ComparisonRow* row : group)
            if (row->r2_fs && (top == nullptr || *row->r2_fs > *top->r2_fs)) top = row;
        for (ComparisonRow* row : group) {
            row->best = false;
            row->ratio_vs_best.reset();
            row->best_method = top ? top->estimator : std::string();
            if (!top || !row->r2_fs) continue;
            row->best = *row->r2_fs >= *top->r2_fs - band - 1e-12;
            if (*top->r2_fs > 0.0) row->ratio_vs_best = *row->r2_fs / *top->r2_fs;
        }
    }
}

MethodComparison compare_methods(const Dataset& data, const std::string& dataset_name,
                                 const std::vector<const Estimator*>& estimators,
                                 const std::vector<double>& fractions, const SelectionConfig& cfg, double band) {
    MethodComparison cmp;
    cmp.tie_band = band;
    for (double fraction : fractions) {
        for (const Estimator* e : estimators) {
            ComparisonRow row;
            row.dataset = dataset_name;
            row.fraction = fraction;
            row.estimator = e->name();
            try {
                const ErrorEstimates est = estimate_errors(data, *e, fraction, cfg);
                row.r2_fs = est.r2_fs;
                row.r2_pred = est.r2_pred;
                row.k_avg = est.k_avg;
                cmp.estimates.push_back(est);
            } catch (const std::exception& ex) {
                row.error = ex.what();
            }
            cmp.rows.push_back(std::move(row));
        }
    }
    mark_best(cmp.rows, band);
    return cmp;
}

void write_comparison_csv(std::ostream& out, const MethodComparison& cmp) {
    out << "dataset,fraction,estimator,r2_fs,r2_pred,k_avg,best,ratio_vs_best,best_method,error\n";
    for (const auto& r : cmp.rows) {
        std::string err = r.error;
        std::replace(err.begin(), err.end(), '"', '\'');
        out << r.dataset << ',' << io::format_number(r.fraction) << ',' << r.estimator << ','
            << io::format_number(r.r2_fs) << ',' << io::format_number(r.r2_pred) << ','
            << io::format_number(r.k_avg) << ',' << (r.best ? "true" : "false") << ','
            << io::format_number(r.ratio_vs_best) << ',' << r.best_method << ','
            << (err.empty() ? "" : "\"" + err + "\"") << '\n';
    }
}

nlohmann::ordered_json to_json(const MethodComparison& cmp) {
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(); };
    nlohmann::ordered_json j;
    j["tie_band"] = cmp.tie_band;
    j["rows"] = nlohmann::ordered_json::array();
    std::map<double, std::vector<std::string>> best;
    for (const auto& r : cmp.rows) {
        nlohmann::ordered_json row;
        row["dataset"] = r.dataset;
        row["fraction"] = r.fraction;
        row["estimator"] = r.estimator;
        row["r2_fs"] = opt(r.r2_fs);
        row["r2_pred"] = opt(r.r2_pred);
        row["k_avg"] = opt(r.k_avg);
        row["best"] = r.best;
        row["ratio_vs_best"] = opt(r.ratio_vs_best);
        row["best_method"] = r.best_method;
        if (!r.error.empty()) row["error"] = r.error;
        j["rows"].push_back(row);
        if (r.best) best[r.fraction].push_back(r.estimator);
    }
    j["best_set"] = nlohmann::ordered_json::array();
    for (const auto& [fraction, names] : best) j["best_set"].push_back({{"fraction", fraction}, {"estimators", names}});
    return j;
}

}  // namespace frontier
