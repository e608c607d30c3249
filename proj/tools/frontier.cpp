// Command-line driver: simulate | fit | select | validate | generate.

#include "frontier/estimator.hpp"
#include "frontier/io.hpp"
#include "frontier/parallel.hpp"
#include "frontier/selection.hpp"
#include "frontier/simlab.hpp"
#include "frontier/survey.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <ceres/version.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace frontier;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "1.0.0";

/// Errors the user can fix by changing arguments or config (exit 2).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw UsageError(path + ": " + e.what());
    }
}

/// --seed beats FRONTIER_SEED, which beats the config file.
std::uint64_t resolve_seed(std::uint64_t config_seed, const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("FRONTIER_SEED")) {
        try {
            std::size_t used = 0;
            const auto v = std::stoull(env, &used);
            if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw UsageError(std::string("FRONTIER_SEED is not an unsigned integer: ") + env);
        }
    }
    return config_seed;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

class Manifest {
public:
    Manifest(std::string command, fs::path dir) : command_(std::move(command)), dir_(std::move(dir)) {
        start_ = std::chrono::steady_clock::now();
    }

    void config(ojson c) { config_ = std::move(c); }
    void seed(std::uint64_t s) { seed_ = s; }

    template <typename Writer>
    void write(const std::string& name, Writer&& writer) {
        const fs::path p = dir_ / name;
        std::ofstream out(p);
        if (!out) throw std::runtime_error("cannot write " + p.string());
        writer(out);
        if (!out) throw std::runtime_error("write failed for " + p.string());
        outputs_.push_back(name);  // relative to the manifest
    }

    void finish() {
        ojson m;
        m["command"] = command_;
        m["config"] = config_;
        m["seed"] = seed_;
        m["versions"] = {{"frontier", kVersion},
                         {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                       std::to_string(EIGEN_MINOR_VERSION)},
                         {"ceres", CERES_VERSION_STRING}};
        m["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        m["outputs"] = outputs_;
        std::ofstream out(dir_ / "manifest.json");
        out << m.dump(2) << '\n';
    }

private:
    std::string command_;
    fs::path dir_;
    ojson config_;
    std::uint64_t seed_ = 0;
    std::vector<std::string> outputs_;
    std::chrono::steady_clock::time_point start_;
};

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create " + dir + ": " + ec.message());
}

// simulate ------------------------------------------------------------------

struct SimulateArgs {
    std::string config;
    std::string out = "sim_out";
    std::optional<std::uint64_t> seed;
    std::optional<int> V;
    bool dry_run = false;
};

int run_simulate(const SimulateArgs& a) {
    ExperimentConfig cfg;
    try {
        cfg = experiment_config_from_json(read_json_file(a.config));
        if (a.V) cfg.V = *a.V;
        cfg.rng_seed = resolve_seed(cfg.rng_seed, a.seed);
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(a.config + ": " + e.what());
    } catch (const json::exception& e) {
        throw UsageError(a.config + ": " + e.what());
    }
    if (a.dry_run) {
        std::cout << "config ok: " << cfg.grid().size() << " cells x " << cfg.estimators.size() << " estimators, V="
                  << cfg.V << '\n';
        return 0;
    }
    ensure_dir(a.out);
    Manifest manifest("simulate", a.out);
    manifest.config(to_json(cfg));
    manifest.seed(cfg.rng_seed);
    const auto rows = run_experiment(cfg);
    manifest.write("metrics.csv", [&](std::ostream& o) { write_metrics_csv(o, rows); });
    manifest.write("timing.csv", [&](std::ostream& o) { write_timing_csv(o, rows); });
    manifest.finish();
    write_metrics_csv(std::cout, rows);
    return 0;
}

// fit -----------------------------------------------------------------------

struct FitArgs {
    std::string data;
    std::string industry;
    std::string estimator;
    std::string params;
    std::string out = "model.json";
    std::optional<std::uint64_t> seed;
    bool validate = false;
};

Dataset load_fit_data(const std::string& path, const std::string& industry) {
    if (!industry.empty()) {
        const SurveyLoad load = load_survey(path);
        return build_industry_dataset(load.records, industry).data;
    }
    return io::read_dataset_csv(path);
}

int run_fit(const FitArgs& a) {
    EstimatorOptions opts;
    std::unique_ptr<Estimator> est;
    try {
        if (!a.params.empty()) opts = estimator_options_from_json(read_json_file(a.params));
        est = make_estimator(a.estimator, opts);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const Dataset data = load_fit_data(a.data, a.industry);
    const std::uint64_t seed = resolve_seed(0, a.seed);

    const auto t0 = std::chrono::steady_clock::now();
    const auto fit = est->fit(data, seed);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    ojson doc = fit->to_json();
    {
        std::ofstream out(a.out);
        if (!out) throw std::runtime_error("cannot write " + a.out);
        out << doc.dump(2) << '\n';
    }
    ojson report;
    report["estimator"] = est->name();
    report["n"] = data.size();
    report["d"] = data.dims();
    report["learning_mse"] = fit->learning_mse();
    report["K"] = fit->hyperplanes() ? ojson(*fit->hyperplanes()) : ojson();
    report["runtime_seconds"] = seconds;
    report["seed"] = seed;
    report["model"] = a.out;
    int status = 0;
    if (a.validate) {
        if (const auto* pw = dynamic_cast<const PiecewiseFit*>(fit.get())) {
            const ModelDiagnostics diag = validate_model(pw->model(), data);
            report["validation"] = {{"max_afriat_violation", diag.max_afriat_violation},
                                    {"min_slope", diag.min_slope},
                                    {"envelope_gap", diag.envelope_gap},
                                    {"monotone", diag.monotone},
                                    {"feasible", diag.feasible}};
            if (!diag.feasible || !diag.monotone) status = 1;
        }
    }
    std::cout << report.dump(2) << '\n';
    return status;
}

// validate ------------------------------------------------------------------

struct ValidateArgs {
    std::string model;
    std::string data;
    std::string industry;
};

int run_validate(const ValidateArgs& a) {
    const json doc = read_json_file(a.model);
    const Dataset data = load_fit_data(a.data, a.industry);
    ojson report;
    bool ok = true;
    if (doc.contains("hyperplanes")) {
        PiecewiseLinearModel model;
        try {
            model = model_from_json(doc);
        } catch (const std::exception& e) {
            throw UsageError(a.model + ": " + e.what());
        }
        if (model.dims() != data.dims()) throw UsageError("model and data dimensions differ");
        if (model.partition && model.partition->size() != data.size())
            throw UsageError("model assignment length differs from the data size");
        const ModelDiagnostics diag = validate_model(model, data);
        report = {{"K", model.size()},
                  {"max_afriat_violation", diag.max_afriat_violation},
                  {"min_slope", diag.min_slope},
                  {"learning_mse", diag.learning_mse},
                  {"stored_learning_mse", model.learning_mse},
                  {"envelope_gap", diag.envelope_gap},
                  {"monotone", diag.monotone},
                  {"feasible", diag.feasible}};
        ok = diag.feasible && diag.monotone;
    } else if (doc.contains("exponents")) {
        CobbDouglasModel m;
        m.scale = doc.at("scale").get<double>();
        const auto e = doc.at("exponents").get<std::vector<double>>();
        m.exponents = Eigen::Map<const VectorXd>(e.data(), static_cast<Index>(e.size()));
        if (m.exponents.size() != data.dims()) throw UsageError("model and data dimensions differ");
        const double min_exp = m.exponents.minCoeff();
        report = {{"min_exponent", min_exp},
                  {"learning_mse", mean_squared_error(m.predict(data.inputs()), data.outputs())},
                  {"monotone", min_exp >= 0.0}};
        ok = min_exp >= 0.0 && m.scale >= 0.0;
    } else {
        throw UsageError(a.model + ": not a model document");
    }
    report["valid"] = ok;
    std::cout << report.dump(2) << '\n';
    return ok ? 0 : 1;
}

// select --------------------------------------------------------------------

struct SelectArgs {
    std::string survey;
    std::string config;
    std::vector<std::string> industries;
    std::string fractions;
    std::string estimators;
    std::string curve_estimator;
    std::string out = "select_out";
    std::optional<std::uint64_t> seed;
    std::optional<int> V;
    std::optional<int> B;
    std::optional<double> rho;
};

int run_select(const SelectArgs& a) {
    SelectionConfig cfg;
    std::vector<double> fractions{0.2, 0.3, 0.4, 0.5, 1.0};
    std::vector<std::string> names{"capnls", "cap", "cda", "cdm"};
    std::string curve_name = "best";  // the industry's best method
    double rho = 0.75;
    EstimatorOptions opts;
    std::uint64_t seed = 0;
    try {
        json j = a.config.empty() ? json::object() : read_json_file(a.config);
        if (j.contains("fractions")) fractions = j.at("fractions").get<std::vector<double>>();
        if (j.contains("estimators")) names = j.at("estimators").get<std::vector<std::string>>();
        if (j.contains("curve_estimator")) curve_name = j.at("curve_estimator").get<std::string>();
        rho = j.value("rho", rho);
        seed = j.value("seed", seed);
        if (j.contains("options")) opts = estimator_options_from_json(j.at("options"));
        for (const char* k : {"fractions", "estimators", "curve_estimator", "rho", "seed", "options", "description"})
            j.erase(k);
        cfg = selection_config_from_json(j);
        if (!a.fractions.empty()) {
            fractions.clear();
            for (const auto& f : split_list(a.fractions)) fractions.push_back(std::stod(f));
        }
        if (!a.estimators.empty()) names = split_list(a.estimators);
        if (!a.curve_estimator.empty()) curve_name = a.curve_estimator;
        if (a.V) cfg.rlt.V = *a.V;
        if (a.B) cfg.bootstrap.B = *a.B;
        if (a.rho) rho = *a.rho;
        seed = resolve_seed(seed, a.seed);
        cfg.rlt.rng_seed = seed;
        cfg.bootstrap.rng_seed = derive_seed(seed, 0x62);
        for (double f : fractions)
            if (!(f > 0.0 && f <= 1.0)) throw std::invalid_argument("fractions must lie in (0, 1]");
        std::vector<double> sub;
        for (double f : fractions)
            if (f < 1.0) sub.push_back(f);
        if (!sub.empty()) cfg.rlt.fractions = sub;
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    } catch (const json::exception& e) {
        throw UsageError(e.what());
    }

    std::vector<std::unique_ptr<Estimator>> owned;
    std::vector<const Estimator*> ests;
    try {
        for (const auto& n : names) {
            owned.push_back(make_estimator(n, opts));
            ests.push_back(owned.back().get());
        }
        if (curve_name != "best") owned.push_back(make_estimator(curve_name, opts));
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    const SurveyLoad load = load_survey(a.survey);
    for (const auto& r : load.rejected)
        std::cerr << a.survey << ":" << r.line << ": rejected (" << r.reason << ")\n";
    const std::vector<std::string> codes = a.industries.empty() ? industry_codes(load.records) : a.industries;

    ensure_dir(a.out);
    Manifest manifest("select", a.out);
    ojson snap = to_json(cfg);
    snap["fractions"] = fractions;
    snap["estimators"] = names;
    snap["curve_estimator"] = curve_name;
    snap["rho"] = rho;
    snap["options"] = to_json(opts);
    snap["survey"] = a.survey;
    snap["industries"] = codes;
    manifest.config(snap);
    manifest.seed(seed);

    MethodComparison all;
    std::vector<SubsampleCurve> curves;
    ojson summary = ojson::array();
    for (const auto& code : codes) {
        const IndustryDataset ind = build_industry_dataset(load.records, code);
        MethodComparison cmp = compare_methods(ind.data, code, ests, fractions, cfg);
        all.rows.insert(all.rows.end(), cmp.rows.begin(), cmp.rows.end());
        const std::string best = cmp.best_method();
        const std::string curve_for = curve_name == "best" ? best : owned.back()->name();
        if (curve_for.empty()) throw std::runtime_error("industry " + code + ": every estimator failed");
        std::vector<ErrorEstimates> reuse;
        for (const auto& e : cmp.estimates)
            if (e.estimator == curve_for) reuse.push_back(e);
        SubsampleCurve curve;
        if (reuse.size() == fractions.size()) {
            curve = curve_from_estimates(reuse);
        } else {
            const auto it = std::find_if(owned.begin(), owned.end(), [&](const auto& e) { return e->name() == curve_for; });
            curve = subsample_curve(ind.data, **it, fractions, cfg);
        }
        curve.industry_code = code;
        std::optional<double> needed;
        if (std::find(fractions.begin(), fractions.end(), 1.0) != fractions.end()) needed = survey_size_query(curve, rho);
        summary.push_back({{"industry_code", code},
                           {"n", ind.data.size()},
                           {"dropped_count", ind.dropped_count},
                           {"best_method", best},
                           {"curve_estimator", curve.estimator},
                           {"rho", rho},
                           {"required_fraction", needed ? ojson(*needed) : ojson()}});
        curves.push_back(std::move(curve));
    }
    manifest.write("comparison.csv", [&](std::ostream& o) { write_comparison_csv(o, all); });
    manifest.write("comparison.json", [&](std::ostream& o) { o << to_json(all).dump(2) << '\n'; });
    manifest.write("curve.csv", [&](std::ostream& o) { write_curve_csv(o, curves); });
    manifest.write("summary.json", [&](std::ostream& o) { o << summary.dump(2) << '\n'; });
    manifest.finish();
    write_comparison_csv(std::cout, all);
    return 0;
}

// generate ------------------------------------------------------------------

struct GenerateArgs {
    std::string kind = "dgp";
    std::string dgp = "bivariate";
    double sigma = 0.1;
    int n = 100;
    int industries = 3;
    std::string out;
    std::optional<std::uint64_t> seed;
};

int run_generate(const GenerateArgs& a) {
    const std::uint64_t seed = resolve_seed(0, a.seed);
    std::ofstream out(a.out);
    if (!out) throw std::runtime_error("cannot write " + a.out);
    if (a.kind == "dgp") {
        DGPSpec spec;
        if (a.dgp == "bivariate") spec = DGPSpec::bivariate(a.sigma);
        else if (a.dgp == "trivariate") spec = DGPSpec::trivariate(a.sigma);
        else if (a.dgp == "fourvariate") spec = DGPSpec::fourvariate(a.sigma);
        else throw UsageError("unknown dgp '" + a.dgp + "'");
        std::mt19937_64 rng(seed);
        io::write_dataset_csv(out, generate(spec, a.n, rng));
    } else {
        std::vector<SyntheticIndustry> inds;
        const double noise[] = {0.15, 0.35, 0.6, 0.25, 0.45};
        for (int k = 0; k < a.industries; ++k) {
            SyntheticIndustry ind;
            ind.code = std::to_string(2811 + 10 * k);
            ind.n = a.n;
            ind.noise_ratio = noise[k % 5];
            inds.push_back(ind);
        }
        write_survey_csv(out, generate_synthetic_survey(inds, seed));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shape-constrained production frontier estimation"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    app.set_version_flag("--version", kVersion);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo experiment");
    simulate->add_option("config", sim.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    simulate->add_option("-o,--out", sim.out, "Output directory");
    simulate->add_option("--seed", sim.seed, "Override the config seed");
    simulate->add_option("--replicates", sim.V, "Override V")->check(CLI::PositiveNumber);
    simulate->add_flag("--dry-run", sim.dry_run, "Validate the config only");

    FitArgs fit;
    auto* fitc = app.add_subcommand("fit", "Fit one estimator to a dataset");
    fitc->add_option("data", fit.data, "CSV with x1..xd,y columns, or a survey file with --industry")
        ->required()
        ->check(CLI::ExistingFile);
    fitc->add_option("-e,--estimator", fit.estimator, "cnls | capnls | capnlsf | cap | cda | cdm")->required();
    fitc->add_option("--industry", fit.industry, "Industry code when DATA is a survey file");
    fitc->add_option("--params", fit.params, "Estimator options (JSON)")->check(CLI::ExistingFile);
    fitc->add_option("-o,--out", fit.out, "Model output path");
    fitc->add_option("--seed", fit.seed, "Random seed");
    fitc->add_flag("--validate", fit.validate, "Check the fitted model's constraints");

    ValidateArgs val;
    auto* valc = app.add_subcommand("validate", "Check a fitted model against its data");
    valc->add_option("model", val.model, "Model JSON")->required()->check(CLI::ExistingFile);
    valc->add_option("data", val.data, "Learning data CSV")->required()->check(CLI::ExistingFile);
    valc->add_option("--industry", val.industry, "Industry code when DATA is a survey file");

    SelectArgs sel;
    auto* selc = app.add_subcommand("select", "Compare estimators on survey industries");
    selc->add_option("survey", sel.survey, "Survey CSV")->required()->check(CLI::ExistingFile);
    selc->add_option("-c,--config", sel.config, "Selection config (JSON)")->check(CLI::ExistingFile);
    selc->add_option("--industry", sel.industries, "Industry code (repeatable; default all)");
    selc->add_option("--fractions", sel.fractions, "Comma-separated learning fractions, 1.0 for the census");
    selc->add_option("--estimators", sel.estimators, "Comma-separated estimator names");
    selc->add_option("--curve-estimator", sel.curve_estimator, "Estimator for the subsample curve, or 'best'");
    selc->add_option("-o,--out", sel.out, "Output directory");
    selc->add_option("--seed", sel.seed, "Override the config seed");
    selc->add_option("--replicates", sel.V, "Override V")->check(CLI::Range(2, 1000000));
    selc->add_option("--bootstrap", sel.B, "Override B")->check(CLI::Range(2, 1000000));
    selc->add_option("--rho", sel.rho, "Share of the census R2 for the survey-size query")->check(CLI::Range(0.0, 1.0));

    GenerateArgs gen;
    auto* genc = app.add_subcommand("generate", "Write synthetic data");
    genc->add_option("kind", gen.kind, "dgp | survey")->check(CLI::IsMember({"dgp", "survey"}));
    genc->add_option("-o,--out", gen.out, "Output CSV")->required();
    genc->add_option("--dgp", gen.dgp, "bivariate | trivariate | fourvariate");
    genc->add_option("--sigma", gen.sigma, "Noise standard deviation")->check(CLI::NonNegativeNumber);
    genc->add_option("-n", gen.n, "Observations (per industry for surveys)")->check(CLI::PositiveNumber);
    genc->add_option("--industries", gen.industries, "Number of synthetic industries")->check(CLI::Range(1, 50));
    genc->add_option("--seed", gen.seed, "Random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    set_default_threads(threads);

    try {
        if (*simulate) return run_simulate(sim);
        if (*fitc) return run_fit(fit);
        if (*valc) return run_validate(val);
        if (*selc) return run_select(sel);
        if (*genc) return run_generate(gen);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
