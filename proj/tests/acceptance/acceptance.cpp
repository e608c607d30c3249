// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.
// Every tolerance used below is fixed here.

#include "../oracles/oracles.hpp"

#include "frontier/estimators.hpp"
#include "frontier/qp.hpp"
#include "frontier/selection.hpp"
#include "frontier/simlab.hpp"
#include "frontier/survey.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace frontier;

namespace {

// Criterion 1 windows.
constexpr double kCapnlsIsfLo = 0.0015, kCapnlsIsfHi = 0.0035;
constexpr double kCnlsIsfLo = 0.0018, kCnlsIsfHi = 0.0045;
constexpr double kCapIsfLo = 0.004, kCapIsfHi = 0.011;
// Criterion 2 windows.
constexpr double kCapnlsKLo = 6, kCapnlsKHi = 12;
constexpr double kCapKLo = 1, kCapKHi = 4;
constexpr double kCnlsPlanesLo = 40, kCnlsPlanesHi = 80;
// Criterion 3.
constexpr double kOverfitRatio = 100.0;
// Criterion 4.
constexpr double kNoiseShare = 0.5532, kNoiseShareTol = 0.03;
// Criterion 5.
constexpr double kOptimism = 0.04, kOptimismRelTol = 0.10;
// Criterion 6.
constexpr double kObjectiveRelTol = 1e-6, kFeasTol = 1e-6;
// Criterion 7.
constexpr double kExactMse = 1e-10, kCdaTol = 1e-4, kCdmTol = 1e-10;
// Criterion 9.
constexpr double kBand = 0.02, kSpearman = 0.8;

constexpr int kReplicates = 20;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        if (!detail.empty()) detail += "; ";
        detail += what + (ok ? "" : " [out of range]");
    }
};

std::string fmt(double v, int prec = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

bool within(double v, double lo, double hi) { return v >= lo && v <= hi; }

const MetricsRow& find_row(const std::vector<MetricsRow>& rows, const std::string& est, Index nl, Index nf) {
    for (const auto& r : rows)
        if (r.estimator == est && r.n_learn == nl && r.n_full == nf) return r;
    throw std::runtime_error("missing metrics row for " + est);
}

ExperimentConfig bivariate(double sigma, std::vector<SimCell> cells, std::vector<std::string> estimators,
                           std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.dgp = DGPSpec::bivariate(sigma);
    cfg.cells = std::move(cells);
    cfg.V = kReplicates;
    cfg.W = 30;
    cfg.n_test = 1000;
    cfg.estimators = std::move(estimators);
    cfg.rng_seed = seed;
    return cfg;
}

// Rows collected by the simulation criteria, reused for the identities.
std::vector<MetricsRow> g_rows;
std::vector<MetricsRow> g_sigma02;

Outcome census_accuracy() {
    g_sigma02 = run_experiment(bivariate(0.2, {{100, 100}, {100, 50}}, {"capnls", "cnls", "cap"}, 20240201));
    g_rows.insert(g_rows.end(), g_sigma02.begin(), g_sigma02.end());
    Outcome o;
    const double capnls = find_row(g_sigma02, "capnls", 100, 100).mse_is_f;
    const double cnls = find_row(g_sigma02, "cnls", 100, 100).mse_is_f;
    const double cap = find_row(g_sigma02, "cap", 100, 100).mse_is_f;
    o.require(within(capnls, kCapnlsIsfLo, kCapnlsIsfHi), "CAP-NLS MSE_ISf " + fmt(capnls));
    o.require(within(cnls, kCnlsIsfLo, kCnlsIsfHi), "CNLS MSE_ISf " + fmt(cnls));
    o.require(within(cap, kCapIsfLo, kCapIsfHi), "CAP MSE_ISf " + fmt(cap));
    return o;
}

Outcome complexity() {
    const auto rows = run_experiment(bivariate(0.1, {{100, 100}}, {"capnls", "cap", "cnls"}, 20240202));
    g_rows.insert(g_rows.end(), rows.begin(), rows.end());
    Outcome o;
    const double capnls = *find_row(rows, "capnls", 100, 100).k_avg;
    const double cap = *find_row(rows, "cap", 100, 100).k_avg;
    const double cnls = *find_row(rows, "cnls", 100, 100).k_avg;
    o.require(within(capnls, kCapnlsKLo, kCapnlsKHi), "CAP-NLS K " + fmt(capnls));
    o.require(within(cap, kCapKLo, kCapKHi), "CAP K " + fmt(cap));
    o.require(within(cnls, kCnlsPlanesLo, kCnlsPlanesHi), "CNLS distinct planes " + fmt(cnls));
    return o;
}

Outcome overfitting() {
    Outcome o;
    const double cnls = find_row(g_sigma02, "cnls", 50, 100).mse_f;
    const double capnls = find_row(g_sigma02, "capnls", 50, 100).mse_f;
    o.require(cnls >= kOverfitRatio * capnls,
              "CNLS MSE_f " + fmt(cnls) + " vs CAP-NLS " + fmt(capnls) + " (ratio " + fmt(cnls / capnls) + ")");
    return o;
}

Outcome noise_recovery() {
    const auto rows = run_experiment(bivariate(0.2, {{300, 300}}, {"capnls"}, 20240204));
    g_rows.insert(g_rows.end(), rows.begin(), rows.end());
    Outcome o;
    const double share = rows.front().mse_fs_y_over_var_y;
    o.require(std::abs(share - kNoiseShare) <= kNoiseShareTol, "MSE_FSy/Var(Y) " + fmt(100.0 * share, 4) + "%");
    return o;
}

Outcome optimism_oracle() {
    const Index n = 100;
    const oracle::OlsEstimator ols;
    double total = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        std::mt19937_64 rng(1000 + s);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::normal_distribution<double> z(0.0, 1.0);
        MatrixXd x(n, 1);
        VectorXd y(n);
        for (Index i = 0; i < n; ++i) {
            x(i, 0) = u(rng);
            y(i) = 1.0 + 2.0 * x(i, 0) + z(rng);
        }
        const Dataset data(x, y);
        BootstrapConfig cfg;
        cfg.B = 500;
        cfg.rng_seed = s;
        total += bootstrap_optimism(data, ols, ols.fit(data, 0)->fitted(), 1.0, cfg).optimism;
    }
    const double mean = total / 20.0;
    Outcome o;
    o.require(std::abs(mean - kOptimism) <= kOptimismRelTol * kOptimism, "mean optimism " + fmt(mean));
    return o;
}

Outcome qp_equivalence() {
    std::mt19937_64 rng(606);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    std::normal_distribution<double> z(0.0, 0.3);
    Outcome o;
    double worst_obj = 0.0, worst_feas = 0.0;
    int failures = 0;
    for (int t = 0; t < 50; ++t) {
        const Index d = 1 + t % 2;
        const int K = 1 + (t / 2) % 3;
        const Index n = std::max<Index>(K, 2 + static_cast<Index>(u(rng) * 7.0));  // 2..8
        MatrixXd x(n, d);
        VectorXd y(n);
        for (Index i = 0; i < n; ++i) {
            double f = 0.0;
            for (Index j = 0; j < d; ++j) {
                x(i, j) = u(rng);
                f += std::sqrt(x(i, j));
            }
            y(i) = f + z(rng);
        }
        Partition p;
        p.regions = K;
        for (Index i = 0; i < n; ++i) p.assignment.push_back(static_cast<int>(i % K));
        std::shuffle(p.assignment.begin(), p.assignment.end(), rng);
        const Dataset data(x, y);

        const qp::QPProblem problem = qp::assemble_qp(data, p);
        const qp::QPSolution sol = qp::solve(problem);
        const oracle::DenseQP dense = oracle::dense_qp(data, p.assignment, K);
        const oracle::EnumerationResult e = oracle::enumerate_active_sets(dense, d, K);
        if (sol.status != qp::SolveStatus::optimal) {
            ++failures;
            continue;
        }
        const double obj = 0.5 * sol.beta.dot(dense.H * sol.beta) + dense.g.dot(sol.beta);
        const double rel = std::abs(obj - e.objective) / std::max(1.0, std::abs(e.objective));
        double feas = std::max(0.0, (dense.A * sol.beta).maxCoeff());
        for (int k = 0; k < K; ++k)
            for (Index j = 1; j <= d; ++j) feas = std::max(feas, -sol.beta(k * (d + 1) + j));
        worst_obj = std::max(worst_obj, rel);
        worst_feas = std::max(worst_feas, feas);
    }
    o.require(failures == 0, std::to_string(50 - failures) + "/50 solved");
    o.require(worst_obj <= kObjectiveRelTol, "max relative objective gap " + fmt(worst_obj, 3));
    o.require(worst_feas <= kFeasTol, "max Afriat/monotonicity violation " + fmt(worst_feas, 3));
    return o;
}

Outcome exact_recovery() {
    Outcome o;
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    const Index n = 60;
    MatrixXd x(n, 2);
    VectorXd y(n);
    for (Index i = 0; i < n; ++i) {
        x(i, 0) = u(rng);
        x(i, 1) = u(rng);
        y(i) = 0.5 + 2.0 * x(i, 0) + x(i, 1);
    }
    const Dataset lin(x, y);
    const double cnls = fit_cnls(lin).learning_mse;
    const double cap = fit_cap(lin, CapNlsParams{}).model.learning_mse;
    const AdaptiveFit capnls = fit_capnls(lin, CapNlsParams{});
    o.require(cnls <= kExactMse, "CNLS MSE " + fmt(cnls, 3));
    o.require(cap <= kExactMse, "CAP MSE " + fmt(cap, 3));
    o.require(capnls.model.learning_mse <= kExactMse, "CAP-NLS MSE " + fmt(capnls.model.learning_mse, 3));
    o.require(capnls.model.size() == 1, "CAP-NLS K " + std::to_string(capnls.model.size()));

    std::mt19937_64 cd_rng(78);
    const Dataset cd = generate(DGPSpec::bivariate(0.0), 100, cd_rng);
    const CobbDouglasModel cda = fit_cd_additive(cd);
    const CobbDouglasModel cdm = fit_cd_multiplicative(cd);
    const double cda_err = std::max({std::abs(cda.exponents(0) - 0.4), std::abs(cda.exponents(1) - 0.5),
                                     std::abs(cda.scale - 1.0)});
    const double cdm_err = std::max({std::abs(cdm.exponents(0) - 0.4), std::abs(cdm.exponents(1) - 0.5),
                                     std::abs(cdm.scale - 1.0)});
    o.require(cda_err <= kCdaTol, "CDA error " + fmt(cda_err, 3));
    o.require(cdm_err <= kCdmTol, "CDM error " + fmt(cdm_err, 3));
    return o;
}

Outcome identities() {
    Outcome o;
    int blend_bad = 0;
    for (const auto& r : g_rows) {
        const double wl = static_cast<double>(r.n_learn) / static_cast<double>(r.n_full);
        const double wt = static_cast<double>(r.n_full - r.n_learn) / static_cast<double>(r.n_full);
        if (r.mse_fs_f != wl * r.mse_is_f + wt * r.mse_f) ++blend_bad;
        if (r.mse_fs_y != wl * r.mse_is_y + wt * r.mse_y) ++blend_bad;
    }
    o.require(blend_bad == 0 && !g_rows.empty(), "blend identity on " + std::to_string(g_rows.size()) + " rows");

    std::mt19937_64 rng(8);
    const Dataset data = generate(DGPSpec::bivariate(0.2), 60, rng);
    SelectionConfig cfg;
    cfg.bootstrap.B = 50;
    bool census_ok = true, clip_ok = true;
    for (const std::string name : {"capnls", "cap", "cda"}) {
        const ErrorEstimates e = estimate_errors(data, *make_estimator(name), 1.0, cfg);
        census_ok = census_ok && e.err_fullset == e.mse_learn + e.optimism;
        clip_ok = clip_ok && within(e.r2_fs, 0.0, 1.0);
    }
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (int t = 0; t < 10000; ++t) {
        const double v = u(rng) + 1e-6;
        clip_ok = clip_ok && within(r2_fs(u(rng), v), 0.0, 1.0) && within(r2_pred(u(rng), v), 0.0, 1.0);
    }
    o.require(census_ok, "census error = learning MSE + optimism");
    o.require(clip_ok, "R2 within [0, 1]");
    return o;
}

std::vector<SyntheticIndustry> synthetic_industries() {
    std::vector<SyntheticIndustry> out;
    const double noise[] = {0.15, 0.35, 0.6};
    for (int k = 0; k < 3; ++k) {
        SyntheticIndustry s;
        s.code = std::to_string(2811 + 10 * k);
        s.n = 150;
        s.noise_ratio = noise[k];
        out.push_back(s);
    }
    return out;
}

SelectionConfig survey_selection() {
    SelectionConfig cfg;
    cfg.rlt.V = kReplicates;
    cfg.rlt.rng_seed = 0x51;
    cfg.bootstrap.B = 200;
    cfg.bootstrap.rng_seed = 0x62;
    return cfg;
}

Outcome survey_pipeline() {
    Outcome o;
    const auto rows = generate_synthetic_survey(synthetic_industries(), 11);
    std::ostringstream csv;
    write_survey_csv(csv, rows);
    std::istringstream in(csv.str());
    const SurveyLoad load = load_survey(in);
    const std::vector<double> fractions{0.2, 0.3, 0.4, 0.5, 1.0};
    const SelectionConfig cfg = survey_selection();

    std::vector<std::unique_ptr<Estimator>> owned;
    std::vector<const Estimator*> ests;
    for (const std::string name : {"capnls", "cap", "cda", "cdm"}) {
        owned.push_back(make_estimator(name));
        ests.push_back(owned.back().get());
    }

    bool structure = true, ratio = true;
    for (const auto& code : industry_codes(load.records)) {
        const IndustryDataset ind = build_industry_dataset(load.records, code);
        const MethodComparison cmp = compare_methods(ind.data, code, ests, fractions, cfg, kBand);
        for (double f : fractions) {
            double top = -1.0;
            std::string top_name;
            for (const auto& r : cmp.rows)
                if (r.fraction == f && r.r2_fs && *r.r2_fs > top) {
                    top = *r.r2_fs;
                    top_name = r.estimator;
                }
            const auto best = cmp.best_set(f);
            structure = structure && top >= 0.0 && !best.empty() &&
                        std::find(best.begin(), best.end(), top_name) != best.end();
            for (const auto& r : cmp.rows) {
                if (r.fraction != f) continue;
                if (!r.r2_fs) {
                    structure = structure && !r.best && !r.error.empty();
                    continue;
                }
                const bool in_band = *r.r2_fs >= top - kBand;
                structure = structure && r.best == in_band && r.best_method == top_name;
                ratio = ratio && r.ratio_vs_best && std::abs(*r.ratio_vs_best - *r.r2_fs / top) <= 1e-12;
            }
        }
        // The curve is reported for the industry's best method.
        const std::string best = cmp.best_method();
        std::vector<ErrorEstimates> own;
        for (const auto& e : cmp.estimates)
            if (e.estimator == best) own.push_back(e);
        const SubsampleCurve curve = curve_from_estimates(own);
        std::vector<double> fr, r2;
        for (const auto& p : curve.points) {
            fr.push_back(p.fraction);
            r2.push_back(p.mean_r2);
        }
        const double rho = fr.size() == fractions.size() ? oracle::spearman(fr, r2) : 0.0;
        o.require(rho >= kSpearman, "Spearman " + code + " (" + best + ") " + fmt(rho, 3));
    }
    o.require(structure, "best sets within the 2% band");
    o.require(ratio, "ratio = R2 / best R2");
    return o;
}

Outcome determinism() {
    Outcome o;
    ExperimentConfig cfg = bivariate(0.2, {{60, 60}, {60, 30}}, {"capnls", "cap", "cnls", "cda", "cdm"}, 99);
    cfg.V = 4;
    auto metrics = [&](int threads) {
        ExperimentConfig c = cfg;
        c.threads = threads;
        std::ostringstream os;
        write_metrics_csv(os, run_experiment(c));
        return os.str();
    };
    const std::string a = metrics(1);
    o.require(a == metrics(1) && a == metrics(2), "metrics CSV identical across reruns and thread counts");

    std::mt19937_64 rng(5);
    const Dataset data = generate(DGPSpec::bivariate(0.2), 60, rng);
    SelectionConfig sc;
    sc.rlt.V = 5;
    sc.bootstrap.B = 20;
    auto compare = [&]() {
        const auto capnls = make_estimator("capnls");
        const auto cda = make_estimator("cda");
        const MethodComparison cmp = compare_methods(data, "x", {capnls.get(), cda.get()}, {0.5, 1.0}, sc);
        std::ostringstream os;
        write_comparison_csv(os, cmp);
        return os.str() + to_json(cmp).dump();
    };
    o.require(compare() == compare(), "comparison artifacts identical across reruns");
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"census MSE_ISf windows (d=2, sigma=0.2, n=100)", census_accuracy},
        {"hyperplane counts (d=2, sigma=0.1, n=100)", complexity},
        {"CNLS overfitting ratio (nL=50, nF=100)", overfitting},
        {"noise share at census n=300", noise_recovery},
        {"bootstrap optimism of OLS", optimism_oracle},
        {"QP solver vs active-set enumeration", qp_equivalence},
        {"exact recovery", exact_recovery},
        {"framework identities", identities},
        {"synthetic survey selection pipeline", survey_pipeline},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t c = 0; c < criteria.size(); ++c) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[c].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += !o.pass;
        std::cout << "criterion " << c + 1 << ": " << (o.pass ? "PASS" : "FAIL") << " : " << criteria[c].first << " : "
                  << o.detail << " (" << fmt(secs, 3) << " s)" << std::endl;
    }
    std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << std::endl;
    return failed ? 1 : 0;
}
