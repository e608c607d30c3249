#include "frontier/estimator.hpp"

#include <set>
#include <stdexcept>

namespace frontier {

PiecewiseFit::PiecewiseFit(PiecewiseLinearModel model, const Dataset& data, bool count_distinct)
    : model_(std::move(model)) {
    fitted_ = model_.partition ? evaluate_in_sample(model_, data) : frontier::predict(model_, data.inputs());
    planes_ = count_distinct ? count_distinct_planes(model_) : model_.size();
}

ParametricFit::ParametricFit(CobbDouglasModel model, const Dataset& data) : model_(std::move(model)) {
    fitted_ = model_.predict(data.inputs());
    learning_mse_ = mean_squared_error(fitted_, data.outputs());
}

namespace {

class CnlsEstimator final : public Estimator {
public:
    explicit CnlsEstimator(EstimatorOptions o) : opt_(std::move(o)) {}
    std::string name() const override { return "cnls"; }
    Index min_sample_size(Index) const override { return 2; }
    std::unique_ptr<FittedModel> fit(const Dataset& data, std::uint64_t) const override {
        return std::make_unique<PiecewiseFit>(fit_cnls(data, opt_.solver), data, true);
    }

private:
    EstimatorOptions opt_;
};

class CapNlsEstimator final : public Estimator {
public:
    CapNlsEstimator(EstimatorOptions o, bool fast) : opt_(std::move(o)), fast_(fast) {}
    std::string name() const override { return fast_ ? "capnlsf" : "capnls"; }
    Index min_sample_size(Index d) const override { return opt_.capnls.min_partition_size(d); }
    std::unique_ptr<FittedModel> fit(const Dataset& data, std::uint64_t seed) const override {
        CapNlsParams p = opt_.capnls;
        p.rng_seed = seed;
        AdaptiveFit f = fast_ ? fit_capnls_fast(data, p, opt_.solver) : fit_capnls(data, p, opt_.solver);
        return std::make_unique<PiecewiseFit>(std::move(f.model), data, false);
    }

private:
    EstimatorOptions opt_;
    bool fast_;
};

class CapEstimator final : public Estimator {
public:
    explicit CapEstimator(EstimatorOptions o) : opt_(std::move(o)) {}
    std::string name() const override { return "cap"; }
    Index min_sample_size(Index d) const override { return opt_.capnls.min_partition_size(d); }
    std::unique_ptr<FittedModel> fit(const Dataset& data, std::uint64_t seed) const override {
        CapNlsParams p = opt_.capnls;
        p.rng_seed = seed;
        return std::make_unique<PiecewiseFit>(fit_cap(data, p).model, data, false);
    }

private:
    EstimatorOptions opt_;
};

class CdaEstimator final : public Estimator {
public:
    explicit CdaEstimator(EstimatorOptions o) : opt_(std::move(o)) {}
    std::string name() const override { return "cda"; }
    Index min_sample_size(Index d) const override { return d + 1; }
    std::unique_ptr<FittedModel> fit(const Dataset& data, std::uint64_t seed) const override {
        CdaOptions c = opt_.cda;
        c.rng_seed = seed;
        return std::make_unique<ParametricFit>(fit_cd_additive(data, c), data);
    }

private:
    EstimatorOptions opt_;
};

class CdmEstimator final : public Estimator {
public:
    std::string name() const override { return "cdm"; }
    bool requires_positive_outputs() const override { return true; }
    Index min_sample_size(Index d) const override { return d + 1; }
    std::unique_ptr<FittedModel> fit(const Dataset& data, std::uint64_t) const override {
        return std::make_unique<ParametricFit>(fit_cd_multiplicative(data), data);
    }
};

void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw std::invalid_argument(where + ": expected an object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) throw std::invalid_argument(where + ": unknown key '" + key + "'");
}

}  // namespace

nlohmann::ordered_json to_json(const EstimatorOptions& o) {
    nlohmann::ordered_json j;
    j["capnls"] = {{"M", o.capnls.M},
                   {"L", o.capnls.L},
                   {"n0", o.capnls.n0},
                   {"selection_tolerance", o.capnls.selection_tolerance},
                   {"fast_threshold", o.capnls.fast_threshold},
                   {"max_hyperplanes", o.capnls.max_hyperplanes}};
    j["solver"] = {{"kkt_tolerance", o.solver.kkt_tolerance},
                   {"max_iterations", o.solver.max_iterations},
                   {"ridge", o.solver.ridge}};
    j["cda"] = {{"n_starts", o.cda.n_starts}, {"fix_scale", o.cda.fix_scale}, {"max_iterations", o.cda.max_iterations}};
    return j;
}

EstimatorOptions estimator_options_from_json(const nlohmann::json& j) {
    EstimatorOptions o;
    check_keys(j, {"capnls", "solver", "cda"}, "estimator options");
    if (j.contains("capnls")) {
        const auto& c = j.at("capnls");
        check_keys(c, {"M", "L", "n0", "selection_tolerance", "fast_threshold", "max_hyperplanes"}, "capnls");
        o.capnls.M = c.value("M", o.capnls.M);
        o.capnls.L = c.value("L", o.capnls.L);
        o.capnls.n0 = c.value("n0", o.capnls.n0);
        o.capnls.selection_tolerance = c.value("selection_tolerance", o.capnls.selection_tolerance);
        o.capnls.fast_threshold = c.value("fast_threshold", o.capnls.fast_threshold);
        o.capnls.max_hyperplanes = c.value("max_hyperplanes", o.capnls.max_hyperplanes);
    }
    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        check_keys(s, {"kkt_tolerance", "max_iterations", "ridge"}, "solver");
        o.solver.kkt_tolerance = s.value("kkt_tolerance", o.solver.kkt_tolerance);
        o.solver.max_iterations = s.value("max_iterations", o.solver.max_iterations);
        o.solver.ridge = s.value("ridge", o.solver.ridge);
        if (o.solver.kkt_tolerance <= 0.0) throw std::invalid_argument("solver: kkt_tolerance must be positive");
        if (o.solver.ridge < 0.0) throw std::invalid_argument("solver: ridge must be nonnegative");
    }
    if (j.contains("cda")) {
        const auto& c = j.at("cda");
        check_keys(c, {"n_starts", "fix_scale", "max_iterations"}, "cda");
        o.cda.n_starts = c.value("n_starts", o.cda.n_starts);
        o.cda.fix_scale = c.value("fix_scale", o.cda.fix_scale);
        o.cda.max_iterations = c.value("max_iterations", o.cda.max_iterations);
        if (o.cda.n_starts < 1) throw std::invalid_argument("cda: n_starts must be positive");
    }
    return o;
}

std::unique_ptr<Estimator> make_estimator(const std::string& name, const EstimatorOptions& options) {
    if (name == "cnls") return std::make_unique<CnlsEstimator>(options);
    if (name == "capnls") return std::make_unique<CapNlsEstimator>(options, false);
    if (name == "capnlsf") return std::make_unique<CapNlsEstimator>(options, true);
    if (name == "cap") return std::make_unique<CapEstimator>(options);
    if (name == "cda") return std::make_unique<CdaEstimator>(options);
    if (name == "cdm") return std::make_unique<CdmEstimator>();
    throw std::invalid_argument("unknown estimator '" + name + "'");
}

const std::vector<std::string>& estimator_names() {
    static const std::vector<std::string> names{"cnls", "capnls", "capnlsf", "cap", "cda", "cdm"};
    return names;
}

}  // namespace frontier
