#include "helpers.hpp"
#include "../oracles/oracles.hpp"

#include "frontier/cobb_douglas.hpp"

#include <doctest.h>

using namespace frontier;

namespace {

Dataset positive_cd(Index n, double scale, std::initializer_list<double> alpha, double noise, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    std::normal_distribution<double> z(0.0, noise);
    const Index d = static_cast<Index>(alpha.size());
    MatrixXd x(n, d);
    VectorXd y(n);
    for (Index i = 0; i < n; ++i) {
        double f = scale;
        Index j = 0;
        for (double a : alpha) {
            x(i, j) = u(rng);
            f *= std::pow(x(i, j), a);
            ++j;
        }
        y(i) = f * std::exp(z(rng));
    }
    return Dataset(x, y);
}

VectorXd params_of(const CobbDouglasModel& m) {
    VectorXd p(m.exponents.size() + 1);
    p(0) = m.scale;
    p.tail(m.exponents.size()) = m.exponents;
    return p;
}

double sse_at(const VectorXd& p, const Dataset& data) {
    CobbDouglasModel m;
    m.scale = p(0);
    m.exponents = p.tail(p.size() - 1);
    return (m.predict(data.inputs()) - data.outputs()).squaredNorm();
}

}  // namespace

TEST_CASE("CDA recovers noise-free exponents") {
    const Dataset data = testing::cobb_douglas(100, 0.0, 3);
    const CobbDouglasModel m = fit_cd_additive(data);
    CHECK(std::abs(m.exponents(0) - 0.4) <= 1e-4);
    CHECK(std::abs(m.exponents(1) - 0.5) <= 1e-4);
    CHECK(std::abs(m.scale - 1.0) <= 1e-4);
    CHECK(m.error_form == ErrorForm::additive);
}

TEST_CASE("CDA with the scale pinned to one") {
    const Dataset data = testing::cobb_douglas(80, 0.05, 5);
    CdaOptions opts;
    opts.fix_scale = true;
    const CobbDouglasModel m = fit_cd_additive(data, opts);
    CHECK(m.scale == 1.0);
    CHECK(m.exponents.minCoeff() >= 0.0);
}

TEST_CASE("more starts never do worse than the log-linear start alone") {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
        const Dataset data = testing::cobb_douglas(60, 0.2, seed);
        CdaOptions one;
        one.n_starts = 1;
        CdaOptions many;
        many.n_starts = 6;
        many.rng_seed = seed;
        CHECK(fit_cd_additive(data, many).sse <= fit_cd_additive(data, one).sse + 1e-12);
    }
}

TEST_CASE("CDA gradient matches central differences and vanishes at the optimum") {
    const Dataset data = testing::cobb_douglas(70, 0.1, 8);
    const CobbDouglasModel m = fit_cd_additive(data);
    CHECK(m.sse == doctest::Approx(sse_at(params_of(m), data)).epsilon(1e-10));

    CobbDouglasModel probe = m;
    probe.scale = 1.3;
    probe.exponents << 0.2, 0.7;
    const VectorXd analytic = cd_sse_gradient(probe, data);
    const VectorXd numeric = oracle::central_gradient([&](const VectorXd& p) { return sse_at(p, data); }, params_of(probe));
    CHECK((analytic - numeric).cwiseAbs().maxCoeff() <= 1e-5 * (1.0 + numeric.cwiseAbs().maxCoeff()));

    const VectorXd g = cd_sse_gradient(m, data);
    const VectorXd p = params_of(m);
    VectorXd projected = g;
    for (Index j = 0; j < p.size(); ++j)
        if (p(j) <= 0.0) projected(j) = std::min(g(j), 0.0);
    CHECK(projected.norm() <= 1e-5 * (1.0 + m.sse));
}

TEST_CASE("CDA accepts additive-noise outputs below zero") {
    Dataset data = testing::cobb_douglas(50, 0.3, 2);
    VectorXd y = data.outputs();
    y(0) = -0.2;
    const CobbDouglasModel m = fit_cd_additive(data.with_outputs(y));
    CHECK(std::isfinite(m.sse));
}

TEST_CASE("CDM on exact data") {
    MatrixXd x(5, 1);
    x << 0.2, 0.4, 0.6, 0.8, 1.0;
    VectorXd y = 2.0 * x.col(0).array().pow(0.3);
    const CobbDouglasModel m = fit_cd_multiplicative(Dataset(x, y));
    CHECK(std::abs(m.scale - 2.0) <= 1e-10);
    CHECK(std::abs(m.exponents(0) - 0.3) <= 1e-10);
    CHECK(m.error_form == ErrorForm::multiplicative);
}

TEST_CASE("CDM agrees with the normal equations") {
    for (std::uint64_t seed : {3u, 4u, 5u}) {
        const Dataset data = positive_cd(80, 1.7, {0.3, 0.45, 0.2}, 0.1, seed);
        const VectorXd w = oracle::log_linear_normal_equations(data);
        REQUIRE(w.tail(3).minCoeff() > 0.0);
        const CobbDouglasModel m = fit_cd_multiplicative(data);
        CHECK(std::abs(std::log(m.scale) - w(0)) <= 1e-8);
        CHECK((m.exponents - w.tail(3)).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("CDM holds exponents at zero instead of going negative") {
    const Dataset data = positive_cd(80, 1.0, {0.5, -0.4}, 0.05, 9);
    const CobbDouglasModel m = fit_cd_multiplicative(data);
    CHECK(m.exponents.minCoeff() >= 0.0);
    CHECK(m.exponents(1) == 0.0);
}

TEST_CASE("CDM rejects nonpositive outputs") {
    Dataset data = testing::cobb_douglas(20, 0.0, 1);
    VectorXd y = data.outputs();
    y(3) = 0.0;
    CHECK_THROWS_AS(fit_cd_multiplicative(data.with_outputs(y)), std::invalid_argument);
}

TEST_CASE("CD model JSON") {
    CobbDouglasModel m;
    m.scale = 2.0;
    m.exponents = VectorXd::Constant(2, 0.25);
    const auto j = to_json(m);
    CHECK(j["scale"] == 2.0);
    CHECK(j["exponents"].size() == 2);
    CHECK(j["error_form"] == "additive");
    VectorXd x(2);
    x << 4.0, 4.0;
    CHECK(m(x) == doctest::Approx(4.0));
}
