#include "helpers.hpp"

#include "frontier/survey.hpp"

#include <doctest.h>

#include <sstream>

using namespace frontier;

namespace {

const char* kHeader = "industry_code,output,intermediates,capital,labor_hours,energy,fuel,services\n";

SurveyLoad parse(const std::string& body) {
    std::istringstream in(std::string(kHeader) + body);
    return load_survey(in);
}

ErrorEstimates estimate(double fraction, double r2, std::vector<double> reps) {
    ErrorEstimates e;
    e.estimator = "cap";
    e.fraction = fraction;
    e.r2_fs = r2;
    e.per_replicate_r2 = std::move(reps);
    return e;
}

}  // namespace

TEST_CASE("survey rows load with fuel folded into energy") {
    const SurveyLoad s = parse("2811,100,30,50,10,4,1,5\n2811,200,50,80,20,6,2,9\n2821,90,10,40,8,3,0,4\n");
    REQUIRE(s.records.size() == 3);
    CHECK(s.rejected.empty());
    CHECK(s.records[0].energy == 5.0);
    CHECK(s.records[1].energy == 8.0);
    CHECK(s.records[2].industry_code == "2821");
    CHECK(industry_codes(s.records) == std::vector<std::string>{"2811", "2821"});
}

TEST_CASE("malformed rows are reported with line numbers") {
    const SurveyLoad s = parse("2811,100,30,50,10,4,1,5\n2811,abc,30,50,10,4,1,5\n,1,1,1,1,1,1,1\n2811,100,30,50,10,4,1\n");
    CHECK(s.records.size() == 1);
    REQUIRE(s.rejected.size() == 3);
    CHECK(s.rejected[0].line == 3);
    CHECK(s.rejected[0].reason.find("output") != std::string::npos);
    CHECK(s.rejected[1].line == 4);
    CHECK(s.rejected[2].line == 5);
}

TEST_CASE("missing columns are fatal") {
    std::istringstream in("industry_code,output\n2811,1\n");
    CHECK_THROWS_AS(load_survey(in), std::runtime_error);
    CHECK_THROWS_AS(load_survey(std::string("/nonexistent/survey.csv")), std::runtime_error);
}

TEST_CASE("value added is output minus intermediates") {
    const SurveyLoad s = parse("2811,100,30,50,10,4,1,5\n2811,20,25,50,10,4,1,5\n");
    const IndustryDataset d = build_industry_dataset(s.records, "2811");
    REQUIRE(d.data.size() == 1);
    CHECK(d.data.outputs()(0) == 70.0);
    CHECK(d.dropped_count == 1);
    CHECK(d.data.inputs()(0, 0) == 50.0);
    CHECK(d.data.inputs()(0, 1) == 10.0);
    CHECK(d.data.inputs()(0, 2) == 5.0);
    CHECK(d.data.inputs()(0, 3) == 5.0);
}

TEST_CASE("dropped establishments are counted") {
    std::string body;
    for (int i = 0; i < 7; ++i) body += "3000,100," + std::to_string(10 + i) + ",5,5,5,0,5\n";
    body += "3000,10,20,5,5,5,0,5\n";  // negative value added
    body += "3000,100,10,0,5,5,0,5\n";  // no capital
    body += "3000,100,10,5,5,0,0,5\n";  // no energy or fuel
    body += "4000,100,10,5,5,5,0,5\n";  // another industry
    const SurveyLoad s = parse(body);
    const IndustryDataset d = build_industry_dataset(s.records, "3000");
    CHECK(d.data.size() == 7);
    CHECK(d.dropped_count == 3);
    CHECK(d.data.outputs().minCoeff() > 0.0);
    CHECK(d.data.inputs().minCoeff() > 0.0);
    CHECK_THROWS_AS(build_industry_dataset(s.records, "9999"), std::runtime_error);

    // Filtering is idempotent.
    const IndustryDataset again = build_industry_dataset(s.records, "3000");
    CHECK(again.data.outputs() == d.data.outputs());
    CHECK(again.data.inputs() == d.data.inputs());
}

TEST_CASE("synthetic survey round trip keeps the accounting") {
    SyntheticIndustry a;
    a.code = "2811";
    a.n = 120;
    SyntheticIndustry b = a;
    b.code = "2821";
    b.noise_ratio = 0.5;
    const auto rows = generate_synthetic_survey({a, b}, 5);
    REQUIRE(rows.size() == 240);
    std::ostringstream out;
    write_survey_csv(out, rows);
    std::istringstream in(out.str());
    const SurveyLoad s = load_survey(in);
    REQUIRE(s.records.size() == 240);
    CHECK(s.rejected.empty());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(s.records[i].energy == doctest::Approx(rows[i].energy + rows[i].fuel));
        CHECK(s.records[i].gross_output == rows[i].output);
    }
    for (const auto& code : industry_codes(s.records)) {
        const IndustryDataset d = build_industry_dataset(s.records, code);
        int total = 0;
        for (const auto& r : s.records) total += r.industry_code == code;
        CHECK(static_cast<int>(d.data.size()) + d.dropped_count == total);
        CHECK(d.data.outputs().minCoeff() > 0.0);
    }
    CHECK(generate_synthetic_survey({a, b}, 5).front().output == rows.front().output);
}

TEST_CASE("curve points from estimates") {
    const SubsampleCurve c = curve_from_estimates(
        {estimate(1.0, 0.8, {}), estimate(0.3, 0.5, {0.4, 0.6, 0.5}), estimate(0.5, 0.7, {0.6, 0.8})});
    REQUIRE(c.points.size() == 3);
    CHECK(c.estimator == "cap");
    CHECK(c.points[0].fraction == 0.3);
    CHECK(c.points[0].mean_r2 == doctest::Approx(0.5));
    CHECK(c.points[0].lo == 0.4);
    CHECK(c.points[0].hi == 0.6);
    CHECK(c.points[2].mean_r2 == 0.8);
    CHECK(c.points[2].lo == 0.8);

    ErrorEstimates other = estimate(0.5, 0.1, {});
    other.estimator = "cda";
    CHECK_THROWS_AS(curve_from_estimates({estimate(1.0, 0.8, {}), other}), std::invalid_argument);
}

TEST_CASE("survey size query") {
    SubsampleCurve c = curve_from_estimates(
        {estimate(1.0, 0.8, {}), estimate(0.3, 0.5, {0.5}), estimate(0.5, 0.77, {0.77})});
    CHECK(*survey_size_query(c, 0.95) == 0.5);
    CHECK(*survey_size_query(c, 0.6) == 0.3);
    CHECK(*survey_size_query(c, 1.0) == 1.0);
    CHECK_FALSE(survey_size_query(c, 1.5).has_value());
    c.points.pop_back();
    CHECK_THROWS_AS(survey_size_query(c, 0.9), std::invalid_argument);

    std::ostringstream os;
    write_curve_csv(os, {curve_from_estimates({estimate(1.0, 0.8, {})})});
    CHECK(os.str() == "industry_code,estimator,fraction,mean_r2,lo,hi,mean_r2_pred\n,cap,1,0.8,0.8,0.8,\n");
}
