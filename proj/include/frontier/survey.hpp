#ifndef FRONTIER_SURVEY_HPP
#define FRONTIER_SURVEY_HPP

#include "frontier/selection.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace frontier {

/// One row of the raw survey file. Currency columns are in thousands;
/// labor is in man-hours.
struct SurveyRow {
    std::string industry_code;
    double output = 0.0;
    double intermediates = 0.0;
    double capital = 0.0;
    double labor_hours = 0.0;
    double energy = 0.0;
    double fuel = 0.0;
    double services = 0.0;
};

/// A parsed establishment; energy already includes fuel.
struct SurveyRecord {
    std::string industry_code;
    double gross_output = 0.0;
    double intermediates = 0.0;
    double capital = 0.0;
    double labor = 0.0;
    double energy = 0.0;
    double services = 0.0;
};

struct RejectedRow {
    int line = 0;
    std::string reason;
};

struct SurveyLoad {
    std::vector<SurveyRecord> records;
    std::vector<RejectedRow> rejected;
};

/// Column names every survey file must carry.
const std::vector<std::string>& survey_columns();

/// Throws on an unreadable file or missing columns; malformed rows are
/// skipped and reported with their line numbers.
SurveyLoad load_survey(std::istream& in);
SurveyLoad load_survey(const std::string& path);

void write_survey_csv(std::ostream& out, const std::vector<SurveyRow>& rows);

/// Inputs (capital, labor, energy, services) and output VA = Y - M.
struct IndustryDataset {
    std::string industry_code;
    Dataset data;
    int dropped_count = 0;
};

/// Keeps the industry's establishments with positive value added and
/// positive inputs. Throws when none survive.
IndustryDataset build_industry_dataset(const std::vector<SurveyRecord>& records, const std::string& industry_code);

/// Distinct industry codes in first-appearance order.
std::vector<std::string> industry_codes(const std::vector<SurveyRecord>& records);

struct CurvePoint {
    double fraction = 1.0;
    double mean_r2 = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    std::optional<double> mean_r2_pred;
};

struct SubsampleCurve {
    std::string industry_code;
    std::string estimator;
    std::vector<CurvePoint> points;
};

/// R2_FS per fraction (mean, min and max over RLT replicates). A fraction
/// of 1 contributes the census value.
SubsampleCurve subsample_curve(const Dataset& data, const Estimator& estimator, const std::vector<double>& fractions,
                               const SelectionConfig& cfg);

/// The same curve from estimates already computed for one estimator.
SubsampleCurve curve_from_estimates(const std::vector<ErrorEstimates>& estimates);

/// Smallest fraction whose mean R2_FS reaches rho times the census value.
/// Requires a point at fraction 1.
std::optional<double> survey_size_query(const SubsampleCurve& curve, double rho);

void write_curve_csv(std::ostream& out, const std::vector<SubsampleCurve>& curves);

/// Synthetic industry: value added A * prod x^alpha plus Gaussian noise
/// whose standard deviation is noise_ratio times the spread of the
/// frontier. Establishment sizes cluster around one scale with a sparse
/// tail of large plants.
struct SyntheticIndustry {
    std::string code = "0000";
    int n = 200;
    std::vector<double> exponents{0.25, 0.35, 0.1, 0.2};
    double scale = 1.0;
    double noise_ratio = 0.3;
    double large_share = 0.08;    // share of establishments in the large tail
    double invalid_share = 0.03;  // rows with non-positive VA or a zero input
};

std::vector<SurveyRow> generate_synthetic_survey(const std::vector<SyntheticIndustry>& industries, std::uint64_t seed);

}  // namespace frontier

#endif  // FRONTIER_SURVEY_HPP
