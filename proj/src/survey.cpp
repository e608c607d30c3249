#include "frontier/survey.hpp"
#include "frontier/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <random>
#include <stdexcept>

namespace frontier {

const std::vector<std::string>& survey_columns() {
    static const std::vector<std::string> cols{"industry_code", "output", "intermediates", "capital",
                                               "labor_hours",   "energy", "fuel",          "services"};
    return cols;
}

SurveyLoad load_survey(std::istream& in) {
    const io::CsvTable t = io::read_csv(in);
    std::vector<int> pos;
    std::string missing;
    for (const auto& c : survey_columns()) {
        pos.push_back(t.column(c));
        if (pos.back() < 0) missing += (missing.empty() ? "" : ", ") + c;
    }
    if (!missing.empty()) throw std::runtime_error("survey file is missing columns: " + missing);

    SurveyLoad out;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const int line = t.line_numbers[r];
        double v[7] = {};
        std::string bad;
        for (int k = 1; k < 8; ++k) {
            const auto p = static_cast<std::size_t>(pos[static_cast<std::size_t>(k)]);
            const auto num = p < row.size() ? io::parse_number(row[p]) : std::nullopt;
            if (!num || !std::isfinite(*num)) {
                bad = "non-numeric " + survey_columns()[static_cast<std::size_t>(k)];
                break;
            }
            v[k - 1] = *num;
        }
        const auto code_pos = static_cast<std::size_t>(pos[0]);
        if (bad.empty() && (code_pos >= row.size() || row[code_pos].empty())) bad = "empty industry_code";
        if (!bad.empty()) {
            out.rejected.push_back({line, bad});
            continue;
        }
        SurveyRecord rec;
        rec.industry_code = row[code_pos];
        rec.gross_output = v[0];
        rec.intermediates = v[1];
        rec.capital = v[2];
        rec.labor = v[3];
        rec.energy = v[4] + v[5];
        rec.services = v[6];
        out.records.push_back(std::move(rec));
    }
    return out;
}

SurveyLoad load_survey(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return load_survey(in);
}

void write_survey_csv(std::ostream& out, const std::vector<SurveyRow>& rows) {
    using io::format_number;
    for (std::size_t j = 0; j < survey_columns().size(); ++j) out << (j ? "," : "") << survey_columns()[j];
    out << '\n';
    for (const auto& r : rows)
        out << r.industry_code << ',' << format_number(r.output) << ',' << format_number(r.intermediates) << ','
            << format_number(r.capital) << ',' << format_number(r.labor_hours) << ',' << format_number(r.energy) << ','
            << format_number(r.fuel) << ',' << format_number(r.services) << '\n';
}

IndustryDataset build_industry_dataset(const std::vector<SurveyRecord>& records, const std::string& industry_code) {
    IndustryDataset out;
    out.industry_code = industry_code;
    std::vector<const SurveyRecord*> kept;
    for (const auto& r : records) {
        if (r.industry_code != industry_code) continue;
        const double va = r.gross_output - r.intermediates;
        if (va > 0.0 && r.capital > 0.0 && r.labor > 0.0 && r.energy > 0.0 && r.services > 0.0) kept.push_back(&r);
        else ++out.dropped_count;
    }
    if (kept.empty()) throw std::runtime_error("industry " + industry_code + ": no usable establishments");
    const Index n = static_cast<Index>(kept.size());
    MatrixXd x(n, 4);
    VectorXd y(n);
    for (Index i = 0; i < n; ++i) {
        const SurveyRecord& r = *kept[static_cast<std::size_t>(i)];
        x.row(i) << r.capital, r.labor, r.energy, r.services;
        y(i) = r.gross_output - r.intermediates;
    }
    out.data = Dataset(std::move(x), std::move(y));
    return out;
}

std::vector<std::string> industry_codes(const std::vector<SurveyRecord>& records) {
    std::vector<std::string> out;
    for (const auto& r : records)
        if (std::find(out.begin(), out.end(), r.industry_code) == out.end()) out.push_back(r.industry_code);
    return out;
}

SubsampleCurve subsample_curve(const Dataset& data, const Estimator& estimator, const std::vector<double>& fractions,
                               const SelectionConfig& cfg) {
    std::vector<ErrorEstimates> estimates;
    for (double f : fractions) estimates.push_back(estimate_errors(data, estimator, f, cfg));
    SubsampleCurve curve = curve_from_estimates(estimates);
    curve.estimator = estimator.name();
    return curve;
}

SubsampleCurve curve_from_estimates(const std::vector<ErrorEstimates>& estimates) {
    SubsampleCurve curve;
    if (!estimates.empty()) curve.estimator = estimates.front().estimator;
    for (const auto& est : estimates) {
        if (est.estimator != curve.estimator)
            throw std::invalid_argument("curve_from_estimates: estimates from more than one estimator");
        CurvePoint p;
        p.fraction = est.fraction;
        const auto& r2 = est.per_replicate_r2;
        if (est.fraction == 1.0 || r2.empty()) {
            p.mean_r2 = p.lo = p.hi = est.r2_fs;
        } else {
            double total = 0.0;
            for (double v : r2) total += v;
            p.mean_r2 = total / static_cast<double>(r2.size());
            p.lo = *std::min_element(r2.begin(), r2.end());
            p.hi = *std::max_element(r2.begin(), r2.end());
        }
        p.mean_r2_pred = est.r2_pred;
        curve.points.push_back(p);
    }
    std::sort(curve.points.begin(), curve.points.end(),
              [](const CurvePoint& a, const CurvePoint& b) { return a.fraction < b.fraction; });
    return curve;
}

std::optional<double> survey_size_query(const SubsampleCurve& curve, double rho) {
    const CurvePoint* census = nullptr;
    for (const auto& p : curve.points)
        if (p.fraction == 1.0) census = &p;
    if (!census) throw std::invalid_argument("survey_size_query: the curve has no census point");
    for (const auto& p : curve.points)
        if (p.mean_r2 >= rho * census->mean_r2) return p.fraction;
    return std::nullopt;
}

void write_curve_csv(std::ostream& out, const std::vector<SubsampleCurve>& curves) {
    out << "industry_code,estimator,fraction,mean_r2,lo,hi,mean_r2_pred\n";
    for (const auto& c : curves)
        for (const auto& p : c.points)
            out << c.industry_code << ',' << c.estimator << ',' << io::format_number(p.fraction) << ','
                << io::format_number(p.mean_r2) << ',' << io::format_number(p.lo) << ',' << io::format_number(p.hi)
                << ',' << io::format_number(p.mean_r2_pred) << '\n';
}

std::vector<SurveyRow> generate_synthetic_survey(const std::vector<SyntheticIndustry>& industries, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<SurveyRow> rows;
    for (const auto& ind : industries) {
        if (ind.n < 1 || ind.exponents.size() != 4) throw std::invalid_argument("synthetic survey: bad industry spec");
        struct Plant {
            double k, l, e, s, f;
        };
        std::vector<Plant> plants;
        for (int i = 0; i < ind.n; ++i) {
            const bool large = u(rng) < ind.large_share;
            const double size = large ? std::exp(std::log(500.0) + 1.5 + 0.5 * z(rng)) : std::exp(std::log(500.0) + 0.3 * z(rng));
            Plant p;
            p.k = 40.0 * size * std::exp(0.3 * z(rng));
            p.l = 2.0 * size * std::exp(0.3 * z(rng));
            p.e = 3.0 * size * std::exp(0.3 * z(rng));
            p.s = 5.0 * size * std::exp(0.3 * z(rng));
            p.f = ind.scale * std::pow(p.k, ind.exponents[0]) * std::pow(p.l, ind.exponents[1]) *
                  std::pow(p.e, ind.exponents[2]) * std::pow(p.s, ind.exponents[3]);
            plants.push_back(p);
        }
        double mean = 0.0, var = 0.0;
        for (const auto& p : plants) mean += p.f;
        mean /= ind.n;
        for (const auto& p : plants) var += (p.f - mean) * (p.f - mean);
        const double sigma = ind.noise_ratio * std::sqrt(var / std::max(1, ind.n - 1));

        for (const auto& p : plants) {
            const double va = p.f + sigma * z(rng);
            SurveyRow row;
            row.industry_code = ind.code;
            row.intermediates = std::abs(va) * (0.6 + 0.8 * u(rng));
            row.output = va + row.intermediates;
            row.capital = p.k;
            row.labor_hours = p.l;
            row.energy = 0.75 * p.e;
            row.fuel = 0.25 * p.e;
            row.services = p.s;
            if (u(rng) < ind.invalid_share) {
                if (u(rng) < 0.5) row.intermediates = row.output * 1.1;
                else row.capital = 0.0;
            }
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace frontier
