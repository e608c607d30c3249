#include "frontier/estimators.hpp"
#include "frontier/nnls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <tuple>

namespace frontier {

void CapNlsParams::validate(Index d) const {
    if (M < 1) throw std::invalid_argument("CapNlsParams: M must be positive");
    if (L < 0 || L > d) throw std::invalid_argument("CapNlsParams: L must be in 1..d (0 for d)");
    if (n0 != 0 && n0 < 2 * (d + 1)) throw std::invalid_argument("CapNlsParams: n0 must be at least 2(d+1)");
    if (!(selection_tolerance > 0.0 && selection_tolerance < 1.0))
        throw std::invalid_argument("CapNlsParams: selection_tolerance must lie in (0, 1)");
    if (!(fast_threshold > 0.0)) throw std::invalid_argument("CapNlsParams: fast_threshold must be positive");
    if (max_hyperplanes < 0) throw std::invalid_argument("CapNlsParams: max_hyperplanes must be nonnegative");
}

PiecewiseLinearModel fit_partition(const Dataset& data, const Partition& partition,
                                   const qp::SolverConfig& solver) {
    // Solve on unit-magnitude columns so the ridge and the tolerances mean
    // the same thing for survey data in thousands as for data in [0, 1].
    // Positive rescaling keeps the Afriat and sign constraints intact.
    const VectorXd sx = column_scales(data.inputs());
    const double sy = output_scale(data.outputs());
    const Dataset scaled(data.inputs() * sx.cwiseInverse().asDiagonal(), data.outputs() / sy);

    const qp::QPProblem problem = qp::assemble_qp(scaled, partition);
    const qp::QPSolution sol = qp::solve(problem, solver);
    if (sol.status != qp::SolveStatus::optimal)
        throw qp::SolverError("QP solve ended with status " + qp::to_string(sol.status) +
                              " (kkt residual " + std::to_string(sol.kkt_residual) + ")");
    PiecewiseLinearModel model = qp::to_model(problem, sol.beta, scaled, partition);
    for (auto& plane : model.hyperplanes) {
        plane.intercept *= sy;
        plane.slopes = (sy * plane.slopes.array() / sx.array()).matrix();
    }
    model.learning_mse = mean_squared_error(evaluate_in_sample(model, data), data.outputs());
    model.feasibility_tolerance = std::max(model.feasibility_tolerance, solver.kkt_tolerance) * std::max(1.0, sy);
    return model;
}

PiecewiseLinearModel fit_cnls(const Dataset& data, const qp::SolverConfig& solver) {
    if (data.size() < 2) throw std::invalid_argument("fit_cnls: need at least two observations");
    return fit_partition(data, Partition::identity(data.size()), solver);
}

std::vector<SplitProposal> propose_partitions(const Partition& current, const Dataset& data,
                                              const CapNlsParams& params, std::mt19937_64& rng) {
    const Index d = data.dims();
    const int min_child = params.min_child_size(d);
    const int directions = params.directions(d);
    const auto members = current.members();

    std::vector<SplitProposal> out;
    for (int region = 0; region < current.regions; ++region) {
        const auto& obs = members[static_cast<std::size_t>(region)];
        if (static_cast<int>(obs.size()) < 2 * min_child) continue;

        std::vector<Index> knots;
        std::sample(obs.begin(), obs.end(), std::back_inserter(knots),
                    std::min<std::size_t>(static_cast<std::size_t>(params.M), obs.size()), rng);

        for (int coord = 0; coord < directions; ++coord) {
            // A threshold split is identified by how many members fall on
            // its lower side.
            std::map<std::size_t, double> by_count;
            for (Index knot : knots) {
                const double v = data.inputs()(knot, coord);
                std::size_t lower = 0;
                for (Index i : obs) lower += data.inputs()(i, coord) <= v ? 1 : 0;
                if (static_cast<int>(lower) < min_child || static_cast<int>(obs.size() - lower) < min_child)
                    continue;
                by_count.emplace(lower, v);
            }
            for (const auto& [count, v] : by_count) {
                SplitProposal prop;
                prop.region = region;
                prop.coordinate = coord;
                prop.knot = v;
                prop.partition = current;
                prop.partition.regions = current.regions + 1;
                prop.partition.min_region_size = std::min(current.min_region_size, min_child);
                for (Index i : obs)
                    if (data.inputs()(i, coord) > v)
                        prop.partition.assignment[static_cast<std::size_t>(i)] = current.regions;
                out.push_back(std::move(prop));
            }
        }
    }
    return out;
}

PiecewiseLinearModel select_parsimonious(const ModelCollection& collection, double tol) {
    if (collection.empty()) throw std::invalid_argument("select_parsimonious: empty collection");
    if (tol < 0.0) throw std::invalid_argument("select_parsimonious: negative tolerance");
    const double target = (1.0 + tol) * collection.entries.back().learning_mse;
    for (const auto& entry : collection.entries)
        if (entry.learning_mse <= target) return entry.model;
    return collection.entries.back().model;
}

namespace {

// An exact fit leaves nothing for a split to explain; differences at this
// level are rounding noise.
bool exact_fit(double mse, const Dataset& data) {
    return mse <= 1e-24 * data.outputs().squaredNorm() / static_cast<double>(data.size());
}

bool stop_fast(const ModelCollection& collection, double threshold) {
    const auto& e = collection.entries;
    if (e.size() < 3) return false;
    for (std::size_t back = 1; back <= 2; ++back) {
        const double before = e[e.size() - back - 1].learning_mse;
        const double after = e[e.size() - back].learning_mse;
        const double improvement = before > 0.0 ? (before - after) / before : 0.0;
        if (improvement >= threshold) return false;
    }
    return true;
}

}  // namespace

AdaptiveFit fit_capnls(const Dataset& data, const CapNlsParams& params, const qp::SolverConfig& solver) {
    const Index d = data.dims();
    params.validate(d);
    if (data.size() < params.min_partition_size(d))
        throw std::invalid_argument("fit_capnls: fewer observations than n0");

    std::mt19937_64 rng(params.rng_seed);
    AdaptiveFit fit;
    Partition current = Partition::single(data.size());
    current.min_region_size = params.min_child_size(d);
    PiecewiseLinearModel model = fit_partition(data, current, solver);
    ++fit.qp_solves;
    fit.collection.entries.push_back({1, model, model.learning_mse});

    for (;;) {
        if (params.max_hyperplanes > 0 && current.regions >= params.max_hyperplanes) break;
        if (exact_fit(fit.collection.entries.back().learning_mse, data)) break;
        if (params.fast_stop && stop_fast(fit.collection, params.fast_threshold)) break;
        const auto proposals = propose_partitions(current, data, params, rng);
        if (proposals.empty()) break;

        const SplitProposal* best = nullptr;
        PiecewiseLinearModel best_model;
        for (const auto& prop : proposals) {
            PiecewiseLinearModel candidate;
            try {
                candidate = fit_partition(data, prop.partition, solver);
            } catch (const qp::SolverError&) {
                continue;
            }
            ++fit.qp_solves;
            // Proposals arrive in tie-break order, so only a strict
            // improvement replaces the incumbent.
            if (best == nullptr || candidate.learning_mse < best_model.learning_mse) {
                best = &prop;
                best_model = std::move(candidate);
            }
        }
        if (best == nullptr) break;
        current = best->partition;
        fit.collection.entries.push_back({current.regions, best_model, best_model.learning_mse});
    }
    fit.model = select_parsimonious(fit.collection, params.selection_tolerance);
    return fit;
}

AdaptiveFit fit_capnls_fast(const Dataset& data, CapNlsParams params, const qp::SolverConfig& solver) {
    params.fast_stop = true;
    return fit_capnls(data, params, solver);
}

PiecewiseLinearModel cap_refit(const Dataset& data, std::vector<Hyperplane> planes, int max_passes) {
    const Index n = data.size();
    PiecewiseLinearModel best;
    double best_mse = std::numeric_limits<double>::infinity();
    std::vector<int> previous;

    for (int pass = 0; pass <= max_passes && !planes.empty(); ++pass) {
        PiecewiseLinearModel current;
        current.hyperplanes = planes;
        const MatrixXd values = plane_values(current, data.inputs());

        std::vector<int> assignment(static_cast<std::size_t>(n));
        std::vector<int> counts(planes.size(), 0);
        for (Index i = 0; i < n; ++i) {
            Index k = 0;
            values.row(i).minCoeff(&k);
            assignment[static_cast<std::size_t>(i)] = static_cast<int>(k);
            ++counts[static_cast<std::size_t>(k)];
        }
        // Planes that are nowhere active are dropped.
        std::vector<int> relabel(planes.size(), -1);
        std::vector<Hyperplane> kept;
        for (std::size_t k = 0; k < planes.size(); ++k) {
            if (counts[k] > 0) {
                relabel[k] = static_cast<int>(kept.size());
                kept.push_back(planes[k]);
            }
        }
        for (int& r : assignment) r = relabel[static_cast<std::size_t>(r)];

        current.hyperplanes = kept;
        Partition part;
        part.assignment = assignment;
        part.regions = static_cast<int>(kept.size());
        part.min_region_size = 1;
        current.partition = part;
        current.learning_mse = mean_squared_error(values.rowwise().minCoeff(), data.outputs());
        if (current.learning_mse < best_mse) {
            best_mse = current.learning_mse;
            best = current;
        }
        if (assignment == previous || pass == max_passes) break;
        previous = assignment;

        planes.clear();
        for (const auto& obs : part.members()) {
            const Dataset region = data.subset(obs);
            planes.push_back(fit_monotone_plane(region.inputs(), region.outputs()));
        }
    }
    return best;
}

AdaptiveFit fit_cap(const Dataset& data, const CapNlsParams& params) {
    const Index d = data.dims();
    params.validate(d);
    if (data.size() < params.min_partition_size(d))
        throw std::invalid_argument("fit_cap: fewer observations than n0");

    std::mt19937_64 rng(params.rng_seed);
    AdaptiveFit fit;
    PiecewiseLinearModel model;
    model.hyperplanes.push_back(fit_monotone_plane(data.inputs(), data.outputs()));
    model.partition = Partition::single(data.size());
    model.learning_mse = mean_squared_error(evaluate_in_sample(model, data), data.outputs());
    fit.collection.entries.push_back({1, model, model.learning_mse});

    for (;;) {
        const int K = model.size();
        if (params.max_hyperplanes > 0 && K >= params.max_hyperplanes) break;
        if (exact_fit(model.learning_mse, data)) break;
        if (params.fast_stop && stop_fast(fit.collection, params.fast_threshold)) break;
        const auto proposals = propose_partitions(*model.partition, data, params, rng);
        if (proposals.empty()) break;

        bool found = false;
        PiecewiseLinearModel best;
        for (const auto& prop : proposals) {
            std::vector<Hyperplane> planes = model.hyperplanes;
            const auto members = prop.partition.members();
            for (int child : {prop.region, K}) {
                const Dataset region = data.subset(members[static_cast<std::size_t>(child)]);
                const Hyperplane plane = fit_monotone_plane(region.inputs(), region.outputs());
                if (child == K) planes.push_back(plane);
                else planes[static_cast<std::size_t>(child)] = plane;
            }
            PiecewiseLinearModel candidate = cap_refit(data, std::move(planes));
            if (candidate.size() != K + 1) continue;
            if (!found || candidate.learning_mse < best.learning_mse) {
                best = std::move(candidate);
                found = true;
            }
        }
        // Growth continues only while a split lowers the error.
        if (!found || !(best.learning_mse < model.learning_mse)) break;
        model = best;
        fit.collection.entries.push_back({model.size(), model, model.learning_mse});
    }
    fit.model = select_parsimonious(fit.collection, params.selection_tolerance);
    return fit;
}

}  // namespace frontier
