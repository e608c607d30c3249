#ifndef FRONTIER_ESTIMATORS_HPP
#define FRONTIER_ESTIMATORS_HPP

#include "frontier/core.hpp"
#include "frontier/qp.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace frontier {

/// Tuning of the adaptive-partitioning estimators (CAP-NLS, its fast
/// variant, and monotone CAP).
struct CapNlsParams {
    int M = 10;                        // knot proposals per region per iteration
    int L = 0;                         // split directions; 0 means d (the coordinate axes)
    int n0 = 0;                        // 0 means 4(d+1), so every child keeps 2(d+1)
    double selection_tolerance = 0.01;
    std::uint64_t rng_seed = 0;
    bool fast_stop = false;
    double fast_threshold = 1e-3;
    int max_hyperplanes = 0;           // 0 means grow until no admissible split

    int directions(Index d) const { return L > 0 ? L : static_cast<int>(d); }
    int min_partition_size(Index d) const { return n0 > 0 ? n0 : static_cast<int>(4 * (d + 1)); }
    /// Each child of a split keeps at least ceil(n0 / 2) observations.
    int min_child_size(Index d) const { return (min_partition_size(d) + 1) / 2; }

    /// Throws std::invalid_argument on out-of-range settings for dimension d.
    void validate(Index d) const;
};

struct ModelCollection {
    struct Entry {
        int K = 0;
        PiecewiseLinearModel model;
        double learning_mse = 0.0;
    };
    std::vector<Entry> entries;

    bool empty() const { return entries.empty(); }
    std::size_t size() const { return entries.size(); }
};

struct SplitProposal {
    int region = 0;
    int coordinate = 0;
    double knot = 0.0;
    Partition partition;
};

struct AdaptiveFit {
    PiecewiseLinearModel model;
    ModelCollection collection;
    int qp_solves = 0;
};

PiecewiseLinearModel fit_cnls(const Dataset& data, const qp::SolverConfig& solver = {});

/// Axis-aligned binary splits of the current regions at knots drawn from
/// each region's own observations. Splits leaving a child with fewer than
/// ceil(n0/2) observations are discarded, as are duplicates. Ordered by
/// region, coordinate, then knot value.
std::vector<SplitProposal> propose_partitions(const Partition& current, const Dataset& data,
                                              const CapNlsParams& params, std::mt19937_64& rng);

/// Fits the Afriat-constrained QP over a fixed partition.
PiecewiseLinearModel fit_partition(const Dataset& data, const Partition& partition,
                                   const qp::SolverConfig& solver = {});

AdaptiveFit fit_capnls(const Dataset& data, const CapNlsParams& params,
                       const qp::SolverConfig& solver = {});

/// CAP-NLS halted after two consecutive additions that improve the
/// learning MSE by less than params.fast_threshold (relative).
AdaptiveFit fit_capnls_fast(const Dataset& data, CapNlsParams params,
                            const qp::SolverConfig& solver = {});

/// Smallest-K entry whose learning MSE is within (1 + tol) of the MSE of
/// the largest-K entry.
PiecewiseLinearModel select_parsimonious(const ModelCollection& collection, double tol);

/// Monotone CAP: regions fitted independently by nonnegative-slope least
/// squares, evaluated through the lower envelope and refitted after
/// reassigning observations to their envelope-active plane.
AdaptiveFit fit_cap(const Dataset& data, const CapNlsParams& params);

/// One CAP refit cycle starting from the given planes. Returns the model
/// with the lowest envelope MSE seen; the returned partition is the
/// envelope assignment.
PiecewiseLinearModel cap_refit(const Dataset& data, std::vector<Hyperplane> planes, int max_passes = 10);

}  // namespace frontier

#endif  // FRONTIER_ESTIMATORS_HPP
