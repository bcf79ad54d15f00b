#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "abel/adjust.hpp"
#include "abel/blocking.hpp"

namespace abel {

// One statistic family in the method grid.
struct MethodSpec {
    std::string label;
    AdjustmentSpec adjustment;
};

// One block-layout entry: a fixed block length or the progressive layout.
struct BlockEntry {
    bool progressive = false;
    std::size_t M = 0;
    std::string label() const { return progressive ? "pro" : std::to_string(M); }
};

struct SimConfig {
    std::size_t n = 100;
    std::size_t d = 2;
    double rho = 0.0;
    std::vector<MethodSpec> methods;
    std::vector<BlockEntry> block_lengths;
    std::vector<double> levels; // nominal coverage levels in (0,1)
    std::size_t replications = 1000;
    std::uint64_t seed = 0;
    // Gap between block starts for fixed-length entries; 0 means L = 1
    // (maximally overlapping), anything else is used directly (L = M gives
    // non-overlapping blocks).
    std::size_t gap = 0;
    unsigned threads = 0; // 0: hardware concurrency
};

struct CoverageCell {
    std::string method;
    std::string block_label;
    double level = 0.0;
    double coverage = 0.0;
    double se = 0.0;
    std::size_t replications = 0; // denominators after failure exclusion
    std::size_t failures = 0;     // solver failures, excluded
    std::size_t infinite = 0;     // hull failures, counted as non-coverage
};

struct CoverageReport {
    std::size_t n = 0;
    std::size_t d = 0;
    double rho = 0.0;
    std::uint64_t seed = 0;
    std::size_t replications = 0;
    std::vector<CoverageCell> cells;
};

// Hook used by coverage_experiment and by tests that inject synthetic
// statistics: maps (data, scheme, replication index) to a statistic value.
using StatisticFn =
    std::function<double(const Eigen::MatrixXd&, const BlockScheme&, std::size_t)>;

// Runs the coverage study: per replication, simulates a stationary AR(1)
// sample, evaluates every (method, block entry) statistic at the true
// mean, and compares against the chi-square quantile at each level.
// Replications are independent Philox substreams (stream = replication
// index), so the report is bit-identical for a fixed config regardless of
// thread count. Statistics of +inf count as non-coverage; thrown solver
// errors are excluded from the denominator and counted as failures.
CoverageReport coverage_experiment(const SimConfig& config);

// Same harness with a custom statistic table (label, fn) instead of the
// built-in method grid; the extension point for other data-generating
// statistics and the seam the harness tests use.
CoverageReport coverage_experiment_with(
    const SimConfig& config,
    const std::vector<std::pair<std::string, StatisticFn>>& statistics);

} // namespace abel
