#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

#include "abel/blocking.hpp"
#include "abel/el.hpp"
#include "abel/tuning.hpp"

namespace abel {

// How the pseudo-point tuning parameter is chosen.
struct AdjustmentSpec {
    enum class Rule { none, fixed, log_rule, high_precision };

    Rule rule = Rule::none;
    double fixed_a = 0.0;
    BootstrapSettings bootstrap;
    std::optional<double> resolved_a; // cached after resolution

    static AdjustmentSpec none() { return {}; }
    static AdjustmentSpec fixed(double a);
    static AdjustmentSpec log_rule();
    static AdjustmentSpec high_precision(const BootstrapSettings& bs);

    bool is_bel() const { return rule == Rule::none; }
    std::string label() const;
};

// Appends the pseudo point -a * mean(T) as an extra row; requires a > 0.
// The origin then lies in the convex hull of the augmented rows.
Eigen::MatrixXd augment(const Eigen::MatrixXd& T, double a);

// Two-point form for a negative resolved tuning value: appends
// -a1 * mean(T) and -a2 * mean(T) with a1 = 2a and a2 = -a, so a1 + a2 = a
// and the second point restores origin-in-hull. Requires a < 0.
Eigen::MatrixXd augment_two_point(const Eigen::MatrixXd& T, double a);

// -2 * scale * log EL ratio of the block means; +inf when the hull of the
// block means excludes the origin.
double bel_statistic(const Eigen::MatrixXd& g, const BlockScheme& scheme);

// Resolves the tuning parameter for a dataset: fixed and log rules are
// immediate; the high-precision rule runs the bias-corrected plug-in
// estimator on g (rows of g are resampled directly, which matches
// resampling the underlying series for row-wise estimating functions).
// Appends a note to info.warnings when a reaches the n/M rate bound.
AdjustmentSpec resolve_adjustment(const AdjustmentSpec& adj, const Eigen::MatrixXd& g,
                                  const BlockScheme& scheme,
                                  BiasCorrectionInfo* info = nullptr);

// Adjusted statistic -2 * scale * sum_{i=1}^{Q+1} log(1 + lambda' T_i)
// over the augmented block means; finite for every input dataset. A
// resolved a of exactly zero degenerates to the unadjusted statistic.
double abel_statistic(const Eigen::MatrixXd& g, const BlockScheme& scheme,
                      const AdjustmentSpec& adj);

} // namespace abel
