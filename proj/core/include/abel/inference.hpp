#pragma once

#include <Eigen/Core>

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "abel/adjust.hpp"
#include "abel/blocking.hpp"

namespace abel {

// A q-dimensional estimating function g(x; theta) applied row-wise to a
// data matrix: evaluate_all(data, theta) returns one q-vector per data row
// with E g(x; theta0) = 0 at the true parameter. q >= p permits
// over-identification.
struct EstimatingFunction {
    int p = 0;
    int q = 0;
    std::function<Eigen::MatrixXd(const Eigen::MatrixXd&, const Eigen::VectorXd&)>
        evaluate_all;
    // Method-of-moments style starting point for optimizers.
    std::function<Eigen::VectorXd(const Eigen::MatrixXd&)> initial_guess;
    std::string name;
};

// g(x, mu) = x - mu with p = q = dim.
EstimatingFunction mean_ef(int dim);

// Linear-regression estimating function g(X, Y, beta) = X (Y - beta'X).
// Data rows are (Y, X_1, ..., X_k). With `intercept`, X is augmented by a
// leading 1 and p = q = k + 1; without, p = q = k.
EstimatingFunction linreg_ef(int covariate_dim, bool intercept);

// Scaled likelihood-ratio statistic at theta: the adjusted statistic when
// adj is an ABEL rule (finite for every theta), the unadjusted one
// (possibly +inf) when adj is BEL. A high-precision rule must be resolved
// by the caller or it is resolved here against g(theta) itself.
double statistic_at(const Eigen::MatrixXd& data, const EstimatingFunction& ef,
                    const Eigen::VectorXd& theta, const BlockScheme& scheme,
                    const AdjustmentSpec& adj);

// Maximum blockwise empirical likelihood estimate with the components in
// `fixed` pinned to their null values and the rest maximized by
// Nelder-Mead (see implementation notes on the local feasible-start
// search). Throws OptimFailure when no point with finite blockwise EL is
// found near the start.
Eigen::VectorXd mbele(const Eigen::MatrixXd& data, const EstimatingFunction& ef,
                      const std::map<int, double>& fixed, const BlockScheme& scheme,
                      std::optional<Eigen::VectorXd> start = std::nullopt);

struct ConfidenceInterval {
    double lo = 0.0;
    double hi = 0.0;
    double point = 0.0;
    double level = 0.0;
    double quantile = 0.0; // chi-square threshold the endpoints solve for
    double resolved_a = 0.0;
};

// Profile confidence interval for one parameter component: endpoints where
// the profile statistic crosses chi2_quantile(q - p + 1, level), located by
// bracket expansion from the point estimate followed by bisection to a 1e-6
// statistic tolerance. Other components are re-optimized at each candidate
// value. Throws BracketFailure when the profile never reaches the
// threshold within the expansion budget and DegenerateSecondMoment when
// the block means at the point estimate are rank deficient.
ConfidenceInterval confidence_interval(const Eigen::MatrixXd& data,
                                       const EstimatingFunction& ef, int component,
                                       double level, const BlockScheme& scheme,
                                       const AdjustmentSpec& adj);

struct TestResult {
    std::string component_label;
    double statistic = 0.0;
    int df = 0;
    double p_value = 1.0;
    std::map<double, bool> reject_at; // confidence level -> reject flag
    Eigen::VectorXd mbele;
    double threshold = 0.0;   // chi-square quantile used for the decision
    bool mbele_adjusted = false; // estimator fell back to the adjusted EL
    double bel_statistic = 0.0;  // +inf when the unadjusted hull fails
};

// Subset test: pins the `null` components, estimates the rest, evaluates
// the adjusted statistic at the constrained estimate; df = q - p + r.
TestResult test_subset(const Eigen::MatrixXd& data, const EstimatingFunction& ef,
                       const std::map<int, double>& null_values, double level,
                       const BlockScheme& scheme, const AdjustmentSpec& adj);

// One test_subset per component at the Bonferroni-adjusted per-test level
// 1 - (1 - familywise)/#components; reject flags use the adjusted
// threshold. A high-precision adjustment is resolved once, at the
// dataset's initial-guess fit, and shared across components.
std::vector<TestResult> bonferroni_tests(const Eigen::MatrixXd& data,
                                         const EstimatingFunction& ef,
                                         const std::map<int, double>& nulls,
                                         double familywise_level,
                                         const BlockScheme& scheme,
                                         const AdjustmentSpec& adj);

} // namespace abel
