#include "abel/inference.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "abel/stats.hpp"

namespace abel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd embed(const Eigen::VectorXd& free_values,
                      const std::vector<int>& free_idx, Eigen::VectorXd theta) {
    for (std::size_t j = 0; j < free_idx.size(); ++j)
        theta(free_idx[j]) = free_values(static_cast<Eigen::Index>(j));
    return theta;
}

// Log blockwise EL at theta; -inf when infeasible or numerically failed.
double bel_objective(const Eigen::MatrixXd& data, const EstimatingFunction& ef,
                     const Eigen::VectorXd& theta, const BlockScheme& scheme) {
    try {
        return log_el_ratio(block_means(ef.evaluate_all(data, theta), scheme));
    } catch (const Error&) {
        return -kInf;
    }
}

// Log adjusted blockwise EL; finite except for hard numerical failures.
double abel_objective(const Eigen::MatrixXd& data, const EstimatingFunction& ef,
                      const Eigen::VectorXd& theta, const BlockScheme& scheme,
                      double a) {
    try {
        const Eigen::MatrixXd T = block_means(ef.evaluate_all(data, theta), scheme);
        if (a == 0.0) return log_el_ratio(T);
        const Eigen::MatrixXd T_adj = a > 0.0 ? augment(T, a) : augment_two_point(T, a);
        return log_el_ratio(T_adj);
    } catch (const Error&) {
        return -kInf;
    }
}

// Nelder-Mead maximization. Stops when the simplex diameter falls below
// 1e-8 or after 500 iterations, then restarts once from a perturbed best
// point and keeps the better run.
Eigen::VectorXd nelder_mead_max(const std::function<double(const Eigen::VectorXd&)>& f,
                                const Eigen::VectorXd& start) {
    const int dim = static_cast<int>(start.size());

    auto run = [&](const Eigen::VectorXd& x0) {
        std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(dim) + 1, x0);
        std::vector<double> vals(static_cast<std::size_t>(dim) + 1);
        for (int j = 0; j < dim; ++j)
            pts[static_cast<std::size_t>(j) + 1](j) += 0.05 * std::max(1.0, std::abs(x0(j)));
        for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = f(pts[i]);

        std::vector<std::size_t> order(pts.size());
        for (int iter = 0; iter < 500; ++iter) {
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::sort(order.begin(), order.end(),
                      [&](std::size_t a, std::size_t b) { return vals[a] > vals[b]; });

            double diam = 0.0;
            for (std::size_t i = 1; i < pts.size(); ++i)
                diam = std::max(diam, (pts[order[i]] - pts[order[0]]).norm());
            if (diam <= 1e-8) break;

            const std::size_t worst = order.back();
            const std::size_t second_worst = order[order.size() - 2];
            Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
            for (std::size_t i = 0; i + 1 < order.size(); ++i) centroid += pts[order[i]];
            centroid /= static_cast<double>(dim);

            const Eigen::VectorXd refl = centroid + (centroid - pts[worst]);
            const double f_refl = f(refl);
            if (f_refl > vals[order[0]]) {
                const Eigen::VectorXd exp_pt = centroid + 2.0 * (centroid - pts[worst]);
                const double f_exp = f(exp_pt);
                if (f_exp > f_refl) {
                    pts[worst] = exp_pt;
                    vals[worst] = f_exp;
                } else {
                    pts[worst] = refl;
                    vals[worst] = f_refl;
                }
            } else if (f_refl > vals[second_worst]) {
                pts[worst] = refl;
                vals[worst] = f_refl;
            } else {
                const Eigen::VectorXd contr = centroid + 0.5 * (pts[worst] - centroid);
                const double f_contr = f(contr);
                if (f_contr > vals[worst]) {
                    pts[worst] = contr;
                    vals[worst] = f_contr;
                } else {
                    for (std::size_t i = 1; i < order.size(); ++i) {
                        pts[order[i]] = pts[order[0]] + 0.5 * (pts[order[i]] - pts[order[0]]);
                        vals[order[i]] = f(pts[order[i]]);
                    }
                }
            }
        }
        std::size_t best = 0;
        for (std::size_t i = 1; i < pts.size(); ++i)
            if (vals[i] > vals[best]) best = i;
        return std::make_pair(pts[best], vals[best]);
    };

    auto [x1, v1] = run(start);
    Eigen::VectorXd perturbed = x1;
    for (int j = 0; j < dim; ++j) perturbed(j) += 0.02 * std::max(1.0, std::abs(x1(j)));
    auto [x2, v2] = run(perturbed);
    return v2 > v1 ? x2 : x1;
}

// Deterministic local probes around the start: coordinate and diagonal
// displacements at doubling radii. The estimator is root-n consistent, so
// the statistically meaningful search region is a neighborhood of the
// start; feasibility beyond it is not probed.
bool find_feasible_start(const std::function<double(const Eigen::VectorXd&)>& f,
                         Eigen::VectorXd& x0) {
    if (std::isfinite(f(x0))) return true;
    const int dim = static_cast<int>(x0.size());
    for (double radius : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
        for (int j = 0; j < dim; ++j) {
            const double h = radius * std::max(1.0, std::abs(x0(j)));
            for (double sign : {1.0, -1.0}) {
                Eigen::VectorXd probe = x0;
                probe(j) += sign * h;
                if (std::isfinite(f(probe))) {
                    x0 = probe;
                    return true;
                }
            }
        }
        for (double sign : {1.0, -1.0}) {
            Eigen::VectorXd probe = x0;
            for (int j = 0; j < dim; ++j)
                probe(j) += sign * radius * std::max(1.0, std::abs(x0(j)));
            if (std::isfinite(f(probe))) {
                x0 = probe;
                return true;
            }
        }
    }
    return false;
}

std::vector<int> free_indices(int p, const std::map<int, double>& fixed) {
    std::vector<int> free_idx;
    for (int j = 0; j < p; ++j)
        if (!fixed.count(j)) free_idx.push_back(j);
    return free_idx;
}

Eigen::VectorXd default_start(const Eigen::MatrixXd& data, const EstimatingFunction& ef) {
    if (ef.initial_guess) return ef.initial_guess(data);
    return Eigen::VectorXd::Zero(ef.p);
}

// Constrained maximizer over the free components of either the unadjusted
// blockwise EL (a == nullopt) or the adjusted one.
Eigen::VectorXd maximize_el(const Eigen::MatrixXd& data, const EstimatingFunction& ef,
                            const std::map<int, double>& fixed, const BlockScheme& scheme,
                            const Eigen::VectorXd& start, std::optional<double> a,
                            bool* used_adjusted = nullptr) {
    Eigen::VectorXd theta = start;
    for (const auto& [j, value] : fixed) {
        if (j < 0 || j >= ef.p)
            throw ConfigError("fixed component index " + std::to_string(j) +
                              " outside parameter range");
        theta(j) = value;
    }
    const std::vector<int> free_idx = free_indices(ef.p, fixed);
    if (used_adjusted) *used_adjusted = false;
    if (free_idx.empty()) return theta;

    auto objective_at = [&](const Eigen::VectorXd& free_values, bool adjusted) {
        const Eigen::VectorXd full = embed(free_values, free_idx, theta);
        return adjusted ? abel_objective(data, ef, full, scheme, *a)
                        : bel_objective(data, ef, full, scheme);
    };

    Eigen::VectorXd x0(static_cast<Eigen::Index>(free_idx.size()));
    for (std::size_t j = 0; j < free_idx.size(); ++j)
        x0(static_cast<Eigen::Index>(j)) = theta(free_idx[j]);

    auto plain = [&](const Eigen::VectorXd& v) { return objective_at(v, false); };
    if (find_feasible_start(plain, x0))
        return embed(nelder_mead_max(plain, x0), free_idx, theta);

    // The unadjusted EL is infeasible throughout the search neighborhood.
    // With an adjustment available, fall back to the adjusted program,
    // which is defined everywhere.
    if (a) {
        auto adjusted = [&](const Eigen::VectorXd& v) { return objective_at(v, true); };
        Eigen::VectorXd y0(static_cast<Eigen::Index>(free_idx.size()));
        for (std::size_t j = 0; j < free_idx.size(); ++j)
            y0(static_cast<Eigen::Index>(j)) = theta(free_idx[j]);
        if (find_feasible_start(adjusted, y0)) {
            if (used_adjusted) *used_adjusted = true;
            return embed(nelder_mead_max(adjusted, y0), free_idx, theta);
        }
    }
    throw OptimFailure("no parameter value with finite blockwise EL near the start");
}

void check_point_estimate_geometry(const Eigen::MatrixXd& data,
                                   const EstimatingFunction& ef,
                                   const Eigen::VectorXd& point,
                                   const BlockScheme& scheme) {
    const Eigen::MatrixXd T = block_means(ef.evaluate_all(data, point), scheme);
    Eigen::MatrixXd S = (T.transpose() * T) / static_cast<double>(T.rows());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
    const double largest = es.eigenvalues()(es.eigenvalues().size() - 1);
    if (largest <= 1e-300 || es.eigenvalues()(0) < 1e-12 * largest)
        throw DegenerateSecondMoment(
            "block means at the point estimate have a rank-deficient second moment");
}

} // namespace

EstimatingFunction mean_ef(int dim) {
    EstimatingFunction ef;
    ef.p = dim;
    ef.q = dim;
    ef.name = "mean";
    ef.evaluate_all = [](const Eigen::MatrixXd& data, const Eigen::VectorXd& theta) {
        return Eigen::MatrixXd(data.rowwise() - theta.transpose());
    };
    ef.initial_guess = [](const Eigen::MatrixXd& data) {
        return Eigen::VectorXd(data.colwise().mean());
    };
    return ef;
}

EstimatingFunction linreg_ef(int covariate_dim, bool intercept) {
    EstimatingFunction ef;
    const int p = covariate_dim + (intercept ? 1 : 0);
    ef.p = p;
    ef.q = p;
    ef.name = intercept ? "linreg+intercept" : "linreg";

    auto design = [covariate_dim, intercept](const Eigen::MatrixXd& data) {
        if (data.cols() != covariate_dim + 1)
            throw ShapeMismatch("regression data must have 1 + " +
                                std::to_string(covariate_dim) + " columns (Y first)");
        const Eigen::Index n = data.rows();
        Eigen::MatrixXd X(n, covariate_dim + (intercept ? 1 : 0));
        if (intercept) {
            X.col(0).setOnes();
            X.rightCols(covariate_dim) = data.rightCols(covariate_dim);
        } else {
            X = data.rightCols(covariate_dim);
        }
        return X;
    };

    ef.evaluate_all = [design](const Eigen::MatrixXd& data, const Eigen::VectorXd& beta) {
        const Eigen::MatrixXd X = design(data);
        const Eigen::VectorXd resid = data.col(0) - X * beta;
        return Eigen::MatrixXd(X.array().colwise() * resid.array());
    };
    ef.initial_guess = [design](const Eigen::MatrixXd& data) {
        const Eigen::MatrixXd X = design(data);
        return Eigen::VectorXd(
            (X.transpose() * X).ldlt().solve(X.transpose() * data.col(0)));
    };
    return ef;
}

double statistic_at(const Eigen::MatrixXd& data, const EstimatingFunction& ef,
                    const Eigen::VectorXd& theta, const BlockScheme& scheme,
                    const AdjustmentSpec& adj) {
    if (theta.size() != ef.p)
        throw ShapeMismatch("theta has " + std::to_string(theta.size()) +
                            " components; estimating function expects " +
                            std::to_string(ef.p));
    const Eigen::MatrixXd g = ef.evaluate_all(data, theta);
    if (adj.is_bel()) return bel_statistic(g, scheme);
    return abel_statistic(g, scheme, adj);
}

Eigen::VectorXd mbele(const Eigen::MatrixXd& data, const EstimatingFunction& ef,
                      const std::map<int, double>& fixed, const BlockScheme& scheme,
                      std::optional<Eigen::VectorXd> start) {
    const Eigen::VectorXd x0 = start ? *start : default_start(data, ef);
    return maximize_el(data, ef, fixed, scheme, x0, std::nullopt);
}

ConfidenceInterval confidence_interval(const Eigen::MatrixXd& data,
                                       const EstimatingFunction& ef, int component,
                                       double level, const BlockScheme& scheme,
                                       const AdjustmentSpec& adj) {
    if (component < 0 || component >= ef.p)
        throw ConfigError("component index out of range");
    if (!(level > 0.0 && level < 1.0))
        throw DomainError("confidence level must lie in (0, 1)");

    const Eigen::VectorXd point = mbele(data, ef, {}, scheme);
    check_point_estimate_geometry(data, ef, point, scheme);

    AdjustmentSpec resolved = adj;
    if (!adj.is_bel())
        resolved = resolve_adjustment(adj, ef.evaluate_all(data, point), scheme);

    const int df = ef.q - ef.p + 1;
    const double quantile = chi2_quantile(df, level);
    const bool multi = ef.p > 1;

    // Profile statistic in the chosen component; other components
    // re-optimized at each candidate when the model has any.
    auto profile = [&](double value) {
        Eigen::VectorXd theta = point;
        if (multi) {
            bool used_adjusted = false;
            std::optional<double> a_opt;
            if (!resolved.is_bel()) a_opt = *resolved.resolved_a;
            theta = maximize_el(data, ef, {{component, value}}, scheme, point, a_opt,
                                &used_adjusted);
        } else {
            theta(component) = value;
        }
        return statistic_at(data, ef, theta, scheme, resolved);
    };

    const double center = point(component);
    ConfidenceInterval ci;
    ci.point = center;
    ci.level = level;
    ci.quantile = quantile;
    ci.resolved_a = resolved.resolved_a.value_or(0.0);

    for (int side = 0; side < 2; ++side) {
        const double direction = side == 0 ? -1.0 : 1.0;
        double h = 1e-4 * (1.0 + std::abs(center));
        double inner = center;
        double outer = center;
        bool bracketed = false;
        for (int k = 0; k < 70; ++k) {
            outer = center + direction * h;
            const double s = profile(outer);
            if (s >= quantile) {
                bracketed = true;
                break;
            }
            inner = outer;
            h *= 2.0;
        }
        if (!bracketed)
            throw BracketFailure("profile statistic never reached the chi-square "
                                 "threshold during bracket expansion");

        // Bisect on the candidate value until the bracket itself is tight;
        // a continuous profile then also satisfies the 1e-6 statistic
        // tolerance at the returned endpoint.
        double endpoint = 0.5 * (inner + outer);
        for (int it = 0; it < 200; ++it) {
            endpoint = 0.5 * (inner + outer);
            if (std::abs(outer - inner) <= 1e-10 * (1.0 + std::abs(endpoint))) break;
            const double s = profile(endpoint);
            if (s < quantile)
                inner = endpoint;
            else
                outer = endpoint;
        }
        if (side == 0)
            ci.lo = endpoint;
        else
            ci.hi = endpoint;
    }
    return ci;
}

TestResult test_subset(const Eigen::MatrixXd& data, const EstimatingFunction& ef,
                       const std::map<int, double>& null_values, double level,
                       const BlockScheme& scheme, const AdjustmentSpec& adj) {
    if (null_values.empty()) throw ConfigError("subset test needs at least one null");

    AdjustmentSpec resolved = adj;
    if (!adj.is_bel() && !adj.resolved_a) {
        const Eigen::VectorXd ref = default_start(data, ef);
        resolved = resolve_adjustment(adj, ef.evaluate_all(data, ref), scheme);
    }

    const Eigen::VectorXd start = default_start(data, ef);
    bool used_adjusted = false;
    std::optional<double> a_opt;
    if (!resolved.is_bel()) a_opt = *resolved.resolved_a;
    const Eigen::VectorXd theta_hat =
        maximize_el(data, ef, null_values, scheme, start, a_opt, &used_adjusted);

    TestResult result;
    result.mbele = theta_hat;
    result.mbele_adjusted = used_adjusted;
    result.statistic = statistic_at(data, ef, theta_hat, scheme, resolved);
    result.df = ef.q - ef.p + static_cast<int>(null_values.size());
    result.p_value = std::isinf(result.statistic)
                         ? 0.0
                         : 1.0 - chi2_cdf(result.df, result.statistic);
    result.threshold = chi2_quantile(result.df, level);
    result.reject_at[level] = result.statistic > result.threshold;

    // Companion unadjusted statistic at the same constrained estimate;
    // +inf whenever the hull fails there (or the estimate itself only
    // exists through the adjusted fallback).
    try {
        result.bel_statistic =
            used_adjusted ? bel_statistic(ef.evaluate_all(data, theta_hat), scheme)
                          : statistic_at(data, ef, theta_hat, scheme,
                                         AdjustmentSpec::none());
    } catch (const Error&) {
        result.bel_statistic = std::numeric_limits<double>::infinity();
    }
    return result;
}

std::vector<TestResult> bonferroni_tests(const Eigen::MatrixXd& data,
                                         const EstimatingFunction& ef,
                                         const std::map<int, double>& nulls,
                                         double familywise_level,
                                         const BlockScheme& scheme,
                                         const AdjustmentSpec& adj) {
    std::vector<TestResult> results;
    if (nulls.empty()) return results;

    const double per_test_level =
        1.0 - (1.0 - familywise_level) / static_cast<double>(nulls.size());

    AdjustmentSpec resolved = adj;
    if (!adj.is_bel() && !adj.resolved_a) {
        const Eigen::VectorXd ref = default_start(data, ef);
        resolved = resolve_adjustment(adj, ef.evaluate_all(data, ref), scheme);
    }

    for (const auto& [component, value] : nulls) {
        TestResult r =
            test_subset(data, ef, {{component, value}}, per_test_level, scheme, resolved);
        r.component_label = "component_" + std::to_string(component);
        results.push_back(std::move(r));
    }
    return results;
}

} // namespace abel
