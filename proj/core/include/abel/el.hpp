#pragma once

#include <Eigen/Core>

#include "abel/errors.hpp"

namespace abel {

// Solution of the inner empirical-likelihood program for a set of
// estimating-equation rows T (n_rows x q).
//
// When `converged`, the implied weights are
//   p_i = 1 / (n_rows * (1 + lambda' T_i)),
// all strictly positive and summing to one, and `log_ratio` equals
// sum_i log(n_rows * p_i) = -sum_i log(1 + lambda' T_i) <= 0.
struct ELSolution {
    Eigen::VectorXd lambda;
    Eigen::VectorXd weights;
    double log_ratio = 0.0;
    bool converged = false;
    int iterations = 0;
    double residual_norm = 0.0;
};

// Solves the dual stationarity condition
//   sum_i T_i / (1 + lambda' T_i) = 0
// over {lambda : 1 + lambda' T_i > 0 for all i} by damped Newton on the
// log-star extension of the dual objective (quadratic continuation of log
// below 1/n_rows), so every iterate is well defined even when the origin
// sits outside the convex hull of the rows.
//
// Convergence: ||mean_i T_i/(1+lambda'T_i)|| <= 1e-10 * (1 + ||mean T||),
// with all 1 + lambda'T_i on the exact-log branch; at most 200 iterations.
// Diagnostics are always populated; a hull-boundary failure comes back as
// converged == false rather than a throw.
//
// Throws DegenerateSecondMoment when the smallest eigenvalue of
// (1/n) sum T_i T_i' falls below 1e-12 times the largest (nonzero) one.
ELSolution solve_lambda(const Eigen::MatrixXd& T);

// Log profile empirical-likelihood ratio of the rows of T.
// Returns -inf when the origin lies outside the convex hull of the rows
// (the supremum is over an empty set). Throws NonConvergence when the
// solver fails even though the hull test passes, and propagates
// DegenerateSecondMoment.
double log_el_ratio(const Eigen::MatrixXd& T);

// True iff the origin belongs to the convex hull of the rows of T
// (boundary included). q = 1 reduces to a sign test; otherwise a small
// phase-1 simplex solves the linear feasibility problem
//   T' p = 0, 1' p = 1, p >= 0.
bool hull_contains_origin(const Eigen::MatrixXd& T);

} // namespace abel
