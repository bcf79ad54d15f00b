#include "abel/el.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace abel {

namespace {

constexpr int kMaxIterations = 200;
constexpr double kRankTol = 1e-12;

// log-star: log z for z >= 1/n, quadratic continuation below. C^2 at the
// joint, concave everywhere, defined on all of R.
struct LogStar {
    explicit LogStar(double n) : eps(1.0 / n), inv_eps(n) {}

    double value(double z) const {
        if (z >= eps) return std::log(z);
        const double u = z * inv_eps;
        return std::log(eps) - 1.5 + 2.0 * u - 0.5 * u * u;
    }
    double d1(double z) const {
        if (z >= eps) return 1.0 / z;
        return inv_eps * (2.0 - z * inv_eps);
    }
    double d2(double z) const {
        if (z >= eps) return -1.0 / (z * z);
        return -inv_eps * inv_eps;
    }

    double eps;
    double inv_eps;
};

void check_second_moment(const Eigen::MatrixXd& T) {
    const Eigen::Index n = T.rows();
    Eigen::MatrixXd S = (T.transpose() * T) / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    const double largest = ev(ev.size() - 1);
    if (ev(0) < kRankTol * largest)
        throw DegenerateSecondMoment("row second-moment matrix is rank deficient");
}

} // namespace

ELSolution solve_lambda(const Eigen::MatrixXd& T) {
    const Eigen::Index n = T.rows();
    const Eigen::Index q = T.cols();
    if (n < 1 || q < 1) throw ShapeMismatch("estimating values must be at least 1x1");
    if (!T.allFinite()) throw DomainError("estimating values contain non-finite entries");

    check_second_moment(T);

    const double inv_n = 1.0 / static_cast<double>(n);
    const Eigen::VectorXd t_bar = T.colwise().mean();
    const double tol = 1e-10 * (1.0 + t_bar.norm());
    const LogStar ls(static_cast<double>(n));

    ELSolution sol;
    sol.lambda = Eigen::VectorXd::Zero(q);

    Eigen::VectorXd z(n), grad(q), step(q);
    Eigen::MatrixXd hess(q, q);

    // Objective minimized: phi(lambda) = -(1/n) sum log*(1 + lambda'T_i).
    auto objective = [&](const Eigen::VectorXd& lam) {
        double val = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            val -= ls.value(1.0 + lam.dot(T.row(i)));
        return val * inv_n;
    };

    double phi = objective(sol.lambda);
    double prev_residual = std::numeric_limits<double>::infinity();
    const double floor_tol = 1e-15 * (1.0 + t_bar.norm());
    for (int iter = 0; iter < kMaxIterations; ++iter) {
        sol.iterations = iter;
        z = (T * sol.lambda).array() + 1.0;

        grad.setZero();
        hess.setZero();
        for (Eigen::Index i = 0; i < n; ++i) {
            grad.noalias() -= ls.d1(z(i)) * T.row(i).transpose();
            hess.noalias() -= ls.d2(z(i)) * (T.row(i).transpose() * T.row(i));
        }
        grad *= inv_n;
        hess *= inv_n;

        sol.residual_norm = grad.norm();
        // A true dual root also satisfies primal feasibility
        // sum_i 1/(n z_i) = 1; without this check the vanishing gradient
        // along a separating direction (origin outside the hull) would
        // masquerade as convergence.
        const bool interior = z.minCoeff() > ls.eps * (1.0 - 1e-12);
        const bool feasible = std::abs(z.cwiseInverse().sum() * inv_n - 1.0) <= 1e-8;
        if (interior && feasible && sol.residual_norm <= tol) {
            sol.converged = true;
            // Polish to the floating-point floor so lambda itself, not
            // just the residual, is fully resolved.
            if (sol.residual_norm <= floor_tol ||
                sol.residual_norm >= 0.25 * prev_residual)
                break;
        }
        prev_residual = sol.residual_norm;

        Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
        if (ldlt.info() != Eigen::Success) break;
        step = ldlt.solve(-grad);
        if (!step.allFinite()) break;

        // Backtracking on the convex objective. The ulp-sized cushion lets
        // full Newton steps through once the decrease falls below the
        // rounding floor of phi, keeping quadratic convergence alive down
        // to machine precision.
        double alpha = 1.0;
        const double slope = grad.dot(step);
        const double cushion = 1e-15 * (1.0 + std::abs(phi));
        bool moved = false;
        for (int bt = 0; bt < 60; ++bt) {
            const double trial = objective(sol.lambda + alpha * step);
            if (trial <= phi + 1e-4 * alpha * slope + cushion) {
                sol.lambda += alpha * step;
                phi = trial;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!moved) break;
    }

    // Final diagnostics at the resting point.
    z = (T * sol.lambda).array() + 1.0;
    grad.setZero();
    for (Eigen::Index i = 0; i < n; ++i)
        grad.noalias() -= ls.d1(z(i)) * T.row(i).transpose();
    sol.residual_norm = (grad * inv_n).norm();
    const bool interior = z.minCoeff() > ls.eps * (1.0 - 1e-12);
    const bool feasible = std::abs(z.cwiseInverse().sum() * inv_n - 1.0) <= 1e-8;
    sol.converged = interior && feasible && sol.residual_norm <= tol;

    sol.weights.resize(n);
    double log_ratio = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        sol.weights(i) = inv_n / z(i);
        log_ratio -= ls.value(z(i));
    }
    sol.log_ratio = std::min(0.0, log_ratio);
    return sol;
}

double log_el_ratio(const Eigen::MatrixXd& T) {
    ELSolution sol = solve_lambda(T);
    if (sol.converged) return sol.log_ratio;
    if (!hull_contains_origin(T))
        return -std::numeric_limits<double>::infinity();
    // Origin on or extremely near the hull boundary still means the
    // supremum degenerates to a zero product.
    if (sol.residual_norm <= 1e-6 * (1.0 + T.colwise().mean().norm()))
        return -std::numeric_limits<double>::infinity();
    throw NonConvergence("EL dual solver failed with origin inside the hull");
}

bool hull_contains_origin(const Eigen::MatrixXd& T) {
    const Eigen::Index n = T.rows();
    const Eigen::Index q = T.cols();

    if (q == 1) {
        const double lo = T.col(0).minCoeff();
        const double hi = T.col(0).maxCoeff();
        return lo <= 0.0 && hi >= 0.0;
    }

    // Phase-1 simplex for: T'p = 0, 1'p = 1, p >= 0.
    // Rows are scaled to unit max magnitude for stability; Bland's rule
    // guarantees termination.
    const int m = static_cast<int>(q) + 1;
    const int nv = static_cast<int>(n);
    const int total = nv + m; // structural + artificial

    Eigen::MatrixXd A(m, total);
    Eigen::VectorXd b(m);
    A.setZero();
    for (int r = 0; r < m - 1; ++r) {
        double scale = std::max(T.col(r).cwiseAbs().maxCoeff(), 1.0);
        for (int j = 0; j < nv; ++j) A(r, j) = T(j, r) / scale;
        b(r) = 0.0;
    }
    A.row(m - 1).head(nv).setOnes();
    b(m - 1) = 1.0;

    // Flip rows so b >= 0 (already true) and install artificial basis.
    std::vector<int> basis(m);
    for (int r = 0; r < m; ++r) {
        A(r, nv + r) = 1.0;
        basis[r] = nv + r;
    }

    Eigen::VectorXd cost = Eigen::VectorXd::Zero(total);
    cost.tail(m).setOnes();

    const double tol = 1e-10;
    const int max_pivots = 200 * (total + m);
    for (int pivot = 0; pivot < max_pivots; ++pivot) {
        // Reduced costs: c_j - y'A_j with y from the current basis.
        Eigen::VectorXd y(m);
        for (int r = 0; r < m; ++r) y(r) = cost(basis[r]);

        int entering = -1;
        for (int j = 0; j < total; ++j) {
            const double rc = cost(j) - y.dot(A.col(j));
            if (rc < -tol) { entering = j; break; } // Bland: smallest index
        }
        if (entering < 0) break;

        int leaving = -1;
        double best_ratio = 0.0;
        for (int r = 0; r < m; ++r) {
            if (A(r, entering) > tol) {
                const double ratio = b(r) / A(r, entering);
                if (leaving < 0 || ratio < best_ratio - tol ||
                    (ratio < best_ratio + tol && basis[r] < basis[leaving])) {
                    leaving = r;
                    best_ratio = ratio;
                }
            }
        }
        if (leaving < 0) break; // unbounded: cannot happen in phase 1

        // Pivot.
        const double piv = A(leaving, entering);
        A.row(leaving) /= piv;
        b(leaving) /= piv;
        for (int r = 0; r < m; ++r) {
            if (r == leaving) continue;
            const double factor = A(r, entering);
            if (factor != 0.0) {
                A.row(r) -= factor * A.row(leaving);
                b(r) -= factor * b(leaving);
            }
        }
        basis[leaving] = entering;
    }

    double artificial_sum = 0.0;
    for (int r = 0; r < m; ++r)
        if (basis[r] >= nv) artificial_sum += b(r);
    return artificial_sum <= 1e-9;
}

} // namespace abel
