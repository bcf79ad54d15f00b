#include "abel/stats.hpp"

#include <cmath>
#include <string>

namespace abel {

namespace {

constexpr int kMaxTerms = 1000;
constexpr double kEps = 1e-16;

// Series representation, preferred for x < a + 1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double term = sum;
    for (int i = 0; i < kMaxTerms; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * kEps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for the upper tail Q(a, x), preferred for x >= a + 1.
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxTerms; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEps) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

} // namespace

double gamma_p(double a, double x) {
    if (x < 0.0 || a <= 0.0)
        throw DomainError("gamma_p requires x >= 0 and a > 0");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_cf(a, x);
}

double chi2_cdf(int df, double x) {
    if (df < 1) throw DomainError("chi2_cdf requires df >= 1");
    if (x < 0.0) throw DomainError("chi2_cdf requires x >= 0");
    return gamma_p(0.5 * df, 0.5 * x);
}

double chi2_quantile(int df, double p) {
    if (df < 1) throw DomainError("chi2_quantile requires df >= 1");
    if (!(p > 0.0 && p < 1.0))
        throw DomainError("chi2_quantile requires p in (0, 1), got p = " +
                          std::to_string(p));

    double hi = static_cast<double>(df);
    while (chi2_cdf(df, hi) < p) hi *= 2.0;
    double lo = 0.0;
    double mid = 0.5 * hi;
    for (int i = 0; i < 200; ++i) {
        mid = 0.5 * (lo + hi);
        if (chi2_cdf(df, mid) < p)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-14 * (1.0 + mid)) break;
    }
    return mid;
}

Eigen::MatrixXd ar1_simulate(std::size_t n, std::size_t d, double rho, Philox& rng) {
    if (std::abs(rho) >= 1.0)
        throw DomainError("ar1_simulate requires |rho| < 1");

    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    const double stationary_sd = 1.0 / std::sqrt(1.0 - rho * rho);
    for (std::size_t j = 0; j < d; ++j)
        x(0, static_cast<Eigen::Index>(j)) = stationary_sd * rng.normal();
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                rho * x(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j)) +
                rng.normal();
    return x;
}

} // namespace abel
