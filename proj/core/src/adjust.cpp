#include "abel/adjust.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace abel {

AdjustmentSpec AdjustmentSpec::fixed(double a) {
    if (!(a > 0.0)) throw InvalidTuning("fixed tuning parameter must be positive");
    AdjustmentSpec s;
    s.rule = Rule::fixed;
    s.fixed_a = a;
    s.resolved_a = a;
    return s;
}

AdjustmentSpec AdjustmentSpec::log_rule() {
    AdjustmentSpec s;
    s.rule = Rule::log_rule;
    return s;
}

AdjustmentSpec AdjustmentSpec::high_precision(const BootstrapSettings& bs) {
    AdjustmentSpec s;
    s.rule = Rule::high_precision;
    s.bootstrap = bs;
    return s;
}

std::string AdjustmentSpec::label() const {
    switch (rule) {
        case Rule::none: return "bel";
        case Rule::log_rule: return "abel_log";
        case Rule::high_precision: return "abel_hp";
        case Rule::fixed: {
            std::ostringstream os;
            os << "abel_" << fixed_a;
            return os.str();
        }
    }
    return "?";
}

Eigen::MatrixXd augment(const Eigen::MatrixXd& T, double a) {
    if (!(a > 0.0)) throw InvalidTuning("augment requires a > 0");
    const Eigen::VectorXd t_bar = T.colwise().mean();
    Eigen::MatrixXd out(T.rows() + 1, T.cols());
    out.topRows(T.rows()) = T;
    out.row(T.rows()) = -a * t_bar.transpose();
    return out;
}

Eigen::MatrixXd augment_two_point(const Eigen::MatrixXd& T, double a) {
    if (!(a < 0.0)) throw InvalidTuning("augment_two_point requires a < 0; use augment");
    const Eigen::VectorXd t_bar = T.colwise().mean();
    const double a1 = 2.0 * a;
    const double a2 = -a;
    Eigen::MatrixXd out(T.rows() + 2, T.cols());
    out.topRows(T.rows()) = T;
    out.row(T.rows()) = -a1 * t_bar.transpose();
    out.row(T.rows() + 1) = -a2 * t_bar.transpose();
    return out;
}

double bel_statistic(const Eigen::MatrixXd& g, const BlockScheme& scheme) {
    const Eigen::MatrixXd T = block_means(g, scheme);
    const double lr = log_el_ratio(T);
    if (std::isinf(lr)) return std::numeric_limits<double>::infinity();
    return std::max(0.0, -2.0 * scheme.scale * lr);
}

AdjustmentSpec resolve_adjustment(const AdjustmentSpec& adj, const Eigen::MatrixXd& g,
                                  const BlockScheme& scheme, BiasCorrectionInfo* info) {
    AdjustmentSpec out = adj;
    switch (adj.rule) {
        case AdjustmentSpec::Rule::none:
            out.resolved_a = 0.0;
            break;
        case AdjustmentSpec::Rule::fixed:
            out.resolved_a = adj.fixed_a;
            break;
        case AdjustmentSpec::Rule::log_rule:
            out.resolved_a = 0.5 * std::log(static_cast<double>(scheme.n));
            break;
        case AdjustmentSpec::Rule::high_precision: {
            if (!out.resolved_a) {
                auto [a, bc] = a_bias_corrected(
                    g, [](const Eigen::MatrixXd& rows) { return rows; }, scheme,
                    adj.bootstrap);
                out.resolved_a = a;
                if (info) *info = bc;
            }
            break;
        }
    }
    if (info && !adj.is_bel()) {
        const double bound =
            static_cast<double>(scheme.n) / std::max(1.0, static_cast<double>(scheme.M));
        if (*out.resolved_a >= bound)
            info->warnings.push_back("tuning parameter a exceeds the n/M rate bound; "
                                     "asymptotic calibration is not guaranteed");
    }
    return out;
}

double abel_statistic(const Eigen::MatrixXd& g, const BlockScheme& scheme,
                      const AdjustmentSpec& adj) {
    if (adj.is_bel()) return bel_statistic(g, scheme);

    double a;
    if (adj.resolved_a) {
        a = *adj.resolved_a;
    } else {
        a = *resolve_adjustment(adj, g, scheme).resolved_a;
    }

    const Eigen::MatrixXd T = block_means(g, scheme);
    if (a == 0.0) {
        // Limit case: the pseudo point degenerates to the origin and the
        // program coincides with the unadjusted one.
        const double lr = log_el_ratio(T);
        if (std::isinf(lr)) return std::numeric_limits<double>::infinity();
        return std::max(0.0, -2.0 * scheme.scale * lr);
    }

    const Eigen::MatrixXd T_adj = a > 0.0 ? augment(T, a) : augment_two_point(T, a);
    const double lr = log_el_ratio(T_adj);
    if (std::isinf(lr))
        throw NonConvergence("adjusted EL did not converge despite augmentation");
    return std::max(0.0, -2.0 * scheme.scale * lr);
}

} // namespace abel
