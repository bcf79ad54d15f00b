#include "abel/tuning.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace abel {

Tensor::Tensor(int q_, int order_) : q(q_), order(order_) {
    std::size_t size = 1;
    for (int i = 0; i < order_; ++i) size *= static_cast<std::size_t>(q_);
    v.assign(size, 0.0);
}

std::size_t Tensor::offset(std::initializer_list<int> idx) const {
    std::size_t off = 0;
    for (int i : idx) off = off * static_cast<std::size_t>(q) + static_cast<std::size_t>(i);
    return off;
}

std::string grouping_key(const Grouping& g) {
    std::string key;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (i) key += '|';
        key += std::to_string(g[i]);
    }
    return key;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> whiten(const Eigen::MatrixXd& T, double M) {
    const double Q = static_cast<double>(T.rows());
    Eigen::MatrixXd S = (M / Q) * (T.transpose() * T);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    const Eigen::VectorXd ev = es.eigenvalues();
    const double largest = ev(ev.size() - 1);
    if (largest <= 0.0 || ev(0) < 1e-12 * largest)
        throw DegenerateSecondMoment("blockwise second moment is not positive definite");

    const Eigen::VectorXd inv_sqrt = ev.array().rsqrt();
    Eigen::MatrixXd W =
        es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose();
    return {T * W, W};
}

Tensor alpha_hat(const Eigen::MatrixXd& T_w, double M, int v) {
    const int q = static_cast<int>(T_w.cols());
    const Eigen::Index Q = T_w.rows();
    if (v < 2 || v > 4) throw DomainError("alpha_hat supports orders 2..4");

    Tensor out(q, v);
    const double factor = std::pow(M, v - 1) / static_cast<double>(Q);

    std::vector<int> idx(static_cast<std::size_t>(v), 0);
    const std::size_t cells = out.v.size();
    for (std::size_t cell = 0; cell < cells; ++cell) {
        double sum = 0.0;
        for (Eigen::Index i = 0; i < Q; ++i) {
            double prod = 1.0;
            for (int k = 0; k < v; ++k) prod *= T_w(i, idx[static_cast<std::size_t>(k)]);
            sum += prod;
        }
        out.v[cell] = factor * sum;
        // advance row-major multi-index
        for (int k = v - 1; k >= 0; --k) {
            if (++idx[static_cast<std::size_t>(k)] < q) break;
            idx[static_cast<std::size_t>(k)] = 0;
        }
    }
    return out;
}

Tensor alpha_tilde_hat(const Eigen::MatrixXd& T_w, double M, const Grouping& grouping) {
    const int q = static_cast<int>(T_w.cols());
    const Eigen::Index Q = T_w.rows();
    const int d = static_cast<int>(grouping.size());
    const int k = std::accumulate(grouping.begin(), grouping.end(), 0);
    if (k < 3 || k > 4 || d < 2 || d > 3)
        throw UnsupportedGrouping("grouping " + grouping_key(grouping) +
                                  " outside supported order 3..4 with 2..3 groups");
    for (int s : grouping)
        if (s < 1) throw UnsupportedGrouping("empty group in signature");

    const int window = k - 2;
    const double factor = std::pow(M, k - 1) / static_cast<double>(Q);

    Tensor out(q, k);
    std::vector<int> idx(static_cast<std::size_t>(k), 0);
    const std::size_t cells = out.v.size();

    // Component products per block per group are recomputed on the fly;
    // Q and q are small in every caller (Q <= a few hundred, q <= ~10).
    for (std::size_t cell = 0; cell < cells; ++cell) {
        double sum = 0.0;
        if (d == 2) {
            const int s1 = grouping[0];
            for (Eigen::Index i1 = 0; i1 < Q; ++i1) {
                double p1 = 1.0;
                for (int c = 0; c < s1; ++c) p1 *= T_w(i1, idx[static_cast<std::size_t>(c)]);
                const Eigen::Index lo = std::max<Eigen::Index>(0, i1 - window);
                const Eigen::Index hi = std::min<Eigen::Index>(Q - 1, i1 + window);
                for (Eigen::Index i2 = lo; i2 <= hi; ++i2) {
                    double p2 = 1.0;
                    for (int c = s1; c < k; ++c)
                        p2 *= T_w(i2, idx[static_cast<std::size_t>(c)]);
                    sum += p1 * p2;
                }
            }
        } else { // d == 3, k is 3 or 4
            const int s1 = grouping[0];
            const int s2 = grouping[1];
            for (Eigen::Index i1 = 0; i1 < Q; ++i1) {
                double p1 = 1.0;
                for (int c = 0; c < s1; ++c) p1 *= T_w(i1, idx[static_cast<std::size_t>(c)]);
                const Eigen::Index lo = std::max<Eigen::Index>(0, i1 - window);
                const Eigen::Index hi = std::min<Eigen::Index>(Q - 1, i1 + window);
                for (Eigen::Index i2 = lo; i2 <= hi; ++i2) {
                    double p2 = 1.0;
                    for (int c = s1; c < s1 + s2; ++c)
                        p2 *= T_w(i2, idx[static_cast<std::size_t>(c)]);
                    for (Eigen::Index i3 = lo; i3 <= hi; ++i3) {
                        if (std::abs(static_cast<long>(i2 - i3)) > window) continue;
                        double p3 = 1.0;
                        for (int c = s1 + s2; c < k; ++c)
                            p3 *= T_w(i3, idx[static_cast<std::size_t>(c)]);
                        sum += p1 * p2 * p3;
                    }
                }
            }
        }
        out.v[cell] = factor * sum;
        for (int c = k - 1; c >= 0; --c) {
            if (++idx[static_cast<std::size_t>(c)] < q) break;
            idx[static_cast<std::size_t>(c)] = 0;
        }
    }
    return out;
}

const Tensor& MomentSet::atilde_at(const Grouping& g) const {
    const auto it = atilde.find(grouping_key(g));
    if (it == atilde.end())
        throw MissingMoments("moment set lacks grouping " + grouping_key(g));
    return it->second;
}

MomentSet compute_moments(const Eigen::MatrixXd& T_w, double M) {
    MomentSet ms;
    ms.q = static_cast<int>(T_w.cols());
    ms.M = M;
    ms.Q = static_cast<std::size_t>(T_w.rows());
    ms.alpha3 = alpha_hat(T_w, M, 3);
    ms.alpha4 = alpha_hat(T_w, M, 4);
    for (const Grouping& g : {Grouping{1, 1, 1}, Grouping{2, 1}, Grouping{2, 2}, Grouping{3, 1}})
        ms.atilde.emplace(grouping_key(g), alpha_tilde_hat(T_w, M, g));
    return ms;
}

TTerms t_terms(const MomentSet& ms) {
    const int q = ms.q;
    if (q <= 0) throw MissingMoments("empty moment set");
    const Tensor& a3 = ms.alpha3;
    const Tensor& a4 = ms.alpha4;
    const Tensor& g111 = ms.atilde_at({1, 1, 1});
    const Tensor& g21 = ms.atilde_at({2, 1});
    const Tensor& g22 = ms.atilde_at({2, 2});
    const Tensor& g31 = ms.atilde_at({3, 1});

    TTerms t;
    t.t1a = Eigen::MatrixXd::Zero(q, q);
    t.t1b = Eigen::MatrixXd::Zero(q, q);
    t.t1c = Eigen::MatrixXd::Zero(q, q);
    t.t2a = Eigen::MatrixXd::Zero(q, q);
    t.t2b = Eigen::MatrixXd::Zero(q, q);
    t.t3a = Eigen::MatrixXd::Zero(q, q);
    t.t3b = Eigen::MatrixXd::Zero(q, q);
    t.t3c = Eigen::MatrixXd::Zero(q, q);

    // Single-index contractions reused by the separable terms.
    Eigen::VectorXd a3_trace(q), g21_trace(q);
    for (int r = 0; r < q; ++r) {
        double sa = 0.0, sg = 0.0;
        for (int l = 0; l < q; ++l) {
            sa += a3.at({r, l, l});
            sg += g21.at({r, l, l});
        }
        a3_trace(r) = sa;   // alpha^{rll}
        g21_trace(r) = sg;  // atilde^{rl, l}
    }

    for (int r = 0; r < q; ++r) {
        for (int i = 0; i < q; ++i) {
            double t1a = 0.0, t1b = 0.0, t1c = 0.0, t2a = 0.0, t3a = 0.0, t3b = 0.0,
                   t3c = 0.0;
            for (int k = 0; k < q; ++k) {
                for (int l = 0; l < q; ++l) {
                    const double a_rkl = a3.at({r, k, l});
                    t1a += a_rkl * g111.at({i, k, l});
                    t1b += 0.375 * g21.at({r, k, l}) * g21.at({l, k, i}) -
                           (5.0 / 6.0) * a_rkl * g21.at({i, k, l}) -
                           (5.0 / 6.0) * a_rkl * g21.at({k, l, i}) +
                           (8.0 / 9.0) * a_rkl * a3.at({i, k, l});
                    t1c += 0.25 * a_rkl * g21.at({i, l, k}) -
                           (2.0 / 3.0) * a_rkl * g21.at({i, k, l}) +
                           (2.0 / 9.0) * a_rkl * a3.at({i, k, l});
                }
                t2a += -(5.0 / 12.0) * a3.at({i, r, k}) * g21_trace(k) -
                       (5.0 / 12.0) * a3_trace(k) * g21.at({i, k, r});
                t3a += -0.5 * g22.at({r, k, k, i});
                t3b += 0.375 * g22.at({r, k, i, k}) - 0.75 * a4.at({r, i, k, k});
                t3c += 0.25 * g22.at({r, k, i, k});
            }
            for (int l = 0; l < q; ++l) {
                t2a += (4.0 / 9.0) * a3.at({r, i, l}) * a3_trace(l);
                t3b += g31.at({i, r, l, l});
            }
            t2a += 0.375 * g21_trace(r) * g21_trace(i);
            t.t1a(r, i) = t1a;
            t.t1b(r, i) = t1b;
            t.t1c(r, i) = t1c;
            t.t2a(r, i) = t2a;
            t.t2b(r, i) = 0.25 * g21_trace(r) * g21_trace(i) -
                          (1.0 / 3.0) * a3_trace(r) * g21_trace(i) +
                          (1.0 / 9.0) * a3_trace(r) * a3_trace(i);
            t.t3a(r, i) = t3a;
            t.t3b(r, i) = t3b;
            t.t3c(r, i) = t3c;
        }
    }
    return t;
}

Eigen::MatrixXd a_ri_matrix(const MomentSet& ms) {
    const TTerms t = t_terms(ms);
    auto sym = [](const Eigen::MatrixXd& m) { return m + m.transpose(); };
    Eigen::MatrixXd a = sym(t.t1a) + sym(t.t1b) + t.t1c + sym(t.t2a) + t.t2b +
                        sym(t.t3a) + sym(t.t3b) + t.t3c;
    return a / static_cast<double>(ms.q);
}

double a_from_aii(double a_ii_trace, std::size_t Q, std::size_t n, int q) {
    return 0.5 * (static_cast<double>(Q) / static_cast<double>(n)) * a_ii_trace /
           static_cast<double>(q);
}

double a_plugin(const Eigen::MatrixXd& g, const BlockScheme& scheme,
                std::vector<std::string>* warnings) {
    if (scheme.kind == BlockKind::overlapping && warnings)
        warnings->push_back(
            "tuning-parameter moments assume non-overlapping blocks; "
            "overlapping scheme supplied");

    const Eigen::MatrixXd T = block_means(g, scheme);
    const double M_eff = scheme.M > 0 ? static_cast<double>(scheme.M) : scheme.mean_length();
    auto [T_w, W] = whiten(T, M_eff);
    const MomentSet ms = compute_moments(T_w, M_eff);
    const Eigen::MatrixXd a_ri = a_ri_matrix(ms);
    return a_from_aii(a_ri.trace(), scheme.Q, scheme.n, ms.q);
}

Eigen::MatrixXd nbb_resample(const Eigen::MatrixXd& series, std::size_t block_length,
                             Philox& rng) {
    const std::size_t n = static_cast<std::size_t>(series.rows());
    if (block_length == 0 || block_length > n)
        throw InvalidBlockSpec("bootstrap block length must lie in [1, n]");

    const std::size_t n_blocks = n / block_length; // complete blocks only
    const std::size_t draws = (n + block_length - 1) / block_length;

    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), series.cols());
    std::size_t filled = 0;
    for (std::size_t d = 0; d < draws && filled < n; ++d) {
        const std::size_t pick = rng.next_u64() % n_blocks;
        const std::size_t take = std::min(block_length, n - filled);
        out.middleRows(static_cast<Eigen::Index>(filled), static_cast<Eigen::Index>(take)) =
            series.middleRows(static_cast<Eigen::Index>(pick * block_length),
                              static_cast<Eigen::Index>(take));
        filled += take;
    }
    return out;
}

std::pair<double, BiasCorrectionInfo> apply_bias_gate(double a_hat,
                                                      const std::vector<double>& boot) {
    BiasCorrectionInfo info;
    info.a_plugin = a_hat;
    info.replications = boot.size();
    if (boot.size() < 2)
        throw BootstrapDegenerate("need at least two successful bootstrap replications");

    const double mean =
        std::accumulate(boot.begin(), boot.end(), 0.0) / static_cast<double>(boot.size());
    double ss = 0.0;
    for (double b : boot) ss += (b - mean) * (b - mean);
    info.bias = mean - a_hat;
    info.se = std::sqrt(ss / static_cast<double>(boot.size() - 1));
    info.corrected = std::abs(info.bias) >= info.se;
    const double a = info.corrected ? a_hat - info.bias : a_hat;
    return {a, info};
}

std::pair<double, BiasCorrectionInfo> a_bias_corrected(
    const Eigen::MatrixXd& data,
    const std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>& producer,
    const BlockScheme& scheme, const BootstrapSettings& settings) {
    if (settings.replications < 50)
        throw ConfigError("bootstrap replications must be >= 50");

    std::vector<std::string> warnings;
    const double a_hat = a_plugin(producer(data), scheme, &warnings);

    std::size_t block =
        settings.block_length > 0
            ? settings.block_length
            : (scheme.M > 0 ? scheme.M
                            : std::max<std::size_t>(
                                  1, static_cast<std::size_t>(std::lround(scheme.mean_length()))));
    block = std::min(block, static_cast<std::size_t>(data.rows()));

    std::vector<double> boot;
    boot.reserve(settings.replications);
    std::size_t failures = 0;
    for (std::size_t b = 0; b < settings.replications; ++b) {
        Philox rng(settings.seed, b + 1); // substream b+1; 0 is the caller's
        try {
            const Eigen::MatrixXd star = nbb_resample(data, block, rng);
            boot.push_back(a_plugin(producer(star), scheme, nullptr));
        } catch (const Error&) {
            ++failures;
        }
    }
    if (failures * 5 > settings.replications)
        throw BootstrapDegenerate("more than 20% of bootstrap resamples failed (" +
                                  std::to_string(failures) + "/" +
                                  std::to_string(settings.replications) + ")");

    auto [a, info] = apply_bias_gate(a_hat, boot);
    info.failures = failures;
    info.warnings = std::move(warnings);
    return {a, info};
}

} // namespace abel
