#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "abel/blocking.hpp"
#include "abel/errors.hpp"
#include "abel/rng.hpp"

namespace abel {

// Dense tensor of small order (2..4) over a q-dimensional index set,
// stored flat in row-major order.
struct Tensor {
    int q = 0;
    int order = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(int q_, int order_);

    double& at(std::initializer_list<int> idx) { return v[offset(idx)]; }
    double at(std::initializer_list<int> idx) const { return v[offset(idx)]; }

    std::size_t offset(std::initializer_list<int> idx) const;
};

// Group sizes of a grouped-moment signature, e.g. {2, 1} for a
// second-by-first order split of a third moment.
using Grouping = std::vector<int>;

std::string grouping_key(const Grouping& g);

// Whitening transform: returns (T_w, W) with W the symmetric inverse
// square root of S_hat = (M/Q) sum_i T_i T_i', so that
// (M/Q) sum_i T_w,i T_w,i' = I_q. Throws DegenerateSecondMoment when the
// smallest eigenvalue of S_hat is below 1e-12 times the largest.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> whiten(const Eigen::MatrixXd& T,
                                                   double M);

// Sample single-block moment tensor of order v in {2, 3, 4}:
//   M^{v-1} (1/Q) sum_i T_i^{j_1} ... T_i^{j_v}.
Tensor alpha_hat(const Eigen::MatrixXd& T_w, double M, int v);

// Sample grouped moment tensor: component tuples are split into groups
// carried by distinct block indices i(1), ..., i(d), a tuple contributing
// only when every pair of its block indices is within k - 2 of each other
// (k = total order). Each group of size s carries a factor M^s and the
// whole term a factor M^{-1}. Supported orders k in {3, 4} with d in
// {2, 3} groups; anything else throws UnsupportedGrouping.
Tensor alpha_tilde_hat(const Eigen::MatrixXd& T_w, double M, const Grouping& grouping);

// All sample moments needed by the tuning-parameter contractions.
struct MomentSet {
    int q = 0;
    double M = 0.0;
    std::size_t Q = 0;
    Tensor alpha3; // order 3
    Tensor alpha4; // order 4
    std::map<std::string, Tensor> atilde; // keys "1|1|1", "2|1", "2|2", "3|1"

    const Tensor& atilde_at(const Grouping& g) const;
};

MomentSet compute_moments(const Eigen::MatrixXd& T_w, double M);

// The eight contraction matrices entering the tuning parameter; each is
// q x q indexed by (r, i). Primed variants are transposes in (r, i).
struct TTerms {
    Eigen::MatrixXd t1a, t1b, t1c, t2a, t2b, t3a, t3b, t3c;
};

TTerms t_terms(const MomentSet& ms);

// a_{ri} = (1/q) (t1a[2] + t1b[2] + t1c + t2a[2] + t2b + t3a[2] + t3b[2] + t3c)
// where x[2] = x + x'.
Eigen::MatrixXd a_ri_matrix(const MomentSet& ms);

// Final assembly: a = (1/(2q)) (Q/n) tr(a_ri).
double a_from_aii(double a_ii_trace, std::size_t Q, std::size_t n, int q);

// Plug-in estimate of the high-precision tuning parameter from raw
// estimating values: block means -> whitening -> moment tensors ->
// contractions. May be negative. Designed for equal-gap non-overlapping
// schemes; other layouts use the mean block length as the moment scale and
// append a note to `warnings` when the scheme overlaps.
double a_plugin(const Eigen::MatrixXd& g, const BlockScheme& scheme,
                std::vector<std::string>* warnings = nullptr);

struct BootstrapSettings {
    std::size_t replications = 100; // >= 50
    std::size_t block_length = 0;   // 0: use the analysis block length
    std::uint64_t seed = 0;
};

// Non-overlapping block bootstrap resample of the rows of `series`:
// ceil(n/b) blocks drawn uniformly with replacement from the partition
// into complete length-b blocks, concatenated and truncated to n rows.
Eigen::MatrixXd nbb_resample(const Eigen::MatrixXd& series, std::size_t block_length,
                             Philox& rng);

struct BiasCorrectionInfo {
    double a_plugin = 0.0;
    double bias = 0.0;
    double se = 0.0;
    bool corrected = false;
    std::size_t replications = 0;
    std::size_t failures = 0;
    std::vector<std::string> warnings;
};

// Gate shared by the estimator and its tests: correct only when the
// estimated bias dominates the bootstrap standard error; otherwise return
// the plug-in value bit-identically.
std::pair<double, BiasCorrectionInfo> apply_bias_gate(double a_hat,
                                                      const std::vector<double>& boot);

// Bias-corrected plug-in estimate. `producer` maps a (resampled) data
// matrix to estimating values; resampling acts on the rows of `data` via
// the NBB with per-replication substreams derived from settings.seed.
// Throws BootstrapDegenerate when more than 20% of resamples fail.
std::pair<double, BiasCorrectionInfo> a_bias_corrected(
    const Eigen::MatrixXd& data,
    const std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>& producer,
    const BlockScheme& scheme, const BootstrapSettings& settings);

} // namespace abel
