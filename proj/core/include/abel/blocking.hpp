#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <utility>
#include <vector>

#include "abel/errors.hpp"

namespace abel {

enum class BlockKind { overlapping, nonoverlapping, progressive };

// A data-blocking layout over n observations plus the scale factor for
// turning the log-likelihood ratio into the chi-square calibrated
// statistic. Block starts are 0-based.
struct BlockScheme {
    BlockKind kind = BlockKind::nonoverlapping;
    std::size_t n = 0;
    std::size_t M = 0; // common block length; 0 for progressive
    std::size_t L = 0; // gap between starts;  0 for progressive
    std::vector<std::pair<std::size_t, std::size_t>> blocks; // (start, length)
    std::size_t Q = 0;
    double scale = 1.0; // n / (Q * mean block length)

    double total_length() const {
        double s = 0.0;
        for (const auto& b : blocks) s += static_cast<double>(b.second);
        return s;
    }
    double mean_length() const {
        return Q == 0 ? 0.0 : total_length() / static_cast<double>(Q);
    }
};

// Blocks starting at 0, L, 2L, ..., each of length M, with
// Q = floor((n - M)/L) + 1 and scale = n/(QM). L == M gives the
// non-overlapping layout. Trailing observations that do not fill a whole
// block are dropped.
BlockScheme make_blocks(std::size_t n, std::size_t M, std::size_t L);

// Block-length-free layout: non-overlapping blocks of lengths 1, 2, ..., k
// with k the largest integer such that k(k+1)/2 <= n; leftover observations
// are absorbed into the last block. Covers all n rows, so scale == 1.
BlockScheme progressive_blocks(std::size_t n);

// Per-block means of the rows of g; output has Q rows.
Eigen::MatrixXd block_means(const Eigen::MatrixXd& g, const BlockScheme& scheme);

} // namespace abel
