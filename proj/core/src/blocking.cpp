#include "abel/blocking.hpp"

#include <string>

namespace abel {

BlockScheme make_blocks(std::size_t n, std::size_t M, std::size_t L) {
    if (n == 0 || M == 0 || L == 0)
        throw InvalidBlockSpec("n, M and L must all be positive");
    if (M > n)
        throw InvalidBlockSpec("block length M = " + std::to_string(M) +
                               " exceeds sample size n = " + std::to_string(n));
    if (L > M)
        throw InvalidBlockSpec("gap L = " + std::to_string(L) +
                               " exceeds block length M = " + std::to_string(M));

    BlockScheme s;
    s.kind = (L == M) ? BlockKind::nonoverlapping : BlockKind::overlapping;
    s.n = n;
    s.M = M;
    s.L = L;
    s.Q = (n - M) / L + 1;
    s.blocks.reserve(s.Q);
    for (std::size_t i = 0; i < s.Q; ++i) s.blocks.emplace_back(i * L, M);
    s.scale = static_cast<double>(n) /
              (static_cast<double>(s.Q) * static_cast<double>(M));
    return s;
}

BlockScheme progressive_blocks(std::size_t n) {
    if (n < 3)
        throw InvalidBlockSpec("progressive blocking needs n >= 3, got n = " +
                               std::to_string(n));

    std::size_t k = 0;
    while ((k + 1) * (k + 2) / 2 <= n) ++k;

    BlockScheme s;
    s.kind = BlockKind::progressive;
    s.n = n;
    s.M = 0;
    s.L = 0;
    s.Q = k;
    s.blocks.reserve(k);
    std::size_t start = 0;
    for (std::size_t len = 1; len <= k; ++len) {
        s.blocks.emplace_back(start, len);
        start += len;
    }
    // Absorb leftover rows into the last block.
    if (start < n) s.blocks.back().second += n - start;
    s.scale = static_cast<double>(n) / (static_cast<double>(s.Q) * s.mean_length());
    return s;
}

Eigen::MatrixXd block_means(const Eigen::MatrixXd& g, const BlockScheme& scheme) {
    if (static_cast<std::size_t>(g.rows()) != scheme.n)
        throw ShapeMismatch("data has " + std::to_string(g.rows()) +
                            " rows but the block scheme expects " +
                            std::to_string(scheme.n));

    Eigen::MatrixXd T(static_cast<Eigen::Index>(scheme.Q), g.cols());
    for (std::size_t i = 0; i < scheme.Q; ++i) {
        const auto [start, len] = scheme.blocks[i];
        T.row(static_cast<Eigen::Index>(i)) =
            g.middleRows(static_cast<Eigen::Index>(start),
                         static_cast<Eigen::Index>(len))
                .colwise()
                .mean();
    }
    return T;
}

} // namespace abel
