#include <doctest.h>

#include "abel/blocking.hpp"
#include "abel/rng.hpp"

using abel::BlockKind;
using abel::block_means;
using abel::make_blocks;
using abel::progressive_blocks;

TEST_CASE("non-overlapping layout") {
    const auto s = make_blocks(100, 10, 10);
    CHECK(s.kind == BlockKind::nonoverlapping);
    CHECK(s.Q == 10);
    CHECK(s.scale == doctest::Approx(1.0));
    CHECK(s.blocks.front() == std::pair<std::size_t, std::size_t>{0, 10});
    CHECK(s.blocks.back() == std::pair<std::size_t, std::size_t>{90, 10});
}

TEST_CASE("maximally overlapping layout") {
    const auto s = make_blocks(100, 10, 1);
    CHECK(s.kind == BlockKind::overlapping);
    CHECK(s.Q == 91);
    CHECK(s.scale == doctest::Approx(100.0 / 910.0));
}

TEST_CASE("single-block edge case") {
    const auto s = make_blocks(5, 5, 1);
    CHECK(s.Q == 1);
    CHECK(s.scale == doctest::Approx(1.0));
}

TEST_CASE("invalid specs") {
    CHECK_THROWS_AS(make_blocks(10, 11, 1), abel::InvalidBlockSpec);
    CHECK_THROWS_AS(make_blocks(10, 5, 6), abel::InvalidBlockSpec);
    CHECK_THROWS_AS(make_blocks(10, 0, 1), abel::InvalidBlockSpec);
    CHECK_THROWS_AS(make_blocks(0, 1, 1), abel::InvalidBlockSpec);
}

TEST_CASE("block means") {
    Eigen::MatrixXd g(4, 1);
    g << 1, 3, 5, 7;
    const auto nonoverlap = block_means(g, make_blocks(4, 2, 2));
    CHECK(nonoverlap(0, 0) == doctest::Approx(2.0));
    CHECK(nonoverlap(1, 0) == doctest::Approx(6.0));

    Eigen::MatrixXd g3(3, 1);
    g3 << 1, 3, 5;
    const auto overlap = block_means(g3, make_blocks(3, 2, 1));
    CHECK(overlap(0, 0) == doctest::Approx(2.0));
    CHECK(overlap(1, 0) == doctest::Approx(4.0));

    Eigen::MatrixXd constant = Eigen::MatrixXd::Constant(12, 3, 2.5);
    const auto means = block_means(constant, make_blocks(12, 5, 2));
    CHECK((means.array() - 2.5).abs().maxCoeff() < 1e-14);

    CHECK_THROWS_AS(block_means(g, make_blocks(5, 2, 2)), abel::ShapeMismatch);
}

TEST_CASE("progressive layout follows the triangular rule") {
    const auto s10 = progressive_blocks(10);
    CHECK(s10.Q == 4);
    CHECK(s10.blocks == std::vector<std::pair<std::size_t, std::size_t>>{
                            {0, 1}, {1, 2}, {3, 3}, {6, 4}});
    CHECK(s10.scale == doctest::Approx(1.0));

    const auto s3 = progressive_blocks(3);
    CHECK(s3.Q == 2);
    CHECK(s3.blocks == std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 2}});

    const auto s100 = progressive_blocks(100);
    CHECK(s100.Q == 13);
    CHECK(s100.blocks.back().second == 13 + 9); // leftover absorbed
    CHECK(s100.total_length() == doctest::Approx(100.0));

    CHECK_THROWS_AS(progressive_blocks(2), abel::InvalidBlockSpec);
}

TEST_CASE("fuzz: blocks stay in range and L = M partitions a prefix") {
    abel::Philox rng(31, 0);
    for (int rep = 0; rep < 500; ++rep) {
        const std::size_t n = 1 + rng.next_u32() % 200;
        const std::size_t M = 1 + rng.next_u32() % n;
        const std::size_t L = 1 + rng.next_u32() % M;
        const auto s = make_blocks(n, M, L);
        CHECK(s.Q >= 1);
        for (const auto& [start, len] : s.blocks) {
            CHECK(len == M);
            CHECK(start + len <= n);
        }
        if (L == M) {
            for (std::size_t i = 0; i < s.Q; ++i) CHECK(s.blocks[i].first == i * M);
            CHECK(s.Q * M <= n);
        }
    }
}

TEST_CASE("grand mean preserved by full-coverage non-overlapping schemes") {
    abel::Philox rng(32, 0);
    Eigen::MatrixXd g(24, 2);
    for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = rng.normal();
    for (std::size_t M : {1u, 2u, 3u, 4u, 6u, 8u, 12u}) {
        const auto T = block_means(g, make_blocks(24, M, M));
        CHECK((T.colwise().mean() - g.colwise().mean()).norm() < 1e-12);
    }
    // Progressive covers everything, so length-weighted means agree too.
    const auto sp = progressive_blocks(24);
    const auto Tp = block_means(g, sp);
    Eigen::RowVectorXd weighted = Eigen::RowVectorXd::Zero(2);
    for (std::size_t i = 0; i < sp.Q; ++i)
        weighted += Tp.row(static_cast<Eigen::Index>(i)) *
                    static_cast<double>(sp.blocks[i].second);
    weighted /= 24.0;
    CHECK((weighted - g.colwise().mean()).norm() < 1e-12);
}
