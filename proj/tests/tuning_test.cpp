#include <doctest.h>

#include <cmath>

#include "abel/rng.hpp"
#include "abel/tuning.hpp"
#include "oracles.hpp"

using abel::alpha_hat;
using abel::alpha_tilde_hat;
using abel::apply_bias_gate;
using abel::a_plugin;
using abel::make_blocks;
using abel::nbb_resample;
using abel::whiten;

TEST_CASE("whitening contract") {
    SUBCASE("already-white input keeps an identity transform") {
        Eigen::MatrixXd T(2, 1);
        T << 1, -1; // (M/Q) sum T^2 = 1 with M = 1
        const auto [Tw, W] = whiten(T, 1.0);
        CHECK(W(0, 0) == doctest::Approx(1.0));
        CHECK(Tw(0, 0) == doctest::Approx(1.0));
    }
    SUBCASE("scalar square root") {
        Eigen::MatrixXd T(2, 1);
        T << 2, -2; // S = 4
        const auto [Tw, W] = whiten(T, 1.0);
        CHECK(W(0, 0) == doctest::Approx(0.5));
        CHECK(Tw(0, 0) == doctest::Approx(1.0));
        CHECK(Tw(1, 0) == doctest::Approx(-1.0));
    }
    SUBCASE("random 3-d input whitens to the identity") {
        abel::Philox rng(1, 0);
        Eigen::MatrixXd T(40, 3);
        for (Eigen::Index i = 0; i < T.size(); ++i) T(i) = rng.normal();
        const double M = 5.0;
        const auto [Tw, W] = whiten(T, M);
        const Eigen::MatrixXd S = (M / 40.0) * Tw.transpose() * Tw;
        CHECK((S - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("degenerate input throws") {
        Eigen::MatrixXd T(3, 2);
        T << 1, 1, 2, 2, 3, 3;
        CHECK_THROWS_AS(whiten(T, 1.0), abel::DegenerateSecondMoment);
    }
}

TEST_CASE("single-block moments") {
    Eigen::MatrixXd T(2, 1);
    T << 1, -1;
    CHECK(alpha_hat(T, 1.0, 2).at({0, 0}) == doctest::Approx(1.0));
    CHECK(alpha_hat(T, 1.0, 3).at({0, 0, 0}) == doctest::Approx(0.0));
    CHECK(alpha_hat(T, 1.0, 4).at({0, 0, 0, 0}) == doctest::Approx(1.0));

    // Whitened data always has identity second moment.
    abel::Philox rng(2, 0);
    Eigen::MatrixXd raw(30, 2);
    for (Eigen::Index i = 0; i < raw.size(); ++i) raw(i) = rng.normal();
    const double M = 3.0;
    const auto [Tw, W] = whiten(raw, M);
    const auto a2 = alpha_hat(Tw, M, 2);
    CHECK(a2.at({0, 0}) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(a2.at({1, 1}) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(a2.at({0, 1})) < 1e-10);
}

TEST_CASE("grouped moments against direct summation") {
    SUBCASE("single block reduces to M^2 T^j T^k T^l") {
        Eigen::MatrixXd T(1, 2);
        T << 0.7, -1.3;
        const double M = 4.0;
        const auto g = alpha_tilde_hat(T, M, {1, 1, 1});
        CHECK(g.at({0, 0, 1}) == doctest::Approx(M * M * 0.7 * 0.7 * -1.3));
    }
    SUBCASE("pairs within the window") {
        Eigen::MatrixXd T(2, 1);
        T << 1, -1;
        const auto g = alpha_tilde_hat(T, 1.0, {2, 1});
        CHECK(g.at({0, 0, 0}) ==
              doctest::Approx(oracle::naive_alpha_tilde(T, 1.0, {2, 1}, {0, 0, 0})));
    }
    SUBCASE("identical rows, closed form (5Q-6)/Q scale") {
        const double c = 0.9;
        Eigen::MatrixXd T = Eigen::MatrixXd::Constant(6, 1, c);
        const double M = 2.0;
        const auto g = alpha_tilde_hat(T, M, {2, 2});
        const double expected = std::pow(M, 3) * std::pow(c, 4) * (5.0 * 6 - 6) / 6;
        CHECK(g.at({0, 0, 0, 0}) == doctest::Approx(expected));
    }
    SUBCASE("random inputs match the oracle for every supported shape") {
        abel::Philox rng(3, 0);
        Eigen::MatrixXd T(7, 2);
        for (Eigen::Index i = 0; i < T.size(); ++i) T(i) = rng.normal();
        const double M = 3.0;
        for (const auto& groups :
             {std::vector<int>{1, 1, 1}, {2, 1}, {2, 2}, {3, 1}}) {
            const auto g = alpha_tilde_hat(T, M, groups);
            int k = 0;
            for (int s : groups) k += s;
            std::vector<int> idx(static_cast<std::size_t>(k), 0);
            for (int flat = 0; flat < (1 << k); ++flat) {
                for (int b = 0; b < k; ++b)
                    idx[static_cast<std::size_t>(b)] = (flat >> b) & 1;
                double lib = 0.0;
                if (k == 3) lib = g.at({idx[0], idx[1], idx[2]});
                else lib = g.at({idx[0], idx[1], idx[2], idx[3]});
                CHECK(lib == doctest::Approx(oracle::naive_alpha_tilde(T, M, groups, idx))
                                 .epsilon(1e-12));
            }
        }
    }
    SUBCASE("unsupported shapes throw") {
        Eigen::MatrixXd T(3, 1);
        T << 1, 2, 3;
        CHECK_THROWS_AS(alpha_tilde_hat(T, 1.0, {1, 1}), abel::UnsupportedGrouping);
        CHECK_THROWS_AS(alpha_tilde_hat(T, 1.0, {3, 2}), abel::UnsupportedGrouping);
        CHECK_THROWS_AS(alpha_tilde_hat(T, 1.0, {1, 1, 1, 1}),
                        abel::UnsupportedGrouping);
    }
}

TEST_CASE("tensor symmetries on random whitened data") {
    abel::Philox rng(4, 0);
    Eigen::MatrixXd raw(24, 2);
    for (Eigen::Index i = 0; i < raw.size(); ++i) raw(i) = rng.normal();
    const double M = 2.0;
    const auto [Tw, W] = whiten(raw, M);

    const auto a3 = alpha_hat(Tw, M, 3);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c) {
                CHECK(a3.at({a, b, c}) == doctest::Approx(a3.at({b, a, c})));
                CHECK(a3.at({a, b, c}) == doctest::Approx(a3.at({c, b, a})));
            }

    const auto g21 = alpha_tilde_hat(Tw, M, {2, 1});
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c)
                CHECK(g21.at({a, b, c}) == doctest::Approx(g21.at({b, a, c})));

    const auto g22 = alpha_tilde_hat(Tw, M, {2, 2});
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c)
                for (int d = 0; d < 2; ++d) {
                    CHECK(g22.at({a, b, c, d}) == doctest::Approx(g22.at({b, a, c, d})));
                    CHECK(g22.at({a, b, c, d}) == doctest::Approx(g22.at({a, b, d, c})));
                }
}

TEST_CASE("contractions: hand-set single-entry moment sets") {
    abel::MomentSet ms;
    ms.q = 1;
    ms.M = 1.0;
    ms.Q = 4;
    ms.alpha3 = abel::Tensor(1, 3);
    ms.alpha4 = abel::Tensor(1, 4);
    ms.atilde.emplace("1|1|1", abel::Tensor(1, 3));
    ms.atilde.emplace("2|1", abel::Tensor(1, 3));
    ms.atilde.emplace("2|2", abel::Tensor(1, 4));
    ms.atilde.emplace("3|1", abel::Tensor(1, 4));

    SUBCASE("all-zero moments contract to zero") {
        const auto t = abel::t_terms(ms);
        CHECK(t.t1a(0, 0) == 0.0);
        CHECK(t.t2b(0, 0) == 0.0);
        CHECK(t.t3b(0, 0) == 0.0);
        CHECK(abel::a_ri_matrix(ms)(0, 0) == 0.0);
    }
    SUBCASE("t1a is a single product for q = 1") {
        ms.alpha3.at({0, 0, 0}) = 1.0;
        ms.atilde.at("1|1|1").at({0, 0, 0}) = 2.0;
        const auto t = abel::t_terms(ms);
        CHECK(t.t1a(0, 0) == doctest::Approx(2.0));
    }
}

TEST_CASE("a_plugin matches the naive-loop oracle") {
    abel::Philox rng(6, 0);
    for (int rep = 0; rep < 40; ++rep) {
        const int q = 1 + static_cast<int>(rng.next_u32() % 2);
        const int M = 1 + static_cast<int>(rng.next_u32() % 3);
        const int Q = 2 + static_cast<int>(rng.next_u32() % 5);
        const int n = M * Q;
        Eigen::MatrixXd g(n, q);
        for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = rng.normal() + 0.1;
        const auto scheme = make_blocks(static_cast<std::size_t>(n),
                                        static_cast<std::size_t>(M),
                                        static_cast<std::size_t>(M));
        double lib = 0.0;
        try {
            lib = a_plugin(g, scheme);
        } catch (const abel::DegenerateSecondMoment&) {
            continue;
        }
        const double naive = oracle::naive_a_plugin(g, M);
        CHECK(std::abs(lib - naive) < 1e-10);
    }
}

TEST_CASE("frozen two-row case exercises a negative plug-in value") {
    Eigen::MatrixXd g(2, 1);
    g << 1, -1;
    const auto scheme = make_blocks(2, 1, 1);
    const double a = a_plugin(g, scheme);
    CHECK(a == doctest::Approx(-0.75)); // hand-derived: a_ii = -1.5, Q = n = 2
    CHECK(a == doctest::Approx(oracle::naive_a_plugin(g, 1)));
}

TEST_CASE("doubling Q at fixed moments doubles a") {
    CHECK(abel::a_from_aii(1.4, 20, 100, 2) ==
          doctest::Approx(2.0 * abel::a_from_aii(1.4, 10, 100, 2)));
}

TEST_CASE("a_plugin warns on overlapping schemes") {
    abel::Philox rng(7, 0);
    Eigen::MatrixXd g(30, 1);
    for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = rng.normal();
    std::vector<std::string> warnings;
    a_plugin(g, make_blocks(30, 5, 1), &warnings);
    CHECK(warnings.size() == 1);
    warnings.clear();
    a_plugin(g, make_blocks(30, 5, 5), &warnings);
    CHECK(warnings.empty());
}

TEST_CASE("NBB resampling") {
    Eigen::MatrixXd series(6, 1);
    series << 1, 2, 3, 4, 5, 6;

    SUBCASE("blocks come from the non-overlapping partition") {
        abel::Philox rng(8, 0);
        const auto out = nbb_resample(series, 3, rng);
        REQUIRE(out.rows() == 6);
        for (int half = 0; half < 2; ++half) {
            const double first = out(3 * half, 0);
            CHECK((first == 1.0 || first == 4.0));
            CHECK(out(3 * half + 1, 0) == doctest::Approx(first + 1));
            CHECK(out(3 * half + 2, 0) == doctest::Approx(first + 2));
        }
    }
    SUBCASE("block length n returns the input") {
        abel::Philox rng(9, 0);
        CHECK((nbb_resample(series, 6, rng) - series).norm() == 0.0);
    }
    SUBCASE("fixed seed reproduces the draw") {
        abel::Philox r1(10, 3), r2(10, 3);
        CHECK((nbb_resample(series, 2, r1) - nbb_resample(series, 2, r2)).norm() == 0.0);
    }
    SUBCASE("invalid block length") {
        abel::Philox rng(11, 0);
        CHECK_THROWS_AS(nbb_resample(series, 0, rng), abel::InvalidBlockSpec);
        CHECK_THROWS_AS(nbb_resample(series, 7, rng), abel::InvalidBlockSpec);
    }
}

TEST_CASE("bias gate branches") {
    SUBCASE("small bias keeps the plug-in value bit-identically") {
        const double a_hat = 0.3123456789;
        auto [a, info] = apply_bias_gate(a_hat, {0.31, 0.32, 0.30, 0.33, 0.29});
        CHECK(a == a_hat);
        CHECK_FALSE(info.corrected);
    }
    SUBCASE("large bias is subtracted") {
        const double a_hat = 0.1;
        const std::vector<double> boot = {0.499, 0.5, 0.501, 0.5, 0.5};
        auto [a, info] = apply_bias_gate(a_hat, boot);
        CHECK(info.corrected);
        CHECK(a == doctest::Approx(a_hat - info.bias));
        CHECK(info.bias == doctest::Approx(0.4));
    }
}

TEST_CASE("bias-corrected estimator is reproducible and gated") {
    abel::Philox rng(12, 0);
    Eigen::MatrixXd data(60, 1);
    for (Eigen::Index i = 0; i < data.size(); ++i) data(i) = rng.normal() + 0.3;
    const auto scheme = make_blocks(60, 4, 4);
    abel::BootstrapSettings settings;
    settings.replications = 50;
    settings.seed = 77;

    auto identity = [](const Eigen::MatrixXd& rows) { return rows; };
    const auto [a1, info1] = abel::a_bias_corrected(data, identity, scheme, settings);
    const auto [a2, info2] = abel::a_bias_corrected(data, identity, scheme, settings);
    CHECK(a1 == a2);
    CHECK(info1.bias == info2.bias);
    CHECK(info1.se == info2.se);
    if (!info1.corrected) CHECK(a1 == info1.a_plugin);
    else CHECK(a1 == doctest::Approx(info1.a_plugin - info1.bias));

    settings.replications = 10;
    CHECK_THROWS_AS(abel::a_bias_corrected(data, identity, scheme, settings),
                    abel::ConfigError);
}
