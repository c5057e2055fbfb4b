#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "rgf/error.hpp"
#include "rgf/loss.hpp"

using namespace rgf;
using doctest::Approx;

TEST_CASE("loss values") {
    CHECK(loss_value(LossKind::square, 3.0, 1.0) == 2.0);
    CHECK(loss_value(LossKind::logistic, 0.0, 1.0) == Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(loss_value(LossKind::exponential, 1.0, -1.0) == Approx(std::exp(1.0)));
    CHECK(loss_value(LossKind::l1l2_hybrid, 4.0, 1.0) == Approx(std::sqrt(10.0) - 1.0).epsilon(1e-15));
}

TEST_CASE("logistic loss stays finite at large margins") {
    CHECK(std::isfinite(loss_value(LossKind::logistic, -800.0, 1.0)));
    CHECK(loss_value(LossKind::logistic, -800.0, 1.0) == Approx(800.0));
    CHECK(loss_value(LossKind::logistic, 800.0, 1.0) >= 0.0);
}

TEST_CASE("loss derivatives") {
    const auto log0 = loss_derivatives(LossKind::logistic, 0.0, 1.0);
    CHECK(log0.first == -0.5);
    CHECK(log0.second == 0.25);
    const auto hybrid = loss_derivatives(LossKind::l1l2_hybrid, 2.0, 2.0);
    CHECK(hybrid.first == 0.0);
    CHECK(hybrid.second == 1.0);
    const auto sq = loss_derivatives(LossKind::square, 0.3, 1.0);
    CHECK(sq.first == Approx(-0.7));
    CHECK(sq.second == 1.0);
    const double fd = oracle::central_difference([](double h) { return loss_value(LossKind::square, h, 1.0); }, 0.3, 1e-4);
    CHECK(std::abs(sq.first - fd) < 1e-8);
}

TEST_CASE("derivatives match finite differences and curvature is non-negative") {
    Rng rng(17);
    for (LossKind kind : {LossKind::square, LossKind::logistic, LossKind::exponential, LossKind::l1l2_hybrid}) {
        CAPTURE(loss_token(kind));
        for (int c = 0; c < 1000; ++c) {
            const double h = rng.uniform(-5.0, 5.0);
            const double y = is_margin_loss(kind) ? (rng.below(2) ? 1.0 : -1.0) : rng.uniform(-3.0, 3.0);
            const double step = 1e-5 * std::max(1.0, std::abs(h));
            const auto d = loss_derivatives(kind, h, y);
            const double fd1 = oracle::central_difference([&](double v) { return loss_value(kind, v, y); }, h, step);
            const double fd2 =
                oracle::central_difference([&](double v) { return loss_derivatives(kind, v, y).first; }, h, step);
            CHECK(std::abs(d.first - fd1) <= 1e-4 * std::max({std::abs(fd1), std::abs(d.first), 1e-8}));
            CHECK(std::abs(d.second - fd2) <= 1e-4 * std::max({std::abs(fd2), std::abs(d.second), 1e-8}));
            CHECK(d.second >= 0.0);
            if (kind == LossKind::exponential) CHECK(d.second > 0.0);
        }
    }
}

TEST_CASE("margin losses reject non +-1 labels") {
    CHECK_THROWS_AS(loss_value(LossKind::logistic, 0.0, 0.0), DataError);
    CHECK_THROWS_AS(loss_derivatives(LossKind::exponential, 0.0, 2.0), DataError);
    CHECK_NOTHROW(loss_value(LossKind::square, 0.0, 0.7));
}

TEST_CASE("loss tokens") {
    for (LossKind k : {LossKind::square, LossKind::logistic, LossKind::exponential, LossKind::l1l2_hybrid,
                       LossKind::pairwise_squared_hinge})
        CHECK(parse_loss(loss_token(k)) == k);
    CHECK_THROWS_AS(parse_loss("hinge"), ConfigError);
}

TEST_CASE("pairwise squared hinge") {
    SUBCASE("satisfied margin") {
        const PreferencePair p[] = {{0, 1}};
        const double h[] = {2.0, 0.0};
        const auto t = pairwise_loss_terms(p, h);
        CHECK(t.total == 0.0);
        CHECK(t.derivatives.first == std::vector<double>{0.0, 0.0});
        CHECK(t.derivatives.second == std::vector<double>{0.0, 0.0});
    }
    SUBCASE("exactly on the margin counts as inactive") {
        const PreferencePair p[] = {{0, 1}};
        const double h[] = {1.0, 0.0};
        const auto t = pairwise_loss_terms(p, h);
        CHECK(t.total == 0.0);
        CHECK(t.derivatives.second[0] == 0.0);
    }
    SUBCASE("violated pair") {
        const PreferencePair p[] = {{0, 1}};
        const double h[] = {0.0, 0.0};
        const auto t = pairwise_loss_terms(p, h);
        CHECK(t.total == 1.0);
        CHECK(t.derivatives.first == std::vector<double>{-2.0, 2.0});
        CHECK(t.derivatives.second == std::vector<double>{2.0, 2.0});
    }
    SUBCASE("random pairs against finite differences") {
        Rng rng(4);
        std::vector<PreferencePair> pairs;
        for (int k = 0; k < 5; ++k) {
            const auto a = static_cast<std::uint32_t>(rng.below(4));
            pairs.push_back({a, (a + 1 + static_cast<std::uint32_t>(rng.below(3))) % 4});
        }
        std::vector<double> h{0.13, -0.41, 0.77, 0.05};
        const auto t = pairwise_loss_terms(pairs, h);
        for (std::size_t i = 0; i < h.size(); ++i) {
            auto f = [&](double v) {
                auto m = h;
                m[i] = v;
                return pairwise_loss_terms(pairs, m).total;
            };
            CHECK(std::abs(t.derivatives.first[i] - oracle::central_difference(f, h[i], 1e-5)) < 1e-6);
        }
    }
    SUBCASE("bad index") {
        const PreferencePair p[] = {{0, 3}};
        const double h[] = {0.0, 0.0};
        CHECK_THROWS_AS(pairwise_loss_terms(p, h), DataError);
    }
}

TEST_CASE("objective averages and shifts exactly") {
    Dataset d(4, 1, {0, 1, 2, 3}, {1.0, -1.0, 1.0, 1.0});
    const Objective obj(LossKind::logistic, d);
    CHECK(obj.normalizer() == 4.0);
    std::vector<double> out{0.5, 0.2, -0.3, 0.0};
    double expect = 0.0;
    for (std::size_t i = 0; i < 4; ++i) expect += loss_value(LossKind::logistic, out[i], d.targets()[i]) / 4.0;
    CHECK(obj.total(out) == Approx(expect).epsilon(1e-15));

    const std::uint32_t g0[] = {0, 2};
    const std::uint32_t g1[] = {3};
    const std::span<const std::uint32_t> groups[] = {g0, g1};
    const double shifts[] = {0.4, -1.0};
    auto moved = out;
    moved[0] += 0.4;
    moved[2] += 0.4;
    moved[3] -= 1.0;
    CHECK(obj.shifted_change(out, groups, shifts) == Approx(obj.total(moved) - obj.total(out)).epsilon(1e-12));

    DerivativeBuffers b;
    obj.derivatives(out, b);
    CHECK(b.first[1] == Approx(loss_derivatives(LossKind::logistic, 0.2, -1.0).first));
}

TEST_CASE("objective construction checks targets") {
    Dataset d(2, 1, {0, 1}, {0.5, 1.0});
    CHECK_THROWS_AS(Objective(LossKind::logistic, d), DataError);
    CHECK_THROWS_AS(Objective(LossKind::pairwise_squared_hinge, d), DataError);
    Dataset unlabeled(2, 1, {0, 1});
    CHECK_THROWS_AS(Objective(LossKind::square, unlabeled), DataError);
}

TEST_CASE("pairwise objective averages over pairs") {
    Dataset d(3, 1, {0, 1, 2}, {}, {{0, 1}, {1, 2}});
    const Objective obj(LossKind::pairwise_squared_hinge, d);
    CHECK(obj.normalizer() == 2.0);
    const double out[] = {0.0, 0.0, 0.0};
    CHECK(obj.total(out) == 1.0);
}
