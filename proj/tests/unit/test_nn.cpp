#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gradcheck.hpp"
#include "stda/nn/layers.hpp"
#include "stda/nn/losses.hpp"
#include "stda/nn/ops.hpp"
#include "stda/nn/optim.hpp"

using namespace stda;
using namespace stda::nn;
using stda::testing::gradcheck;
using stda::testing::random_tensor;

namespace {

// Direct seven-loop convolution with zero padding.
Tensor naive_conv3d(const Tensor& x, const Tensor& w, const Tensor& b, int st, int ss, int pt, int ps) {
    const int n = x.dim(0), c = x.dim(1), t = x.dim(2), h = x.dim(3), wd = x.dim(4);
    const int o = w.dim(0), kt = w.dim(2), k = w.dim(3);
    const int to = (t + 2 * pt - kt) / st + 1, ho = (h + 2 * ps - k) / ss + 1, wo = (wd + 2 * ps - k) / ss + 1;
    Tensor out(Shape{n, o, to, ho, wo});
    std::size_t idx = 0;
    for (int ni = 0; ni < n; ++ni)
        for (int oi = 0; oi < o; ++oi)
            for (int a = 0; a < to; ++a)
                for (int y = 0; y < ho; ++y)
                    for (int xx = 0; xx < wo; ++xx, ++idx) {
                        double acc = b[static_cast<std::size_t>(oi)];
                        for (int ci = 0; ci < c; ++ci)
                            for (int dt = 0; dt < kt; ++dt)
                                for (int dy = 0; dy < k; ++dy)
                                    for (int dx = 0; dx < k; ++dx) {
                                        const int ti = a * st - pt + dt, yi = y * ss - ps + dy, xi = xx * ss - ps + dx;
                                        if (ti < 0 || ti >= t || yi < 0 || yi >= h || xi < 0 || xi >= wd) {
                                            continue;
                                        }
                                        acc += x[(((static_cast<std::size_t>(ni) * c + ci) * t + ti) * h + yi) * wd + xi] *
                                               w[(((static_cast<std::size_t>(oi) * c + ci) * kt + dt) * k + dy) * k + dx];
                                    }
                        out[idx] = acc;
                    }
    return out;
}

}  // namespace

TEST_CASE("tensor shape checks") {
    CHECK_THROWS_AS(Tensor(Shape{2, 2}, std::vector<double>{1, 2, 3}), std::invalid_argument);
    const Tensor t(Shape{2, 3}, 1.5);
    CHECK(t.size() == 6);
    CHECK_THROWS(t.reshaped(Shape{4}));
    CHECK(t.reshaped(Shape{3, 2}).dim(0) == 3);
    CHECK_THROWS(t.item());
}

TEST_CASE("conv3d matches the direct convolution") {
    std::mt19937_64 rng(1);
    const Tensor x = random_tensor({2, 3, 5, 7, 6}, rng);
    const Tensor w = random_tensor({4, 3, 3, 3, 3}, rng);
    const Tensor b = random_tensor({4}, rng);
    for (auto [st, ss, pt, ps] : {std::array{1, 1, 1, 1}, std::array{2, 2, 1, 1}, std::array{1, 2, 0, 1}}) {
        const Var y = conv3d(Var::constant(x), Var::constant(w), Var::constant(b), st, ss, pt, ps);
        const Tensor ref = naive_conv3d(x, w, b, st, ss, pt, ps);
        REQUIRE(y.shape() == ref.shape());
        for (std::size_t i = 0; i < ref.size(); ++i) {
            CHECK(y.value()[i] == doctest::Approx(ref[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("conv2d agrees with conv3d on a single frame") {
    std::mt19937_64 rng(2);
    const Tensor x = random_tensor({2, 3, 6, 6}, rng);
    const Tensor w = random_tensor({4, 3, 3, 3}, rng);
    const Tensor b = random_tensor({4}, rng);
    const Var y = conv2d(Var::constant(x), Var::constant(w), Var::constant(b), 2, 1);
    const Tensor ref = naive_conv3d(x.reshaped({2, 3, 1, 6, 6}), w.reshaped({4, 3, 1, 3, 3}), b, 1, 2, 0, 1);
    REQUIRE(y.value().size() == ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
        CHECK(y.value()[i] == doctest::Approx(ref[i]).epsilon(1e-12));
    }
}

TEST_CASE("tape gradients match central differences") {
    std::mt19937_64 rng(3);
    const double tol = 1e-6;
    SUBCASE("conv3d") {
        CHECK(gradcheck({random_tensor({1, 2, 4, 5, 5}, rng), random_tensor({3, 2, 3, 3, 3}, rng), random_tensor({3}, rng)},
                        [](const std::vector<Var>& v) { return conv3d(v[0], v[1], v[2], 2, 2, 1, 1); }, rng) < tol);
    }
    SUBCASE("conv2d") {
        CHECK(gradcheck({random_tensor({2, 2, 5, 5}, rng), random_tensor({3, 2, 3, 3}, rng), random_tensor({3}, rng)},
                        [](const std::vector<Var>& v) { return conv2d(v[0], v[1], v[2], 1, 1); }, rng) < tol);
    }
    SUBCASE("linear") {
        CHECK(gradcheck({random_tensor({3, 4}, rng), random_tensor({2, 4}, rng), random_tensor({2}, rng)},
                        [](const std::vector<Var>& v) { return linear(v[0], v[1], v[2]); }, rng) < tol);
    }
    SUBCASE("pooling and reshapes") {
        CHECK(gradcheck({random_tensor({2, 3, 4, 3, 3}, rng)},
                        [](const std::vector<Var>& v) { return global_avg_pool(temporal_mean(v[0])); }, rng) < tol);
        const std::vector<int> rows{2, 0, 2};
        CHECK(gradcheck({random_tensor({3, 4}, rng)},
                        [&](const std::vector<Var>& v) { return reshape(select_rows(v[0], rows), {12}); }, rng) < tol);
    }
    SUBCASE("pointwise") {
        CHECK(gradcheck({random_tensor({10}, rng), random_tensor({10}, rng)},
                        [](const std::vector<Var>& v) {
                            return add(scale(relu(v[0]), 1.5), sigmoid_probability(v[1]));
                        },
                        rng) < tol);
    }
    SUBCASE("roi_align") {
        const std::vector<RoiRef> rois{{0, BoundingBox(2.3, 1.1, 13.7, 9.2)}, {1, BoundingBox(0.5, 4.0, 7.5, 15.0)}};
        CHECK(gradcheck({random_tensor({2, 2, 4, 4}, rng)},
                        [&](const std::vector<Var>& v) { return roi_align(v[0], rois, 3, 0.25); }, rng) < tol);
    }
    SUBCASE("losses") {
        const std::vector<int> labels{0, 2, 1};
        CHECK(gradcheck({random_tensor({3, 3}, rng)},
                        [&](const std::vector<Var>& v) { return softmax_cross_entropy(v[0], labels, 3.0); }, rng) < tol);
        const Tensor target = random_tensor({8}, rng, 2.0);
        Tensor weight(Shape{8}, 1.0);
        weight[3] = 0.0;
        CHECK(gradcheck({random_tensor({8}, rng, 2.0)},
                        [&](const std::vector<Var>& v) { return smooth_l1(v[0], target, weight, 1.0, 2.0); }, rng) < 1e-5);
        const Tensor bits(Shape{6}, std::vector<double>{0, 1, 1, 0, 1, 0});
        CHECK(gradcheck({random_tensor({6}, rng)},
                        [&](const std::vector<Var>& v) { return sigmoid_bce_with_logits(v[0], bits, Tensor(Shape{6}, 1.0)); },
                        rng) < tol);
    }
}

TEST_CASE("gradient reversal is the identity forward and -lambda backward") {
    std::mt19937_64 rng(4);
    for (double lambda : {0.0, 0.5, 1.0}) {
        const Tensor xv = random_tensor({2, 3, 4}, rng);
        const Tensor c = random_tensor({24}, rng);
        const Var x = Var::parameter(xv);
        const Var y = gradient_reversal(x, lambda);
        for (std::size_t i = 0; i < xv.size(); ++i) {
            CHECK(y.value()[i] == xv[i]);
        }
        backward(stda::testing::project(y, std::vector<double>(c.values().begin(), c.values().end())));
        for (std::size_t i = 0; i < xv.size(); ++i) {
            const double expected = -lambda * c[i];
            CHECK(std::abs(x.grad()[i] - expected) <= 1e-6 * std::max(1.0, std::abs(expected)));
        }
    }
    CHECK_THROWS_AS(gradient_reversal(Var::constant(Tensor(Shape{1})), NAN), std::invalid_argument);
}

TEST_CASE("roi_align on a linear ramp returns bin-center coordinates") {
    // feature(y, x) = x, so bilinear sampling is exact away from the border
    Tensor f(Shape{1, 1, 16, 16});
    for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) {
            f[static_cast<std::size_t>(y * 16 + x)] = x;
        }
    }
    const std::vector<RoiRef> rois{{0, BoundingBox(8, 8, 40, 40)}};
    const Var out = roi_align(Var::constant(f), rois, 4, 0.25);
    for (int py = 0; py < 4; ++py) {
        for (int px = 0; px < 4; ++px) {
            // box spans [2, 10) in feature units shifted by half a pixel, bins of width 2
            const double expected = 2.0 - 0.5 + (px + 0.5) * 2.0;
            CHECK(out.value()[static_cast<std::size_t>(py * 4 + px)] == doctest::Approx(expected).epsilon(1e-12));
        }
    }
    const std::vector<RoiRef> bad{{1, BoundingBox(0, 0, 4, 4)}};
    CHECK_THROWS_AS(roi_align(Var::constant(f), bad, 2, 0.25), std::out_of_range);
}

TEST_CASE("cross entropy of uniform logits is ln K") {
    const std::vector<int> labels{3};
    const Var l = softmax_cross_entropy(Var::constant(Tensor(Shape{1, 4}, 0.0)), labels, 1.0);
    CHECK(std::abs(l.item() - std::log(4.0)) <= 1e-12);
}

TEST_CASE("smooth l1 worked values") {
    const Tensor target(Shape{2}, 0.0);
    const Tensor weight(Shape{2}, 1.0);
    // 0.5 * 0.5^2 + (2 - 0.5)
    const Var l = smooth_l1(Var::constant(Tensor(Shape{2}, std::vector<double>{0.5, -2.0})), target, weight, 1.0, 1.0);
    CHECK(l.item() == doctest::Approx(0.125 + 1.5));
}

TEST_CASE("no-grad guard records nothing") {
    const Var w = Var::parameter(Tensor(Shape{2}, 1.0));
    {
        NoGradGuard guard;
        const Var y = scale(w, 2.0);
        CHECK_FALSE(y.requires_grad());
    }
    CHECK(grad_enabled());
}

TEST_CASE("adam leaves parameters without gradient untouched") {
    const Var a = Var::parameter(Tensor(Shape{2}, 1.0));
    const Var b = Var::parameter(Tensor(Shape{2}, 1.0));
    backward(sum(scale(a, 3.0)));
    Adam adam(AdamConfig{});
    const std::vector<Var> params{a, b};
    adam.step(params);
    CHECK(a.value()[0] == doctest::Approx(1.0 - 1e-3));
    CHECK(b.value()[0] == 1.0);
    CHECK(b.value()[1] == 1.0);
}

TEST_CASE("layers are deterministic in the seed") {
    Rng r1(9), r2(9);
    const Conv3d c1(2, 3, 3, 3, 1, 1, r1), c2(2, 3, 3, 3, 1, 1, r2);
    ParameterSet p1, p2;
    c1.collect(p1, "c");
    c2.collect(p2, "c");
    REQUIRE(p1.size() == p2.size());
    for (std::size_t i = 0; i < p1.size(); ++i) {
        CHECK(p1.entries()[i].first == p2.entries()[i].first);
        const auto a = p1.entries()[i].second.value().values();
        const auto b = p2.entries()[i].second.value().values();
        CHECK(std::equal(a.begin(), a.end(), b.begin(), b.end()));
    }
}
