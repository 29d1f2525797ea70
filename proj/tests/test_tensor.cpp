#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "pranet/errors.hpp"
#include "pranet/tensor.hpp"

using namespace pranet;
using oracles::check_gradients;

namespace {

template <typename T>
std::vector<double> to_doubles(const TensorPtr<T>& t) {
    return std::vector<double>(t->v.begin(), t->v.end());
}

TensorPtr<double> bias_for(int cout, double value = 0.0) {
    return make_tensor<double>({1, cout, 1, 1}, value);
}

}  // namespace

TEST_CASE("conv2d scalar kernel doubles an all-ones input") {
    TapeF tape;
    auto x = make_tensor<float>({1, 1, 3, 3}, 1.0f);
    auto w = make_tensor<float>({1, 1, 1, 1}, 2.0f);
    auto y = conv2d(tape, x, w, TensorPtrF(), 1, 0);
    REQUIRE(y->shape == Shape{1, 1, 3, 3});
    for (float v : y->v) CHECK(v == 2.0f);
}

TEST_CASE("conv2d all-zero kernel and bias annihilate any input") {
    TapeF tape;
    Rng rng(7);
    auto x = oracles::random_tensor<float>({2, 3, 5, 5}, rng);
    auto w = make_tensor<float>({4, 3, 3, 3}, 0.0f);
    auto b = make_tensor<float>({1, 4, 1, 1}, 0.0f);
    auto y = conv2d(tape, x, w, b, 1, 1);
    for (float v : y->v) CHECK(v == 0.0f);
}

TEST_CASE("conv2d matches the naive summation oracle") {
    Rng rng(11);
    TapeF tape;
    tape.set_recording(false);

    SUBCASE("the 1x2x4x4 / 3x2x3x3 case") {
        auto x = oracles::random_tensor<float>({1, 2, 4, 4}, rng);
        auto w = oracles::random_tensor<float>({3, 2, 3, 3}, rng);
        auto b = oracles::random_tensor<float>({1, 3, 1, 1}, rng);
        auto y = conv2d(tape, x, w, b, 1, 1);
        auto expect = oracles::conv_naive(to_doubles(x), 1, 2, 4, 4, to_doubles(w), 3, 3, 3,
                                          to_doubles(b), 1, 1);
        REQUIRE(y->v.size() == expect.size());
        for (std::size_t i = 0; i < expect.size(); ++i)
            CHECK(std::abs(y->v[i] - expect[i]) < 1e-5);
    }

    SUBCASE("100 random shapes") {
        for (int trial = 0; trial < 100; ++trial) {
            const int n = 1 + static_cast<int>(rng.below(2));
            const int cin = 1 + static_cast<int>(rng.below(3));
            const int cout = 1 + static_cast<int>(rng.below(3));
            const int k = 1 + 2 * static_cast<int>(rng.below(2));  // 1 or 3
            const int pad = static_cast<int>(rng.below(2));
            const int stride = 1 + static_cast<int>(rng.below(2));
            const int h = k + static_cast<int>(rng.below(5));
            const int w = k + static_cast<int>(rng.below(5));
            auto x = oracles::random_tensor<float>({n, cin, h, w}, rng);
            auto wt = oracles::random_tensor<float>({cout, cin, k, k}, rng);
            auto b = oracles::random_tensor<float>({1, cout, 1, 1}, rng);
            auto y = conv2d(tape, x, wt, b, stride, pad);
            auto expect = oracles::conv_naive(to_doubles(x), n, cin, h, w, to_doubles(wt), cout,
                                              k, k, to_doubles(b), stride, pad);
            REQUIRE(y->v.size() == expect.size());
            for (std::size_t i = 0; i < expect.size(); ++i)
                CHECK(std::abs(y->v[i] - expect[i]) < 1e-5);
        }
    }
}

TEST_CASE("conv2d rejects bad arguments") {
    TapeF tape;
    auto x = make_tensor<float>({1, 2, 4, 4}, 1.0f);
    CHECK_THROWS_AS(conv2d(tape, x, make_tensor<float>({1, 3, 3, 3}), TensorPtrF(), 1, 1),
                    InvalidArgument);  // Cin mismatch
    CHECK_THROWS_AS(conv2d(tape, x, make_tensor<float>({1, 2, 2, 2}), TensorPtrF(), 1, 1),
                    InvalidArgument);  // even kernel
    CHECK_THROWS_AS(conv2d(tape, x, make_tensor<float>({1, 2, 3, 3}), TensorPtrF(), 0, 1),
                    InvalidArgument);  // zero stride
    CHECK_THROWS_AS(conv2d(tape, x, make_tensor<float>({1, 2, 7, 7}), TensorPtrF(), 1, 0),
                    InvalidArgument);  // kernel larger than padded input
}

TEST_CASE("bilinear_resize identity is bitwise") {
    TapeF tape;
    Rng rng(3);
    auto x = oracles::random_tensor<float>({2, 3, 5, 7}, rng);
    auto y = bilinear_resize(tape, x, 5, 7);
    CHECK(y->v == x->v);
}

TEST_CASE("bilinear_resize preserves constants at any size") {
    TapeF tape;
    auto x = make_tensor<float>({1, 2, 4, 4}, 0.625f);
    for (int size : {1, 3, 4, 9, 16}) {
        auto y = bilinear_resize(tape, x, size, size);
        for (float v : y->v) CHECK(v == doctest::Approx(0.625f).epsilon(1e-7));
    }
}

TEST_CASE("bilinear_resize 2x2 to 4x4 matches the scalar coordinate oracle") {
    TapeF tape;
    auto x = make_tensor<float>({1, 1, 2, 2});
    x->v = {1, 2, 3, 4};
    auto y = bilinear_resize(tape, x, 4, 4);
    const std::vector<double> src = {1, 2, 3, 4};
    for (int oy = 0; oy < 4; ++oy)
        for (int ox = 0; ox < 4; ++ox) {
            const double expect = oracles::bilinear_sample_naive(src, 2, 2, oy, ox, 4, 4);
            CHECK(std::abs(y->at(0, 0, oy, ox) - expect) < 1e-6);
        }
}

TEST_CASE("sigmoid hits its closed form") {
    SUBCASE("zero tensor maps to one half exactly") {
        TapeF tape;
        auto x = make_tensor<float>({1, 2, 3, 3}, 0.0f);
        auto y = sigmoid(tape, x);
        for (float v : y->v) CHECK(v == 0.5f);
    }
    SUBCASE("sigmoid(20) in the 64-bit mode matches 1/(1+e^-20) to 1e-9 relative") {
        Tape<double> tape;
        auto x = make_tensor<double>({1, 1, 1, 1}, 20.0);
        auto y = sigmoid(tape, x);
        const double expect = 1.0 / (1.0 + std::exp(-20.0));
        CHECK(std::abs(y->v[0] - expect) / expect < 1e-9);
    }
}

TEST_CASE("mul with an all-ones tensor is the identity") {
    TapeF tape;
    Rng rng(5);
    auto x = oracles::random_tensor<float>({1, 3, 4, 4}, rng);
    auto ones = make_tensor<float>(x->shape, 1.0f);
    auto y = mul(tape, x, ones);
    CHECK(y->v == x->v);
}

TEST_CASE("binary ops broadcast a single-channel operand") {
    TapeF tape;
    auto a = make_tensor<float>({2, 3, 2, 2}, 4.0f);
    auto b = make_tensor<float>({2, 1, 2, 2}, 0.5f);
    auto y = mul(tape, a, b);
    REQUIRE(y->shape == Shape{2, 3, 2, 2});
    for (float v : y->v) CHECK(v == 2.0f);

    auto bad = make_tensor<float>({2, 2, 2, 2}, 1.0f);
    CHECK_THROWS_AS(mul(tape, a, bad), InvalidArgument);
    CHECK_THROWS_AS(add(tape, a, make_tensor<float>({2, 3, 2, 3}, 1.0f)), InvalidArgument);
}

TEST_CASE("concat_channels lays inputs out in argument order") {
    TapeF tape;
    auto a = make_tensor<float>({1, 2, 2, 2}, 1.0f);
    auto b = make_tensor<float>({1, 3, 2, 2}, 2.0f);

    SUBCASE("unary concat is the identity") {
        auto y = concat_channels<float>(tape, {a});
        CHECK(y->v == a->v);
    }
    SUBCASE("channel blocks keep their order") {
        auto y = concat_channels<float>(tape, {a, b});
        REQUIRE(y->shape == Shape{1, 5, 2, 2});
        for (int c = 0; c < 5; ++c)
            for (int i = 0; i < 4; ++i)
                CHECK(y->plane(0, c)[i] == (c < 2 ? 1.0f : 2.0f));
    }
    SUBCASE("spatial mismatch is rejected") {
        auto c = make_tensor<float>({1, 1, 3, 2}, 0.0f);
        CHECK_THROWS_AS(concat_channels<float>(tape, {a, c}), InvalidArgument);
    }
}

TEST_CASE("backward of a linear map gives the constant gradient") {
    TapeF tape;
    auto x = make_tensor<float>({1, 1, 3, 3}, 2.0f, /*requires_grad=*/true);
    auto loss = sum_all(tape, scale(tape, x, 3.0f));
    tape.backward(loss);
    REQUIRE(x->grad.size() == x->v.size());
    for (float g : x->grad) CHECK(g == 3.0f);
}

TEST_CASE("a leaf the loss never touches keeps a zero gradient") {
    TapeF tape;
    auto x = make_tensor<float>({1, 1, 2, 2}, 1.0f, true);
    auto unused = make_tensor<float>({1, 1, 2, 2}, 1.0f, true);
    auto loss = sum_all(tape, x);
    tape.backward(loss);
    for (std::size_t i = 0; i < unused->v.size(); ++i)
        CHECK(unused->grad_at(static_cast<long long>(i)) == 0.0f);
}

TEST_CASE("backward rejects a non-scalar loss") {
    TapeF tape;
    auto x = make_tensor<float>({1, 1, 2, 2}, 1.0f, true);
    auto y = scale(tape, x, 2.0f);
    CHECK_THROWS_AS(tape.backward(y), InvalidArgument);
}

TEST_CASE("gradients match central finite differences") {
    Rng rng(21);

    SUBCASE("composite conv -> sigmoid -> mul -> sum on 1x1x4x4") {
        auto x = oracles::random_tensor<double>({1, 1, 4, 4}, rng);
        auto w = oracles::random_tensor<double>({1, 1, 3, 3}, rng);
        auto b = oracles::random_tensor<double>({1, 1, 1, 1}, rng);
        auto m = oracles::random_tensor<double>({1, 1, 4, 4}, rng);
        auto r = check_gradients(
            [&](Tape<double>& t, const std::vector<TensorPtr<double>>& in) {
                auto y = conv2d(t, in[0], in[1], in[2], 1, 1);
                return sum_all(t, mul(t, sigmoid(t, y), in[3]));
            },
            {x, w, b, m});
        CHECK(r.failed == 0);
    }

    SUBCASE("gradient of sum over concat routes ones to each input") {
        auto a = oracles::random_tensor<double>({1, 2, 3, 3}, rng);
        auto b = oracles::random_tensor<double>({1, 1, 3, 3}, rng);
        auto r = check_gradients(
            [&](Tape<double>& t, const std::vector<TensorPtr<double>>& in) {
                return sum_all(t, concat_channels<double>(t, {in[0], in[1]}));
            },
            {a, b});
        CHECK(r.failed == 0);
        for (double g : a->grad) CHECK(g == doctest::Approx(1.0));
        for (double g : b->grad) CHECK(g == doctest::Approx(1.0));
    }

    SUBCASE("every elementary op passes on random small instances") {
        for (int trial = 0; trial < 5; ++trial) {
            const int h = 2 + static_cast<int>(rng.below(3));
            const int w = 2 + static_cast<int>(rng.below(3));
            auto a = oracles::random_tensor<double>({2, 2, h, w}, rng);
            auto b = oracles::random_tensor<double>({2, 2, h, w}, rng);
            auto c1 = oracles::random_tensor<double>({2, 1, h, w}, rng);
            // the relu check needs inputs clear of the kink for finite
            // differences to be a valid oracle
            for (auto& v : a->v)
                if (std::abs(v) < 0.05) v += v < 0 ? -0.05 : 0.05;

            auto check = [&](const oracles::GraphBuilder& build,
                             std::vector<TensorPtr<double>> inputs) {
                auto r = check_gradients(build, inputs);
                CHECK(r.failed == 0);
            };
            check([](Tape<double>& t, const auto& in) { return sum_all(t, add(t, in[0], in[1])); },
                  {a, b});
            check([](Tape<double>& t, const auto& in) { return sum_all(t, sub(t, in[0], in[1])); },
                  {a, b});
            check([](Tape<double>& t, const auto& in) {
                return sum_all(t, mul(t, in[0], in[1]));
            },
                  {a, c1});  // broadcast path
            check([](Tape<double>& t, const auto& in) { return sum_all(t, sigmoid(t, in[0])); },
                  {a});
            check([](Tape<double>& t, const auto& in) { return sum_all(t, relu(t, in[0])); }, {a});
            check([](Tape<double>& t, const auto& in) {
                return sum_all(t, scale(t, in[0], 1.7));
            },
                  {a});
            check([](Tape<double>& t, const auto& in) {
                return sum_all(t, bilinear_resize(t, in[0], 5, 3));
            },
                  {a});
        }
    }
}

TEST_CASE("backward is linear in the loss") {
    Rng rng(33);
    auto x = oracles::random_tensor<double>({1, 1, 4, 4}, rng, -1, 1, true);
    const double a = 0.7, b = -1.3;

    auto grad_of = [&](bool first, bool second, double ka, double kb) {
        x->grad.clear();
        Tape<double> tape;
        auto s = sigmoid(tape, x);
        auto l1 = sum_all(tape, s);
        auto l2 = sum_all(tape, mul(tape, s, s));
        TensorPtr<double> loss;
        if (first && second)
            loss = add(tape, scale(tape, l1, ka), scale(tape, l2, kb));
        else
            loss = first ? l1 : l2;
        tape.backward(loss);
        return x->grad;
    };

    auto g1 = grad_of(true, false, 0, 0);
    auto g2 = grad_of(false, true, 0, 0);
    auto gmix = grad_of(true, true, a, b);
    for (std::size_t i = 0; i < gmix.size(); ++i) {
        const double expect = a * g1[i] + b * g2[i];
        CHECK(std::abs(gmix[i] - expect) <=
              1e-5 * std::max({std::abs(expect), std::abs(gmix[i]), 1e-12}));
    }
}

TEST_CASE("repeated identical runs are bitwise identical") {
    auto run = []() {
        Rng rng(99);
        TapeF tape;
        auto x = oracles::random_tensor<float>({1, 2, 6, 6}, rng, -1, 1, true);
        auto w = oracles::random_tensor<float>({2, 2, 3, 3}, rng);
        auto y = conv2d(tape, x, w, TensorPtrF(), 2, 1);
        auto loss = sum_all(tape, sigmoid(tape, y));
        tape.backward(loss);
        return std::make_pair(y->v, x->grad);
    };
    auto [v1, g1] = run();
    auto [v2, g2] = run();
    CHECK(v1 == v2);
    CHECK(g1 == g2);
}

TEST_CASE("non-finite op outputs raise a numeric error") {
    TapeF tape;
    auto x = make_tensor<float>({1, 1, 2, 2}, 1e30f);
    CHECK_THROWS_AS(scale(tape, x, 1e30f), NumericError);
}

TEST_CASE("adam: zero gradient leaves parameters unchanged and advances t") {
    auto p = make_tensor<float>({1, 1, 2, 2}, 1.5f, true);
    AdamState<float> state;
    adam_step<float>({p}, state, 0.1f);
    CHECK(state.t == 1);
    for (float v : p->v) CHECK(v == 1.5f);
}

TEST_CASE("adam: first step matches the hand-applied recurrence") {
    auto p = make_tensor<float>({1, 1, 1, 1}, 1.0f, true);
    p->grad = {0.5f};
    AdamState<float> state;
    adam_step<float>({p}, state, 0.1f);
    // theta' = 1 - 0.1 * 0.5 / (0.5 + 1e-8)
    CHECK(p->v[0] == doctest::Approx(0.9f).epsilon(1e-6));
}

TEST_CASE("adam: consecutive steps match the scalar recurrence to 1e-7") {
    auto p = make_tensor<double>({1, 1, 1, 1}, 0.8, true);
    p->grad = {0.31};
    AdamState<double> state;
    oracles::AdamScalar ref;
    double theta = 0.8;
    for (int step = 0; step < 2; ++step) {
        adam_step<double>({p}, state, 0.05);
        theta = ref.step(theta, 0.31, 0.05);
        CHECK(std::abs(p->v[0] - theta) < 1e-7);
    }
}

TEST_CASE("adam refuses non-finite gradients and keeps state untouched") {
    auto p = make_tensor<float>({1, 1, 1, 1}, 2.0f, true);
    p->grad = {std::numeric_limits<float>::quiet_NaN()};
    AdamState<float> state;
    CHECK_THROWS_AS(adam_step<float>({p}, state, 0.1f), NumericError);
    CHECK(state.t == 0);
    CHECK(p->v[0] == 2.0f);
}
