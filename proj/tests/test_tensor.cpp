#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstring>
#include <filesystem>

#include "doctest.h"
#include "oracles.hpp"
#include "shapemap/adam.hpp"
#include "shapemap/checkpoint.hpp"
#include "shapemap/grad_check.hpp"
#include "shapemap/ops.hpp"

using namespace shapemap;

namespace {

Tensor random_tensor(std::vector<int> shape, Rng& rng, double lo = -1.0, double hi = 1.0,
                     bool requires_grad = false) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> data(static_cast<size_t>(shape_numel(shape)));
    for (auto& v : data) v = u(rng);
    return Tensor::from_data(std::move(shape), std::move(data), requires_grad);
}

}  // namespace

TEST_CASE("conv2d trivial examples") {
    // 2x2 all-ones kernel sums every entry
    Tensor x = Tensor::from_data({1, 2, 2}, {1, 2, 3, 4});
    Tensor k = Tensor::full({1, 1, 2, 2}, 1.0);
    Tensor y = conv2d(x, {k, 1, 0});
    CHECK(y.shape() == std::vector<int>{1, 1, 1});
    CHECK(y.data()[0] == doctest::Approx(10.0));

    // 1x1 identity kernel is the identity map
    Rng rng(7);
    Tensor img = random_tensor({1, 5, 5}, rng);
    Tensor ident = Tensor::from_data({1, 1, 1, 1}, {1.0});
    Tensor out = conv2d(img, {ident, 1, 0});
    REQUIRE(out.shape() == img.shape());
    for (int i = 0; i < out.numel(); ++i) CHECK(out.data()[i] == img.data()[i]);
}

TEST_CASE("conv2d matches the nested-loop oracle") {
    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        Tensor x = random_tensor({1, 6, 6}, rng);
        Tensor k = random_tensor({2, 1, 3, 3}, rng);
        Tensor y = conv2d(x, {k, 2, 0});
        int oh = 0, ow = 0;
        auto ref = oracle::conv2d_naive(x.data(), 1, 6, 6, k.data(), 2, 3, 3, 2, 0, oh, ow);
        REQUIRE(y.shape() == std::vector<int>{2, oh, ow});
        for (size_t i = 0; i < ref.size(); ++i)
            CHECK(std::abs(y.data()[i] - ref[i]) < 1e-12);
    }
    // padded + batched path
    for (int trial = 0; trial < 10; ++trial) {
        Tensor x = random_tensor({2, 3, 7, 6}, rng);
        Tensor k = random_tensor({4, 3, 3, 2}, rng);
        Tensor y = conv2d(x, {k, 2, 1});
        for (int n = 0; n < 2; ++n) {
            std::vector<double> one(x.data().begin() + n * 3 * 42, x.data().begin() + (n + 1) * 3 * 42);
            int oh = 0, ow = 0;
            auto ref = oracle::conv2d_naive(one, 3, 7, 6, k.data(), 4, 3, 2, 2, 1, oh, ow);
            REQUIRE(y.shape() == std::vector<int>{2, 4, oh, ow});
            for (size_t i = 0; i < ref.size(); ++i)
                CHECK(std::abs(y.data()[n * 4 * oh * ow + i] - ref[i]) < 1e-12);
        }
    }
}

TEST_CASE("conv2d shape errors name the offending axis") {
    Tensor x = Tensor::zeros({3, 4, 4});
    Tensor k = Tensor::zeros({2, 2, 3, 3});
    CHECK_THROWS_WITH_AS(conv2d(x, {k, 1, 0}), doctest::Contains("channel axis"), DimensionError);
    Tensor big = Tensor::zeros({1, 1, 9, 9});
    Tensor small_img = Tensor::zeros({1, 4, 4});
    CHECK_THROWS_AS(conv2d(small_img, {big, 1, 0}), DimensionError);
}

TEST_CASE("max_pool examples and tie-breaking") {
    Tensor x = Tensor::from_data({1, 2, 2}, {1, 2, 3, 4});
    auto res = max_pool(x, {2, 2});
    CHECK(res.output.data() == std::vector<double>{4});
    CHECK(res.argmax == std::vector<int>{3});  // row 1, col 1

    // constant image: output constant, gradient lands on each window's
    // first row-major cell
    Tensor c = Tensor::full({1, 4, 4}, 2.5, /*requires_grad=*/true);
    auto pooled = max_pool(c, {2, 2});
    for (double v : pooled.output.data()) CHECK(v == 2.5);
    Tensor total = sum(pooled.output);
    total.backward();
    const auto& g = c.grad();
    for (int y = 0; y < 4; ++y)
        for (int x2 = 0; x2 < 4; ++x2)
            CHECK(g[y * 4 + x2] == ((y % 2 == 0 && x2 % 2 == 0) ? 1.0 : 0.0));

    CHECK_THROWS_AS(max_pool(Tensor::zeros({1, 3, 3}), {4, 1}), DimensionError);
}

TEST_CASE("max_pool matches the window-scan oracle") {
    Rng rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        Tensor x = random_tensor({1, 8, 8}, rng);
        auto res = max_pool(x, {2, 2});
        int oh = 0, ow = 0;
        auto ref = oracle::max_pool_naive(x.data(), 1, 8, 8, 2, 2, oh, ow);
        REQUIRE(res.output.shape() == std::vector<int>{1, oh, ow});
        for (size_t i = 0; i < ref.size(); ++i) CHECK(res.output.data()[i] == ref[i]);
    }
}

TEST_CASE("unpool places values top-left") {
    Tensor x = Tensor::from_data({1, 1, 1}, {4});
    Tensor y = unpool(x, 2);
    CHECK(y.shape() == std::vector<int>{1, 2, 2});
    CHECK(y.data() == std::vector<double>{4, 0, 0, 0});

    Rng rng(5);
    Tensor any = random_tensor({2, 3, 4}, rng);
    Tensor same = unpool(any, 1);
    CHECK(same.data() == any.data());
}

TEST_CASE("max_pool inverts unpool on nonnegative input") {
    Rng rng(17);
    for (int s = 1; s <= 3; ++s) {
        Tensor y = random_tensor({2, 3, 3}, rng, 0.0, 5.0);
        auto back = max_pool(unpool(y, s), {s, s});
        REQUIRE(back.output.shape() == y.shape());
        for (int i = 0; i < y.numel(); ++i) CHECK(back.output.data()[i] == y.data()[i]);
    }
}

TEST_CASE("dense examples") {
    Tensor x = Tensor::from_data({2}, {1, -2});
    Tensor w = Tensor::from_data({2, 2}, {1, 0, 0, 1});
    Tensor b = Tensor::zeros({2});
    CHECK(dense(x, w, b, Activation::relu).data() == std::vector<double>{1, 0});
    CHECK(dense(x, w, b, Activation::linear).data() == std::vector<double>{1, -2});

    Rng rng(3);
    Tensor xv = random_tensor({4}, rng);
    Tensor wv = random_tensor({3, 4}, rng);
    Tensor bv = random_tensor({3}, rng);
    Tensor y = dense(xv, wv, bv, Activation::linear);
    for (int o = 0; o < 3; ++o) {
        double acc = bv.data()[o];
        for (int i = 0; i < 4; ++i) acc += wv.data()[o * 4 + i] * xv.data()[i];
        CHECK(std::abs(y.data()[o] - acc) < 1e-12);
    }
    CHECK_THROWS_AS(dense(Tensor::zeros({5}), wv, bv, Activation::linear), DimensionError);
}

TEST_CASE("softmax cross-entropy values") {
    for (int k = 2; k <= 6; ++k) {
        Tensor logits = Tensor::full({k}, 0.7);
        CHECK(softmax_cross_entropy(logits, k - 1).item() == doctest::Approx(std::log(k)).epsilon(1e-12));
    }
    Tensor steep = Tensor::from_data({2}, {1000.0, 0.0});
    double loss = softmax_cross_entropy(steep, 0).item();
    CHECK(std::isfinite(loss));
    CHECK(loss < 1e-10);
    CHECK(loss >= 0.0);

    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        Tensor logits = random_tensor({5}, rng, -4.0, 4.0);
        const int label = static_cast<int>(rng() % 5);
        const double got = softmax_cross_entropy(logits, label).item();
        const long double want = oracle::softmax_ce_naive(logits.data(), label);
        CHECK(std::abs(got - static_cast<double>(want)) < 1e-10);
        CHECK(got >= 0.0);
    }
    CHECK_THROWS_AS(softmax_cross_entropy(steep, 2), std::out_of_range);
    CHECK_THROWS_AS(softmax_cross_entropy(steep, -1), std::out_of_range);
}

TEST_CASE("sigmoid cross-entropy values") {
    Tensor z = Tensor::from_data({1}, {0.0});
    Tensor t = Tensor::from_data({1}, {0.5});
    CHECK(sigmoid_cross_entropy(z, t).item() == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    Tensor zbig = Tensor::from_data({1}, {1000.0});
    Tensor tone = Tensor::from_data({1}, {1.0});
    const double big = sigmoid_cross_entropy(zbig, tone).item();
    CHECK(std::isfinite(big));
    CHECK(big < 1e-10);

    Rng rng(41);
    for (int trial = 0; trial < 30; ++trial) {
        Tensor zr = random_tensor({10}, rng, -30.0, 30.0);
        Tensor tr = random_tensor({10}, rng, 0.0, 1.0);
        const double got = sigmoid_cross_entropy(zr, tr).item();
        const long double want = oracle::sigmoid_ce_naive(zr.data(), tr.data());
        CHECK(std::abs(got - static_cast<double>(want)) < 1e-10);
    }
    Tensor bad = Tensor::from_data({1}, {1.5});
    CHECK_THROWS_AS(sigmoid_cross_entropy(z, bad), ValidationError);
}

TEST_CASE("mse examples") {
    Tensor a = Tensor::from_data({3}, {1, 2, 3});
    CHECK(mse_loss(a, a).item() == 0.0);
    Tensor p = Tensor::from_data({2}, {0, 0});
    Tensor t = Tensor::from_data({2}, {3, 4});
    CHECK(mse_loss(p, t).item() == doctest::Approx(12.5));

    Rng rng(53);
    for (int trial = 0; trial < 20; ++trial) {
        Tensor x = random_tensor({7}, rng);
        Tensor y = random_tensor({7}, rng);
        CHECK(std::abs(mse_loss(x, y).item() -
                       static_cast<double>(oracle::mse_naive(x.data(), y.data()))) < 1e-12);
    }
    CHECK_THROWS_AS(mse_loss(a, p), DimensionError);
}

TEST_CASE("dropout behavior") {
    Rng rng(61);
    Tensor x = random_tensor({100}, rng);
    Rng r1(1);
    CHECK(dropout(x, 0.5, /*training=*/false, r1).data() == x.data());
    CHECK(dropout(x, 0.0, /*training=*/true, r1).data() == x.data());
    CHECK_THROWS_AS(dropout(x, 1.0, true, r1), ValidationError);
    CHECK_THROWS_AS(dropout(x, -0.1, true, r1), ValidationError);

    const int n = 100000;
    Tensor ones = Tensor::full({n}, 1.0);
    Rng r2(99);
    Tensor dropped = dropout(ones, 0.5, true, r2);
    int zeros = 0;
    double total = 0.0;
    for (double v : dropped.data()) {
        if (v == 0.0) ++zeros;
        total += v;
    }
    const double frac = static_cast<double>(zeros) / n;
    CHECK(frac > 0.49);
    CHECK(frac < 0.51);
    CHECK(std::abs(total / n - 1.0) < 0.02);  // expectation preserved
}

TEST_CASE("adam examples") {
    AdamState state({0.0001, 0.9, 0.999, 1e-8});
    std::vector<Tensor> params{Tensor::from_data({3}, {1, 2, 3}, true)};
    params[0].zero_grad();
    state.step(params);  // zero grad, no decay: unchanged
    CHECK(params[0].data() == std::vector<double>{1, 2, 3});

    // one hand-derived step from theta=0, g=1:
    //   m=0.1, v=0.001, mhat=1, vhat=1 -> theta = -lr/(1+eps)
    AdamState s2({0.0001, 0.9, 0.999, 1e-8});
    std::vector<Tensor> p2{Tensor::zeros({1}, true)};
    p2[0].node()->grad[0] = 1.0;
    s2.step(p2);
    CHECK(p2[0].data()[0] == doctest::Approx(-0.0001 / (1.0 + 1e-8)).epsilon(1e-14));

    // descent on f(theta) = theta^2 from theta=1
    AdamState s3({0.0001, 0.9, 0.999, 1e-8});
    std::vector<Tensor> p3{Tensor::from_data({1}, {1.0}, true)};
    double prev = 1.0;
    for (int step = 0; step < 50; ++step) {
        p3[0].zero_grad();
        p3[0].node()->grad[0] = 2.0 * p3[0].data()[0];
        s3.step(p3);
        const double f = p3[0].data()[0] * p3[0].data()[0];
        CHECK(f < prev);
        prev = f;
    }
}

TEST_CASE("adam weight decay adds decay*theta to the gradient") {
    AdamState state({0.01, 0.9, 0.999, 1e-8});
    std::vector<Tensor> p{Tensor::from_data({1}, {2.0}, true)};
    p[0].zero_grad();
    state.step(p, {0.5});  // g = 0 + 0.5*2 = 1 -> first-step move is -lr/(1+eps)
    CHECK(p[0].data()[0] == doctest::Approx(2.0 - 0.01 / (1.0 + 1e-8)).epsilon(1e-12));
}

TEST_CASE("grad_check on simple closures") {
    Rng rng(71);
    Tensor x = random_tensor({6}, rng);
    CHECK(grad_check([](const Tensor& t) { return sum(t); }, x) < 1e-10);

    // conv -> relu -> mse pipeline
    Tensor img = random_tensor({1, 6, 6}, rng);
    Tensor kernel = random_tensor({2, 1, 3, 3}, rng);
    Tensor target = random_tensor({2, 4, 4}, rng);
    auto f = [&](const Tensor& t) {
        return mse_loss(relu(conv2d(t, {kernel, 1, 0})), target);
    };
    CHECK(grad_check(f, img, 1e-5) < 1e-4);
}

TEST_CASE("every differentiable op passes 20 random gradient checks") {
    Rng rng(101);
    auto dims = [&](int lo, int hi) {
        return lo + static_cast<int>(rng() % static_cast<unsigned>(hi - lo + 1));
    };

    for (int i = 0; i < 20; ++i) {
        // conv2d w.r.t. input and kernel
        const int c = dims(1, 3), h = dims(3, 6), w = dims(3, 6), oc = dims(1, 3);
        const int kh = dims(1, 3), kw = dims(1, 3), stride = dims(1, 2), pad = dims(0, 1);
        Tensor x = random_tensor({c, h, w}, rng);
        Tensor k = random_tensor({oc, c, kh, kw}, rng);
        CHECK(grad_check([&](const Tensor& t) { return sum(conv2d(t, {k, stride, pad})); }, x) < 1e-4);
        CHECK(grad_check([&](const Tensor& t) { return sum(conv2d(x, {t, stride, pad})); }, k) < 1e-4);

        // max_pool: keep entries distinct so FD does not cross a tie
        Tensor mp = random_tensor({1, 6, 6}, rng);
        for (int j = 0; j < mp.numel(); ++j) mp.data()[j] += j * 0.01;
        CHECK(grad_check([&](const Tensor& t) { return sum(max_pool(t, {2, 2}).output); }, mp) < 1e-4);

        // unpool
        Tensor up = random_tensor({2, 3, 3}, rng);
        Tensor upk = random_tensor({1, 2, 2, 2}, rng);
        CHECK(grad_check([&](const Tensor& t) { return sum(conv2d(unpool(t, 2), {upk, 1, 0})); }, up) < 1e-4);

        // dense relu/linear w.r.t. input, weight, bias
        Tensor dx = random_tensor({2, 5}, rng);
        Tensor dw = random_tensor({4, 5}, rng);
        Tensor db = random_tensor({4}, rng);
        const Activation act = (i % 2 == 0) ? Activation::relu : Activation::linear;
        CHECK(grad_check([&](const Tensor& t) { return sum(dense(t, dw, db, act)); }, dx) < 1e-4);
        CHECK(grad_check([&](const Tensor& t) { return sum(dense(dx, t, db, act)); }, dw) < 1e-4);
        CHECK(grad_check([&](const Tensor& t) { return sum(dense(dx, dw, t, act)); }, db) < 1e-4);

        // losses
        Tensor logits = random_tensor({3, 5}, rng, -2.0, 2.0);
        std::vector<int> labels{static_cast<int>(rng() % 5), -1, static_cast<int>(rng() % 5)};
        CHECK(grad_check([&](const Tensor& t) { return softmax_cross_entropy(t, labels); }, logits) < 1e-4);

        Tensor z = random_tensor({8}, rng, -3.0, 3.0);
        Tensor tgt = random_tensor({8}, rng, 0.05, 0.95);
        CHECK(grad_check([&](const Tensor& t) { return sigmoid_cross_entropy(t, tgt); }, z) < 1e-4);

        Tensor pred = random_tensor({4, 3}, rng);
        Tensor truth = random_tensor({4, 3}, rng);
        CHECK(grad_check([&](const Tensor& t) { return mse_loss(t, truth); }, pred) < 1e-4);

        // dropout with a deterministic mask per call
        Tensor dd = random_tensor({30}, rng);
        CHECK(grad_check(
                  [&](const Tensor& t) {
                      Rng mask_rng(4242);
                      return sum(dropout(t, 0.3, true, mask_rng));
                  },
                  dd) < 1e-4);

        // structural ops
        Tensor sx = random_tensor({3, 6}, rng);
        CHECK(grad_check([&](const Tensor& t) { return sum(slice_cols(t, 1, 4)); }, sx) < 1e-4);
        CHECK(grad_check([&](const Tensor& t) { return sum(select_rows(t, {2, 0, 2})); }, sx) < 1e-4);
        CHECK(grad_check([&](const Tensor& t) { return sum(reshape(t, {6, 3})); }, sx) < 1e-4);
        CHECK(grad_check([&](const Tensor& t) { return sum(scale(add(t, sx), -1.7)); }, sx) < 1e-4);
        CHECK(grad_check([&](const Tensor& t) { return sum(relu(t)); }, sx) < 1e-4);
    }
}

TEST_CASE("forward and backward stay finite on finite inputs") {
    Rng rng(113);
    Tensor x = random_tensor({1, 8, 8}, rng, -50.0, 50.0, true);
    Tensor k = random_tensor({4, 1, 3, 3}, rng, -5.0, 5.0, true);
    Tensor pooled = max_pool(relu(conv2d(x, {k, 1, 1})), {2, 2}).output;
    Tensor w = random_tensor({3, 4 * 4 * 4}, rng, -1.0, 1.0, true);
    Tensor b = Tensor::zeros({3}, true);
    Tensor logits = dense(reshape(pooled, {1, 4 * 4 * 4}), w, b, Activation::linear);
    Tensor loss = softmax_cross_entropy(logits, std::vector<int>{1});
    loss.backward();
    CHECK(loss.all_finite());
    CHECK(x.all_finite());
    CHECK(k.all_finite());
    CHECK(w.all_finite());
}

TEST_CASE("same seed gives bit-identical parameter trajectories") {
    auto run = [](std::uint64_t seed) {
        Rng rng(seed);
        Tensor w = random_tensor({4, 9}, rng, -0.3, 0.3, true);
        Tensor b = Tensor::zeros({4}, true);
        std::vector<Tensor> params{w, b};
        AdamState state({0.001, 0.9, 0.999, 1e-8});
        for (int step = 0; step < 25; ++step) {
            Tensor x = random_tensor({3, 9}, rng);
            Tensor t = random_tensor({3, 4}, rng);
            for (auto& p : params) p.zero_grad();
            Tensor loss = mse_loss(dense(x, w, b, Activation::relu), t);
            loss.backward();
            state.step(params, {0.0005, 0.0005});
        }
        std::vector<double> flat = w.data();
        flat.insert(flat.end(), b.data().begin(), b.data().end());
        return flat;
    };
    auto a = run(2024), b2 = run(2024), c = run(2025);
    CHECK(std::memcmp(a.data(), b2.data(), a.size() * sizeof(double)) == 0);
    CHECK(a != c);
}

TEST_CASE("checkpoint round-trip preserves names, shapes, bits") {
    Rng rng(131);
    std::vector<NamedTensor> tensors;
    tensors.push_back({"encoder.conv0.kernel", random_tensor({4, 1, 3, 3}, rng)});
    tensors.push_back({"encoder.fc1.weight", random_tensor({8, 16}, rng)});
    tensors.push_back({"encoder.fc1.bias", random_tensor({8}, rng)});
    const auto path = std::filesystem::temp_directory_path() / "shapemap_ckpt_test.bin";
    save_checkpoint(path, tensors);
    auto loaded = load_checkpoint(path);
    REQUIRE(loaded.size() == tensors.size());
    for (size_t i = 0; i < tensors.size(); ++i) {
        CHECK(loaded[i].name == tensors[i].name);
        CHECK(loaded[i].tensor.shape() == tensors[i].tensor.shape());
        CHECK(std::memcmp(loaded[i].tensor.data().data(), tensors[i].tensor.data().data(),
                          tensors[i].tensor.data().size() * sizeof(double)) == 0);
    }
    std::filesystem::remove(path);
}
