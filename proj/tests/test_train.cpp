#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "code.hpp"
#include "noise.hpp"
#include "train.hpp"

using namespace toric;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

TrainConfig tiny_config() {
    TrainConfig cfg;
    cfg.L = 2;
    cfg.dim = 3;
    cfg.p_train = 0.05;
    cfg.seed = 7;
    cfg.batch = 16;
    cfg.total_samples = 160;
    cfg.max_lr = 0.02;
    cfg.stages = 2;
    cfg.channels = {6, 5};
    return cfg;
}

}  // namespace

TEST_CASE("one-cycle schedule hits its three anchors") {
    double mx = 0.1;
    std::size_t T = 1000;
    CHECK(onecycle_lr(0, T, mx) == doctest::Approx(mx / 25.0).epsilon(1e-9));
    CHECK(onecycle_lr(300, T, mx) == doctest::Approx(mx).epsilon(1e-9));
    CHECK(onecycle_lr(T, T, mx) == doctest::Approx(mx / 1e4).epsilon(1e-9));

    double prev = onecycle_lr(0, T, mx);
    for (std::size_t s = 1; s <= 300; ++s) {
        double lr = onecycle_lr(s, T, mx);
        CHECK(lr >= prev);
        CHECK(lr <= mx + 1e-12);
        prev = lr;
    }
    for (std::size_t s = 301; s <= T; ++s) {
        double lr = onecycle_lr(s, T, mx);
        CHECK(lr <= prev);
        prev = lr;
    }
}

TEST_CASE("class weights follow cumulative frequencies") {
    auto w = class_weights({3, 1}, 4);
    CHECK(w[0] == doctest::Approx(4.0 / 6.0));
    CHECK(w[1] == doctest::Approx(2.0));

    auto u = class_weights({5, 5, 5, 5}, 20);
    for (float v : u) CHECK(v == doctest::Approx(1.0));

    ClassWeightTracker tracker(4);
    tracker.update({0, 1, 2, 0, 1, 2, 0, 1, 2});
    auto tw = tracker.weights();
    CHECK(tracker.seen() == 9);
    // class 3 never seen: finite and strictly maximal
    for (int j = 0; j < 3; ++j) CHECK(tw[3] > tw[j]);
    CHECK(std::isfinite(tw[3]));
    CHECK(tw[3] == doctest::Approx(9.0 / 4.0));

    // heavily and evenly exercised classes settle near weight one
    ClassWeightTracker even(2);
    for (int rep = 0; rep < 500; ++rep) even.update({0, 1});
    auto ew = even.weights();
    CHECK(ew[0] == doctest::Approx(1.0).epsilon(2e-3));
    CHECK(ew[1] == doctest::Approx(1.0).epsilon(2e-3));
}

TEST_CASE("weighted cross-entropy values and gradient") {
    Tensor pooled({1, 2});
    pooled[0] = 0.5f;
    pooled[1] = 0.5f;
    Tensor g;
    double loss = weighted_cross_entropy(pooled, {0}, {1.0f, 1.0f}, g);
    CHECK(loss == doctest::Approx(std::log(2.0)).epsilon(1e-6));
    CHECK(g[0] == doctest::Approx(-2.0).epsilon(1e-5));
    CHECK(g[1] == 0.0f);

    Tensor onehot({2, 3});
    onehot[0 * 3 + 1] = 1.0f;
    onehot[1 * 3 + 2] = 1.0f;
    double perfect = weighted_cross_entropy(onehot, {1, 2}, {1.0f, 1.0f, 1.0f}, g);
    CHECK(std::abs(perfect) < 1e-8);

    // doubled weight on the second sample's class doubles its contribution
    Tensor p2({2, 2});
    p2[0] = 0.5f;
    p2[1] = 0.5f;
    p2[2] = 0.25f;
    p2[3] = 0.75f;
    double l2 = weighted_cross_entropy(p2, {0, 1}, {1.0f, 2.0f}, g);
    CHECK(l2 == doctest::Approx(0.5 * (std::log(2.0) + 2.0 * -std::log(0.75))).epsilon(1e-6));
    CHECK(g[3] == doctest::Approx(-2.0 / (0.75 * 2.0)).epsilon(1e-5));
}

TEST_CASE("adamw leaves parameters alone without gradient or decay") {
    Tensor value({3});
    value[0] = 1.0f;
    value[1] = -2.0f;
    value[2] = 0.5f;
    Tensor grad({3});
    AdamW opt({{"p", &value, &grad}}, 0.0);
    for (int i = 0; i < 5; ++i) opt.step(0.1);
    CHECK(value[0] == 1.0f);
    CHECK(value[1] == -2.0f);
    CHECK(value[2] == 0.5f);
}

TEST_CASE("adamw drives a quadratic toward its minimum") {
    Tensor x({1});
    x[0] = 10.0f;
    Tensor g({1});
    AdamW opt({{"x", &x, &g}}, 0.0);
    std::vector<double> losses;
    for (int i = 0; i < 200; ++i) {
        double d = double(x[0]) - 3.0;
        losses.push_back(0.5 * d * d);
        g[0] = static_cast<float>(d);
        opt.step(0.05);
    }
    for (std::size_t i = 10; i + 1 < losses.size(); ++i)
        CHECK(losses[i + 1] <= losses[i] + 1e-12);
    CHECK(losses.back() < 0.02 * losses.front());
    CHECK(std::abs(x[0] - 3.0f) < 1.0f);

    // decoupled decay pulls weights down even with zero gradient
    Tensor y({1});
    y[0] = 1.0f;
    Tensor gy({1});
    AdamW decay({{"y", &y, &gy}}, 0.5);
    decay.step(0.1);
    CHECK(y[0] == doctest::Approx(1.0f - 0.1f * 0.5f));
}

TEST_CASE("training runs, shrinks the loss trace, and is reproducible") {
    Code code = build_toric(2, 3);
    TrainConfig cfg = tiny_config();
    TrainResult a = train(code, cfg);
    REQUIRE(a.loss.size() == 10);
    REQUIRE(a.lr.size() == 10);
    for (double l : a.loss) CHECK(std::isfinite(l));
    CHECK(a.lr[0] == doctest::Approx(cfg.max_lr / 25.0).epsilon(1e-9));

    TrainResult b = train(code, cfg);
    for (std::size_t i = 0; i < a.loss.size(); ++i) {
        CHECK(a.loss[i] == b.loss[i]);
        CHECK(a.lr[i] == b.lr[i]);
    }
    auto pa = a.net.params(), pb = b.net.params();
    for (std::size_t i = 0; i < pa.size(); ++i)
        for (std::size_t j = 0; j < pa[i].value->numel(); ++j)
            CHECK((*pa[i].value)[j] == (*pb[i].value)[j]);

    // a different seed trains to different weights
    TrainConfig other = cfg;
    other.seed = 8;
    TrainResult c = train(code, other);
    auto pc = c.net.params();
    bool any_diff = false;
    for (std::size_t j = 0; j < pa[0].value->numel() && !any_diff; ++j)
        any_diff = (*pa[0].value)[j] != (*pc[0].value)[j];
    CHECK(any_diff);
}

TEST_CASE("loss csv format") {
    TrainResult r{Network(NetworkConfig{4, 8, {3}, 1, 1, HeadKind::Gap}), {}, {}};
    r.loss = {0.6931471805599453, 1.25};
    r.lr = {0.004, 0.1};
    std::ostringstream ss;
    write_loss_csv(r, ss);
    CHECK(ss.str() == "step,lr,loss\n0,0.004,0.693147181\n1,0.1,1.25\n");
}

TEST_CASE("checkpoints round-trip bit-exactly") {
    Code code = build_toric(2, 3);
    TrainConfig cfg = tiny_config();
    cfg.total_samples = 32;  // two steps is enough to move weights
    TrainResult r = train(code, cfg);

    std::string p1 = "ck_roundtrip_1.nqd";
    std::string p2 = "ck_roundtrip_2.nqd";
    save_checkpoint(p1, r.net, cfg);
    Checkpoint ck = load_checkpoint(p1);

    CHECK(ck.cfg.L == cfg.L);
    CHECK(ck.cfg.dim == cfg.dim);
    CHECK(ck.cfg.seed == cfg.seed);
    CHECK(ck.cfg.batch == cfg.batch);
    CHECK(ck.cfg.total_samples == cfg.total_samples);
    CHECK(ck.cfg.head == cfg.head);
    CHECK(ck.cfg.channels == cfg.channels);
    CHECK(ck.net.config().n_classes == 64);

    auto pa = r.net.params(), pb = ck.net.params();
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) {
        REQUIRE(pa[i].name == pb[i].name);
        REQUIRE(pa[i].value->shape() == pb[i].value->shape());
        for (std::size_t j = 0; j < pa[i].value->numel(); ++j)
            CHECK((*pa[i].value)[j] == (*pb[i].value)[j]);
    }
    auto ba = r.net.buffers(), bb = ck.net.buffers();
    for (std::size_t i = 0; i < ba.size(); ++i)
        for (std::size_t j = 0; j < ba[i].value->numel(); ++j)
            CHECK((*ba[i].value)[j] == (*bb[i].value)[j]);

    save_checkpoint(p2, ck.net, ck.cfg);
    CHECK(slurp(p1) == slurp(p2));
    std::remove(p1.c_str());
    std::remove(p2.c_str());

    // loaded and fresh nets agree on a forward pass
    Rng rng(3, 9);
    Tensor x({2, code.volume(), n_channels(code)});
    for (auto& v : x.vec()) v = rng.uniform() < 0.2 ? 1.0f : 0.0f;
    Tensor ya = r.net.forward(x, nullptr);
    Tensor yb = ck.net.forward(x, nullptr);
    for (std::size_t i = 0; i < ya.numel(); ++i) CHECK(ya[i] == yb[i]);
}

TEST_CASE("seeds above 32 bits survive the checkpoint meta") {
    Code code = build_toric(2, 3);
    TrainConfig cfg = tiny_config();
    cfg.total_samples = 16;
    cfg.seed = 0xfeedfacecafebeefULL;
    TrainResult r = train(code, cfg);
    std::string path = "ck_bigseed.nqd";
    save_checkpoint(path, r.net, cfg);
    Checkpoint ck = load_checkpoint(path);
    CHECK(ck.cfg.seed == cfg.seed);
    std::remove(path.c_str());
}

TEST_CASE("network config mirrors the code and config") {
    Code code3 = build_toric(3, 3);
    TrainConfig cfg;
    NetworkConfig nc = network_config(code3, cfg);
    CHECK(nc.in_channels == 4);
    CHECK(nc.n_classes == 64);
    CHECK(nc.channels == std::vector<int>{32, 16, 16});
    CHECK(nc.head == HeadKind::GapT);

    Code code2 = build_toric(4, 2);
    TrainConfig cfg2;
    cfg2.L = 4;
    cfg2.dim = 2;
    NetworkConfig nc2 = network_config(code2, cfg2);
    CHECK(nc2.in_channels == 2);
    CHECK(nc2.n_classes == 16);
    CHECK(nc2.channels == std::vector<int>{128, 64, 64});
}
