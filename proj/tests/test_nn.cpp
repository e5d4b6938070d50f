#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "code.hpp"
#include "equivariance.hpp"
#include "nn.hpp"
#include "noise.hpp"

using namespace toric;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, float scale = 1.0f) {
    Tensor t(std::move(shape));
    for (auto& v : t.vec()) v = static_cast<float>(rng.gaussian()) * scale;
    return t;
}

double weighted_sum(const Tensor& y, const Tensor& r) {
    REQUIRE(y.same_shape(r));
    double s = 0.0;
    for (std::size_t i = 0; i < y.numel(); ++i) s += double(y[i]) * r[i];
    return s;
}

// Central differences against analytic gradients on the given entries.
// Returns ||fd - analytic|| / (||fd|| + ||analytic||); float32 forward noise
// keeps individual entries from matching tightly, the aggregate is stable.
double fd_disagreement(const std::vector<float*>& entries, const std::vector<float>& analytic,
                       const std::function<double()>& loss, float h = 1e-3f) {
    REQUIRE(entries.size() == analytic.size());
    double num = 0.0, na = 0.0, nf = 0.0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        float save = *entries[i];
        *entries[i] = save + h;
        double lp = loss();
        *entries[i] = save - h;
        double lm = loss();
        *entries[i] = save;
        double fd = (lp - lm) / (2.0 * double(h));
        double d = fd - analytic[i];
        num += d * d;
        na += double(analytic[i]) * analytic[i];
        nf += fd * fd;
    }
    return std::sqrt(num) / (std::sqrt(na) + std::sqrt(nf) + 1e-12);
}

// sample at most cap entries of a tensor, evenly strided
void collect(Tensor& value, const Tensor& grad, std::vector<float*>& entries,
             std::vector<float>& analytic, std::size_t cap = 160) {
    std::size_t n = value.numel();
    std::size_t stride = std::max<std::size_t>(1, n / cap);
    for (std::size_t i = 0; i < n; i += stride) {
        entries.push_back(&value[i]);
        analytic.push_back(grad[i]);
    }
}

Tensor input_row(const Code& code, const BitVec& syndrome) {
    Tensor x({1, code.volume(), n_channels(code)});
    write_channels_last(code, syndrome, x.data());
    return x;
}

}  // namespace

TEST_CASE("conv gradients match finite differences") {
    Rng rng(11, 0);
    Conv3d conv(3, 2, 3);
    for (auto& v : conv.w.vec()) v = static_cast<float>(rng.gaussian()) * 0.2f;
    for (auto& v : conv.b.vec()) v = static_cast<float>(rng.gaussian()) * 0.1f;
    Tensor x = random_tensor({2, 8, 3}, rng);
    Tensor r = random_tensor({2, 8, 2}, rng);

    conv.gw.fill(0.0f);
    conv.gb.fill(0.0f);
    conv.forward(x);
    Tensor gx = conv.backward(r);

    std::vector<float*> entries;
    std::vector<float> analytic;
    collect(conv.w, conv.gw, entries, analytic);
    collect(conv.b, conv.gb, entries, analytic);
    collect(x, gx, entries, analytic);
    auto loss = [&] { return weighted_sum(conv.forward(x), r); };
    double err = fd_disagreement(entries, analytic, loss);
    CHECK(err < 1e-3);
}

TEST_CASE("pointwise identity conv passes input through") {
    Conv3d conv(3, 3, 1);
    for (int ci = 0; ci < 3; ++ci)
        for (int co = 0; co < 3; ++co) conv.w[ci * 3 + co] = ci == co ? 1.0f : 0.0f;
    Rng rng(10, 0);
    Tensor x = random_tensor({2, 27, 3}, rng);
    Tensor y = conv.forward(x);
    for (std::size_t i = 0; i < x.numel(); ++i) CHECK(y[i] == x[i]);
}

TEST_CASE("conv gradient accumulates across backward calls") {
    Rng rng(12, 0);
    Conv3d conv(2, 2, 1);
    for (auto& v : conv.w.vec()) v = static_cast<float>(rng.gaussian());
    Tensor x = random_tensor({1, 8, 2}, rng);
    Tensor r = random_tensor({1, 8, 2}, rng);
    conv.forward(x);
    conv.backward(r);
    Tensor once = conv.gw;
    conv.backward(r);
    for (std::size_t i = 0; i < once.numel(); ++i)
        CHECK(conv.gw[i] == doctest::Approx(2.0f * once[i]).epsilon(1e-5));
}

TEST_CASE("conv commutes with cyclic lattice shifts") {
    Rng rng(13, 0);
    int L = 3;
    std::size_t P = 27;
    Conv3d conv(2, 3, 3);
    for (auto& v : conv.w.vec()) v = static_cast<float>(rng.gaussian()) * 0.3f;
    for (auto& v : conv.b.vec()) v = static_cast<float>(rng.gaussian()) * 0.1f;
    Tensor x = random_tensor({1, P, 2}, rng);

    int d[3] = {1, 2, 0};
    auto shift = [&](std::size_t p) {
        int i = int(p) / (L * L), j = (int(p) / L) % L, k = int(p) % L;
        return std::size_t(((i + d[0]) % L) * L * L + ((j + d[1]) % L) * L + (k + d[2]) % L);
    };
    Tensor xs({1, P, 2});
    for (std::size_t p = 0; p < P; ++p)
        for (std::size_t c = 0; c < 2; ++c) xs[shift(p) * 2 + c] = x[p * 2 + c];

    Tensor y = conv.forward(x);
    Tensor ys = conv.forward(xs);
    for (std::size_t p = 0; p < P; ++p)
        for (std::size_t c = 0; c < 3; ++c)
            CHECK(std::abs(ys[shift(p) * 3 + c] - y[p * 3 + c]) < 1e-6);
}

TEST_CASE("batchnorm training statistics and running updates") {
    Rng rng(14, 0);
    BatchNorm bn(3);
    bn.training = true;
    Tensor x = random_tensor({4, 8, 3}, rng, 2.0f);
    for (std::size_t i = 0; i < x.numel(); i += 3) x[i] += 5.0f;  // channel 0 off-center

    std::size_t rows = 32;
    std::vector<double> mean(3, 0.0), var(3, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
        for (int c = 0; c < 3; ++c) mean[c] += x[r * 3 + c];
    for (int c = 0; c < 3; ++c) mean[c] /= double(rows);
    for (std::size_t r = 0; r < rows; ++r)
        for (int c = 0; c < 3; ++c) {
            double dd = x[r * 3 + c] - mean[c];
            var[c] += dd * dd;
        }
    for (int c = 0; c < 3; ++c) var[c] /= double(rows);

    Tensor y = bn.forward(x);
    for (int c = 0; c < 3; ++c) {
        double m = 0.0, v = 0.0;
        for (std::size_t r = 0; r < rows; ++r) m += y[r * 3 + c];
        m /= double(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            double dd = y[r * 3 + c] - m;
            v += dd * dd;
        }
        v /= double(rows);
        CHECK(std::abs(m) < 1e-5);
        CHECK(v == doctest::Approx(1.0).epsilon(1e-3));
        CHECK(bn.run_mean[c] == doctest::Approx(0.1 * mean[c]).epsilon(1e-4));
        double unbiased = var[c] * double(rows) / double(rows - 1);
        CHECK(bn.run_var[c] == doctest::Approx(0.9 + 0.1 * unbiased).epsilon(1e-4));
    }

    bn.training = false;
    Tensor z = bn.forward(x);
    for (std::size_t r = 0; r < rows; ++r)
        for (int c = 0; c < 3; ++c) {
            double expect = (x[r * 3 + c] - bn.run_mean[c]) /
                            std::sqrt(double(bn.run_var[c]) + 1e-5);
            CHECK(z[r * 3 + c] == doctest::Approx(expect).epsilon(1e-5));
        }
}

TEST_CASE("batchnorm gradients match finite differences") {
    Rng rng(15, 0);
    BatchNorm bn(3);
    bn.training = true;
    for (auto& v : bn.gamma.vec()) v = 1.0f + 0.3f * static_cast<float>(rng.gaussian());
    for (auto& v : bn.beta.vec()) v = 0.2f * static_cast<float>(rng.gaussian());
    Tensor x = random_tensor({2, 8, 3}, rng, 1.5f);
    Tensor r = random_tensor({2, 8, 3}, rng);

    bn.ggamma.fill(0.0f);
    bn.gbeta.fill(0.0f);
    bn.forward(x);
    Tensor gx = bn.backward(r);

    std::vector<float*> entries;
    std::vector<float> analytic;
    collect(bn.gamma, bn.ggamma, entries, analytic);
    collect(bn.beta, bn.gbeta, entries, analytic);
    collect(x, gx, entries, analytic);
    auto loss = [&] { return weighted_sum(bn.forward(x), r); };
    CHECK(fd_disagreement(entries, analytic, loss) < 1e-3);
}

TEST_CASE("gelu matches erf form and finite differences") {
    Gelu act;
    Tensor x({1, 1, 5});
    float vals[5] = {-2.0f, -0.5f, 0.0f, 0.7f, 3.0f};
    for (int i = 0; i < 5; ++i) x[i] = vals[i];
    Tensor y = act.forward(x);
    for (int i = 0; i < 5; ++i) {
        double v = vals[i];
        CHECK(y[i] == doctest::Approx(0.5 * v * (1.0 + std::erf(v / std::sqrt(2.0)))).epsilon(1e-5));
    }

    Rng rng(16, 0);
    Tensor xr = random_tensor({2, 4, 3}, rng);
    Tensor r = random_tensor({2, 4, 3}, rng);
    act.forward(xr);
    Tensor gx = act.backward(r);
    std::vector<float*> entries;
    std::vector<float> analytic;
    collect(xr, gx, entries, analytic);
    auto loss = [&] { return weighted_sum(act.forward(xr), r); };
    CHECK(fd_disagreement(entries, analytic, loss) < 1e-3);
}

TEST_CASE("residual block gradients match finite differences") {
    Rng rng(17, 0);
    WideResBlock block(3, 4, 2, 3);
    for (auto& conv : block.convs)
        for (auto& v : conv.w.vec()) v = 0.2f * static_cast<float>(rng.gaussian());
    for (auto& v : block.proj.w.vec()) v = 0.3f * static_cast<float>(rng.gaussian());
    for (auto& bn : block.norms) bn.training = true;

    Tensor x = random_tensor({2, 8, 3}, rng);
    Tensor r = random_tensor({2, 8, 4}, rng);
    block.forward(x);
    Tensor gx = block.backward(r);

    std::vector<float*> entries;
    std::vector<float> analytic;
    collect(block.convs[0].w, block.convs[0].gw, entries, analytic, 60);
    collect(block.convs[1].w, block.convs[1].gw, entries, analytic, 60);
    collect(block.proj.w, block.proj.gw, entries, analytic, 12);
    collect(block.norms[0].gamma, block.norms[0].ggamma, entries, analytic);
    collect(block.norms[1].beta, block.norms[1].gbeta, entries, analytic);
    collect(x, gx, entries, analytic, 48);
    auto loss = [&] { return weighted_sum(block.forward(x), r); };
    CHECK(fd_disagreement(entries, analytic, loss) < 1e-3);
}

TEST_CASE("residual block reduces to the projection path with a zero conv path") {
    Rng rng(22, 0);
    WideResBlock block(3, 4, 2, 3);
    for (auto& conv : block.convs) {
        conv.w.fill(0.0f);
        conv.b.fill(0.0f);
    }
    for (auto& v : block.proj.w.vec()) v = static_cast<float>(rng.gaussian());
    Conv3d proj_copy = block.proj;

    Tensor x = random_tensor({2, 8, 3}, rng);
    Tensor y = block.forward(x);
    Tensor yp = proj_copy.forward(x);
    for (std::size_t i = 0; i < y.numel(); ++i) CHECK(y[i] == yp[i]);
}

TEST_CASE("network end-to-end gradients match finite differences") {
    NetworkConfig cfg;
    cfg.in_channels = 4;
    cfg.n_classes = 8;
    cfg.channels = {5, 4};
    cfg.stages = 2;
    cfg.kernel = 3;
    Network net(cfg);
    Rng rng(18, 0);
    net.init(rng);
    net.set_training(true);

    std::size_t B = 2, P = 8;
    Tensor x = random_tensor({B, P, 4}, rng);
    Tensor r = random_tensor({B, 8}, rng);
    std::vector<std::uint8_t> masks(B * P);
    for (auto& m : masks) m = static_cast<std::uint8_t>(rng.bits() % 8);

    net.zero_grad();
    net.forward(x, masks.data());
    Tensor gx = net.backward(r, masks.data());

    std::vector<float*> entries;
    std::vector<float> analytic;
    for (auto& p : net.params()) collect(*p.value, *p.grad, entries, analytic, 24);
    collect(x, gx, entries, analytic, 64);
    auto loss = [&] { return weighted_sum(net.forward(x, masks.data()), r); };
    CHECK(fd_disagreement(entries, analytic, loss) < 1e-3);
}

TEST_CASE("softmax and pooling identities") {
    NetworkConfig cfg;
    cfg.in_channels = 4;
    cfg.n_classes = 8;
    cfg.channels = {5};
    cfg.stages = 1;
    Network net(cfg);
    Rng rng(19, 0);
    net.init(rng);

    std::size_t B = 3, P = 8;
    Tensor x = random_tensor({B, P, 4}, rng);
    Tensor probs = net.position_probs(x);
    REQUIRE(probs.shape() == std::vector<std::size_t>{B, P, 8});
    for (std::size_t row = 0; row < B * P; ++row) {
        double s = 0.0;
        for (int c = 0; c < 8; ++c) {
            CHECK(probs[row * 8 + c] > 0.0f);
            s += probs[row * 8 + c];
        }
        CHECK(s == doctest::Approx(1.0).epsilon(1e-5));
    }

    Tensor plain = net.pool(probs, nullptr);
    for (std::size_t b = 0; b < B; ++b)
        for (int c = 0; c < 8; ++c) {
            double m = 0.0;
            for (std::size_t p = 0; p < P; ++p) m += probs[(b * P + p) * 8 + c];
            CHECK(plain[b * 8 + c] == doctest::Approx(m / double(P)).epsilon(1e-6));
        }

    std::vector<std::uint8_t> masks(B * P);
    for (auto& m : masks) m = static_cast<std::uint8_t>(rng.bits() % 8);
    Tensor pooled = net.pool(probs, masks.data());
    for (std::size_t b = 0; b < B; ++b) {
        double total = 0.0;
        for (unsigned c = 0; c < 8; ++c) {
            double m = 0.0;
            for (std::size_t p = 0; p < P; ++p)
                m += probs[(b * P + p) * 8 + (c ^ masks[b * P + p])];
            CHECK(pooled[b * 8 + c] == doctest::Approx(m / double(P)).epsilon(1e-6));
            total += pooled[b * 8 + c];
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-5));
    }
}

TEST_CASE("plain pooling head is invariant, mask head is equivariant") {
    Code code = build_toric(3, 3);
    FlipTables ft(code);
    NetworkConfig cfg;
    cfg.in_channels = 4;
    cfg.n_classes = 64;
    cfg.channels = {8, 6};
    cfg.stages = 2;
    Network net(cfg);
    Rng wrng(20, 0);
    net.init(wrng);
    net.set_training(false);

    std::size_t P = code.volume();
    Rng rng(21, 1);
    for (int trial = 0; trial < 8; ++trial) {
        PauliError e = sample_error(code, 0.08, rng);
        BitVec s = extract_syndrome(code, e);
        Translation g = translation_at(code, rng.bits() % translation_count(code));
        BitVec sg = translate_syndrome(code, s, g);

        Tensor x1 = input_row(code, s);
        Tensor x2 = input_row(code, sg);

        Tensor a = net.forward(x1, nullptr);
        Tensor b = net.forward(x2, nullptr);
        for (std::size_t c = 0; c < 64; ++c)
            CHECK(std::abs(a[c] - b[c]) < 1e-5);

        std::vector<std::uint8_t> m1(P), m2(P);
        ft.pooling_masks(s, m1.data());
        ft.pooling_masks(sg, m2.data());
        Tensor q1 = net.forward(x1, m1.data());
        Tensor q2 = net.forward(x2, m2.data());
        unsigned delta = ft.delta_bits(g, s);
        for (unsigned c = 0; c < 64; ++c)
            CHECK(std::abs(q2[c] - q1[c ^ delta]) < 1e-5);
    }
}

TEST_CASE("weight init hits the kaiming variance target") {
    NetworkConfig cfg;
    cfg.in_channels = 64;
    cfg.channels = {64};
    cfg.stages = 1;
    Network net(cfg);
    Rng rng(35, 0);
    net.init(rng);

    const Tensor& w = net.blocks[0].convs[0].w;
    REQUIRE(w.numel() >= 100000);
    double mean = 0.0, var = 0.0;
    for (std::size_t i = 0; i < w.numel(); ++i) mean += w[i];
    mean /= double(w.numel());
    for (std::size_t i = 0; i < w.numel(); ++i) var += (w[i] - mean) * (w[i] - mean);
    var /= double(w.numel());
    double target = 2.0 / ((1.0 + 0.01 * 0.01) * 27.0 * 64.0);
    CHECK(std::abs(var - target) < 0.05 * target);
    CHECK(std::abs(mean) < 4.0 * std::sqrt(target / double(w.numel())));
    for (std::size_t i = 0; i < net.head.b.numel(); ++i) CHECK(net.head.b[i] == 0.0f);
}

TEST_CASE("network init is deterministic and channel defaults switch at L=3") {
    CHECK(default_channels(2) == std::vector<int>{32, 16, 16});
    CHECK(default_channels(3) == std::vector<int>{32, 16, 16});
    CHECK(default_channels(4) == std::vector<int>{128, 64, 64});
    CHECK(default_channels(5) == std::vector<int>{128, 64, 64});

    NetworkConfig cfg;
    cfg.channels = {6, 5};
    cfg.stages = 2;
    Network a(cfg), b(cfg);
    Rng r1(33, 0), r2(33, 0);
    a.init(r1);
    b.init(r2);
    auto pa = a.params(), pb = b.params();
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) {
        REQUIRE(pa[i].name == pb[i].name);
        REQUIRE(pa[i].value->numel() == pb[i].value->numel());
        for (std::size_t j = 0; j < pa[i].value->numel(); ++j)
            CHECK((*pa[i].value)[j] == (*pb[i].value)[j]);
    }

    Rng xr(34, 0);
    Tensor x = random_tensor({2, 27, 4}, xr);
    Tensor ya = a.forward(x, nullptr);
    Tensor yb = b.forward(x, nullptr);
    for (std::size_t i = 0; i < ya.numel(); ++i) CHECK(ya[i] == yb[i]);
}
