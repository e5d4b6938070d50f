#include "nn.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "noise.hpp"

namespace toric {

namespace {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;
using MapVec = Eigen::Map<Eigen::VectorXf>;
using CMapVec = Eigen::Map<const Eigen::VectorXf>;

int cube_side(std::size_t p) {
    for (int l = 1; static_cast<std::size_t>(l) * l * l <= p; ++l)
        if (static_cast<std::size_t>(l) * l * l == p) return l;
    throw std::invalid_argument("conv3d: positions are not a cube");
}

Tensor add(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("add: shape mismatch");
    Tensor y = a;
    for (std::size_t i = 0; i < y.numel(); ++i) y[i] += b[i];
    return y;
}

// fixed chunking keeps the patch buffer modest and the GEMM shapes stable
std::size_t chunk_samples(std::size_t per_sample_floats) {
    std::size_t budget = std::size_t(4) << 20;
    return std::max<std::size_t>(1, budget / std::max<std::size_t>(1, per_sample_floats));
}

}  // namespace

Conv3d::Conv3d(int in_c, int out_c, int k) : in_c_(in_c), out_c_(out_c), k_(k) {
    if (in_c <= 0 || out_c <= 0 || k <= 0 || k % 2 == 0)
        throw std::invalid_argument("conv3d: channels must be positive and k odd");
    auto kk = static_cast<std::size_t>(k);
    w = Tensor({kk, kk, kk, static_cast<std::size_t>(in_c), static_cast<std::size_t>(out_c)});
    gw = Tensor(w.shape());
    b = Tensor({static_cast<std::size_t>(out_c)});
    gb = Tensor(b.shape());
}

void Conv3d::ensure_geometry(int L) {
    if (L == L_) return;
    L_ = L;
    P_ = static_cast<std::size_t>(L) * L * L;
    int taps = k_ * k_ * k_, c = k_ / 2;
    nbr_.resize(static_cast<std::size_t>(taps) * P_);
    auto wrap = [L](int a) { return ((a % L) + L) % L; };
    for (int ti = 0; ti < k_; ++ti)
        for (int tj = 0; tj < k_; ++tj)
            for (int tk = 0; tk < k_; ++tk) {
                std::size_t tap = (static_cast<std::size_t>(ti) * k_ + tj) * k_ + tk;
                for (int i = 0; i < L; ++i)
                    for (int j = 0; j < L; ++j)
                        for (int k3 = 0; k3 < L; ++k3) {
                            std::size_t p = (static_cast<std::size_t>(i) * L + j) * L + k3;
                            std::size_t q = (static_cast<std::size_t>(wrap(i + ti - c)) * L +
                                             wrap(j + tj - c)) * L + wrap(k3 + tk - c);
                            nbr_[tap * P_ + p] = static_cast<std::int32_t>(q);
                        }
            }
}

void Conv3d::gather_patches(const Tensor& x, std::size_t b0, std::size_t bs, float* out) const {
    std::size_t taps = static_cast<std::size_t>(k_) * k_ * k_;
    std::size_t ck = taps * in_c_;
    const float* xd = x.data();
    for (std::size_t s = 0; s < bs; ++s) {
        std::size_t base = (b0 + s) * P_;
        for (std::size_t p = 0; p < P_; ++p) {
            float* row = out + (s * P_ + p) * ck;
            for (std::size_t t = 0; t < taps; ++t)
                std::memcpy(row + t * in_c_, xd + (base + nbr_[t * P_ + p]) * in_c_,
                            sizeof(float) * in_c_);
        }
    }
}

Tensor Conv3d::forward(const Tensor& x) {
    if (x.rank() != 3 || x.dim(2) != static_cast<std::size_t>(in_c_))
        throw std::invalid_argument("conv3d: bad input shape");
    std::size_t B = x.dim(0), P = x.dim(1);
    ensure_geometry(cube_side(P));
    std::size_t ck = fan_in();
    Tensor y({B, P, static_cast<std::size_t>(out_c_)});
    std::size_t chunk = chunk_samples(P * ck);
    std::vector<float> patches(std::min(chunk, B) * P * ck);
    CMapMat wm(w.data(), static_cast<Eigen::Index>(ck), out_c_);
    CMapVec bv(b.data(), out_c_);
    for (std::size_t b0 = 0; b0 < B; b0 += chunk) {
        std::size_t bs = std::min(chunk, B - b0);
        gather_patches(x, b0, bs, patches.data());
        CMapMat a(patches.data(), static_cast<Eigen::Index>(bs * P), static_cast<Eigen::Index>(ck));
        MapMat ym(y.data() + b0 * P * out_c_, static_cast<Eigen::Index>(bs * P), out_c_);
        ym.noalias() = a * wm;
        ym.rowwise() += bv.transpose();
    }
    x_ = x;
    return y;
}

Tensor Conv3d::backward(const Tensor& gy) {
    if (x_.numel() == 0) throw std::logic_error("conv3d: backward before forward");
    std::size_t B = x_.dim(0), P = x_.dim(1);
    if (gy.rank() != 3 || gy.dim(0) != B || gy.dim(1) != P ||
        gy.dim(2) != static_cast<std::size_t>(out_c_))
        throw std::invalid_argument("conv3d: bad gradient shape");
    std::size_t ck = fan_in();
    std::size_t taps = static_cast<std::size_t>(k_) * k_ * k_;
    Tensor gx(x_.shape());
    std::size_t chunk = chunk_samples(P * ck);
    std::vector<float> patches(std::min(chunk, B) * P * ck);
    std::vector<float> gpatches(patches.size());
    CMapMat wm(w.data(), static_cast<Eigen::Index>(ck), out_c_);
    MapMat gwm(gw.data(), static_cast<Eigen::Index>(ck), out_c_);
    MapVec gbv(gb.data(), out_c_);
    for (std::size_t b0 = 0; b0 < B; b0 += chunk) {
        std::size_t bs = std::min(chunk, B - b0);
        gather_patches(x_, b0, bs, patches.data());
        CMapMat a(patches.data(), static_cast<Eigen::Index>(bs * P), static_cast<Eigen::Index>(ck));
        CMapMat gym(gy.data() + b0 * P * out_c_, static_cast<Eigen::Index>(bs * P), out_c_);
        gwm.noalias() += a.transpose() * gym;
        gbv.noalias() += gym.colwise().sum().transpose();
        MapMat gp(gpatches.data(), static_cast<Eigen::Index>(bs * P),
                  static_cast<Eigen::Index>(ck));
        gp.noalias() = gym * wm.transpose();
        float* gxd = gx.data();
        for (std::size_t s = 0; s < bs; ++s) {
            std::size_t base = (b0 + s) * P;
            for (std::size_t p = 0; p < P; ++p) {
                const float* row = gpatches.data() + (s * P + p) * ck;
                for (std::size_t t = 0; t < taps; ++t) {
                    float* dst = gxd + (base + nbr_[t * P_ + p]) * in_c_;
                    const float* src = row + t * in_c_;
                    for (int c = 0; c < in_c_; ++c) dst[c] += src[c];
                }
            }
        }
    }
    return gx;
}

BatchNorm::BatchNorm(int channels) : c_(channels) {
    auto c = static_cast<std::size_t>(channels);
    gamma = Tensor({c});
    gamma.fill(1.0f);
    beta = Tensor({c});
    ggamma = Tensor({c});
    gbeta = Tensor({c});
    run_mean = Tensor({c});
    run_var = Tensor({c});
    run_var.fill(1.0f);
    invstd_.resize(c);
}

Tensor BatchNorm::forward(const Tensor& x) {
    if (x.rank() != 3 || x.dim(2) != static_cast<std::size_t>(c_))
        throw std::invalid_argument("batchnorm: bad input shape");
    std::size_t rows = x.dim(0) * x.dim(1);
    std::vector<double> mean(c_, 0.0), var(c_, 0.0);
    if (training) {
        const float* xd = x.data();
        for (std::size_t r = 0; r < rows; ++r)
            for (int c = 0; c < c_; ++c) mean[c] += xd[r * c_ + c];
        for (int c = 0; c < c_; ++c) mean[c] /= static_cast<double>(rows);
        for (std::size_t r = 0; r < rows; ++r)
            for (int c = 0; c < c_; ++c) {
                double d = xd[r * c_ + c] - mean[c];
                var[c] += d * d;
            }
        for (int c = 0; c < c_; ++c) var[c] /= static_cast<double>(rows);
        double unbias = rows > 1 ? static_cast<double>(rows) / (rows - 1) : 1.0;
        for (int c = 0; c < c_; ++c) {
            run_mean[c] = (1.0f - momentum) * run_mean[c] +
                          momentum * static_cast<float>(mean[c]);
            run_var[c] = (1.0f - momentum) * run_var[c] +
                         momentum * static_cast<float>(var[c] * unbias);
        }
    } else {
        for (int c = 0; c < c_; ++c) {
            mean[c] = run_mean[c];
            var[c] = run_var[c];
        }
    }
    for (int c = 0; c < c_; ++c)
        invstd_[c] = static_cast<float>(1.0 / std::sqrt(var[c] + eps));

    xhat_ = Tensor(x.shape());
    Tensor y(x.shape());
    const float* xd = x.data();
    float* hd = xhat_.data();
    float* yd = y.data();
    for (std::size_t r = 0; r < rows; ++r)
        for (int c = 0; c < c_; ++c) {
            float h = (xd[r * c_ + c] - static_cast<float>(mean[c])) * invstd_[c];
            hd[r * c_ + c] = h;
            yd[r * c_ + c] = gamma[c] * h + beta[c];
        }
    return y;
}

Tensor BatchNorm::backward(const Tensor& gy) {
    if (!gy.same_shape(xhat_)) throw std::invalid_argument("batchnorm: bad gradient shape");
    std::size_t rows = gy.dim(0) * gy.dim(1);
    const float* gyd = gy.data();
    const float* hd = xhat_.data();
    Tensor gx(gy.shape());
    std::vector<double> s1(c_, 0.0), s2(c_, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
        for (int c = 0; c < c_; ++c) {
            double g = gyd[r * c_ + c];
            s1[c] += g;
            s2[c] += g * hd[r * c_ + c];
        }
    for (int c = 0; c < c_; ++c) {
        gbeta[c] += static_cast<float>(s1[c]);
        ggamma[c] += static_cast<float>(s2[c]);
    }
    float* gxd = gx.data();
    if (training) {
        double n = static_cast<double>(rows);
        for (std::size_t r = 0; r < rows; ++r)
            for (int c = 0; c < c_; ++c) {
                double g = gyd[r * c_ + c];
                gxd[r * c_ + c] = static_cast<float>(
                    gamma[c] * invstd_[c] * (g - s1[c] / n - hd[r * c_ + c] * s2[c] / n));
            }
    } else {
        for (std::size_t r = 0; r < rows; ++r)
            for (int c = 0; c < c_; ++c)
                gxd[r * c_ + c] = gyd[r * c_ + c] * gamma[c] * invstd_[c];
    }
    return gx;
}

Tensor Gelu::forward(const Tensor& x) {
    x_ = x;
    Tensor y(x.shape());
    for (std::size_t i = 0; i < x.numel(); ++i) {
        float v = x[i];
        y[i] = 0.5f * v * (1.0f + std::erf(v * 0.70710678f));
    }
    return y;
}

Tensor Gelu::backward(const Tensor& gy) {
    if (!gy.same_shape(x_)) throw std::invalid_argument("gelu: bad gradient shape");
    Tensor gx(gy.shape());
    constexpr float inv_sqrt_2pi = 0.3989423f;
    for (std::size_t i = 0; i < gy.numel(); ++i) {
        float v = x_[i];
        float cdf = 0.5f * (1.0f + std::erf(v * 0.70710678f));
        float pdf = inv_sqrt_2pi * std::exp(-0.5f * v * v);
        gx[i] = gy[i] * (cdf + v * pdf);
    }
    return gx;
}

WideResBlock::WideResBlock(int in_c, int out_c, int stages, int k) : proj(in_c, out_c, 1) {
    if (stages < 1) throw std::invalid_argument("block: need at least one stage");
    for (int s = 0; s < stages; ++s) {
        convs.emplace_back(s == 0 ? in_c : out_c, out_c, k);
        norms.emplace_back(out_c);
        acts.emplace_back();
    }
}

Tensor WideResBlock::forward(const Tensor& x) {
    Tensor t = x;
    for (std::size_t s = 0; s < convs.size(); ++s)
        t = acts[s].forward(norms[s].forward(convs[s].forward(t)));
    return add(t, proj.forward(x));
}

Tensor WideResBlock::backward(const Tensor& gy) {
    Tensor g = gy;
    for (std::size_t s = convs.size(); s-- > 0;)
        g = convs[s].backward(norms[s].backward(acts[s].backward(g)));
    return add(g, proj.backward(gy));
}

std::vector<int> default_channels(int L) {
    return L <= 3 ? std::vector<int>{32, 16, 16} : std::vector<int>{128, 64, 64};
}

Network::Network(NetworkConfig cfg) : head(1, 1, 1), cfg_(std::move(cfg)) {
    if (cfg_.channels.empty()) throw std::invalid_argument("network: empty channel list");
    int in = cfg_.in_channels;
    for (int c : cfg_.channels) {
        blocks.emplace_back(in, c, cfg_.stages, cfg_.kernel);
        in = c;
    }
    head = Conv3d(in, cfg_.n_classes, 1);
}

void Network::init(Rng& rng) {
    auto fill_conv = [&rng](Conv3d& conv) {
        // kaiming-normal with leaky slope 0.01, biases start flat
        float std = std::sqrt(2.0f / ((1.0f + 0.01f * 0.01f) * conv.fan_in()));
        for (std::size_t i = 0; i < conv.w.numel(); ++i)
            conv.w[i] = static_cast<float>(rng.gaussian()) * std;
        conv.b.fill(0.0f);
    };
    for (auto& block : blocks) {
        for (auto& conv : block.convs) fill_conv(conv);
        fill_conv(block.proj);
        for (auto& bn : block.norms) {
            bn.gamma.fill(1.0f);
            bn.beta.fill(0.0f);
            bn.run_mean.fill(0.0f);
            bn.run_var.fill(1.0f);
        }
    }
    fill_conv(head);
}

void Network::set_training(bool on) {
    for (auto& block : blocks)
        for (auto& bn : block.norms) bn.training = on;
}

void Network::zero_grad() {
    for (auto& p : params()) p.grad->fill(0.0f);
}

std::vector<Param> Network::params() {
    std::vector<Param> out;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        auto& blk = blocks[i];
        std::string base = "block" + std::to_string(i) + ".";
        for (std::size_t s = 0; s < blk.convs.size(); ++s) {
            std::string cs = base + "conv" + std::to_string(s) + ".";
            out.push_back({cs + "w", &blk.convs[s].w, &blk.convs[s].gw});
            out.push_back({cs + "b", &blk.convs[s].b, &blk.convs[s].gb});
            std::string bs = base + "bn" + std::to_string(s) + ".";
            out.push_back({bs + "gamma", &blk.norms[s].gamma, &blk.norms[s].ggamma});
            out.push_back({bs + "beta", &blk.norms[s].beta, &blk.norms[s].gbeta});
        }
        out.push_back({base + "proj.w", &blk.proj.w, &blk.proj.gw});
        out.push_back({base + "proj.b", &blk.proj.b, &blk.proj.gb});
    }
    out.push_back({"head.w", &head.w, &head.gw});
    out.push_back({"head.b", &head.b, &head.gb});
    return out;
}

std::vector<Param> Network::buffers() {
    std::vector<Param> out;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        auto& blk = blocks[i];
        for (std::size_t s = 0; s < blk.norms.size(); ++s) {
            std::string bs = "block" + std::to_string(i) + ".bn" + std::to_string(s) + ".";
            out.push_back({bs + "run_mean", &blk.norms[s].run_mean, nullptr});
            out.push_back({bs + "run_var", &blk.norms[s].run_var, nullptr});
        }
    }
    return out;
}

Tensor Network::softmax_forward(const Tensor& scores) {
    Tensor probs(scores.shape());
    std::size_t rows = scores.dim(0) * scores.dim(1);
    int c = static_cast<int>(scores.dim(2));
    const float* sd = scores.data();
    float* pd = probs.data();
    for (std::size_t r = 0; r < rows; ++r) {
        const float* row = sd + r * c;
        float* out = pd + r * c;
        float mx = row[0];
        for (int i = 1; i < c; ++i) mx = std::max(mx, row[i]);
        double sum = 0.0;
        for (int i = 0; i < c; ++i) {
            out[i] = std::exp(row[i] - mx);
            sum += out[i];
        }
        float inv = static_cast<float>(1.0 / sum);
        for (int i = 0; i < c; ++i) out[i] *= inv;
    }
    return probs;
}

Tensor Network::softmax_backward(const Tensor& gprobs) {
    Tensor gscores(gprobs.shape());
    std::size_t rows = gprobs.dim(0) * gprobs.dim(1);
    int c = static_cast<int>(gprobs.dim(2));
    const float* gp = gprobs.data();
    const float* pd = probs_.data();
    float* gs = gscores.data();
    for (std::size_t r = 0; r < rows; ++r) {
        double dot = 0.0;
        for (int i = 0; i < c; ++i) dot += double(gp[r * c + i]) * pd[r * c + i];
        for (int i = 0; i < c; ++i)
            gs[r * c + i] = pd[r * c + i] * (gp[r * c + i] - static_cast<float>(dot));
    }
    return gscores;
}

Tensor Network::position_probs(const Tensor& x) {
    Tensor t = x;
    for (auto& block : blocks) t = block.forward(t);
    probs_ = softmax_forward(head.forward(t));
    return probs_;
}

Tensor Network::pool(const Tensor& probs, const std::uint8_t* masks) const {
    std::size_t B = probs.dim(0), P = probs.dim(1);
    unsigned c = static_cast<unsigned>(probs.dim(2));
    Tensor pooled({B, c});
    const float* pd = probs.data();
    float* od = pooled.data();
    float inv = 1.0f / static_cast<float>(P);
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t p = 0; p < P; ++p) {
            const float* row = pd + (b * P + p) * c;
            unsigned m = masks ? masks[b * P + p] : 0u;
            float* out = od + b * c;
            for (unsigned j = 0; j < c; ++j) out[j] += row[j ^ m];
        }
    for (std::size_t i = 0; i < pooled.numel(); ++i) od[i] *= inv;
    return pooled;
}

Tensor Network::forward(const Tensor& x, const std::uint8_t* masks) {
    return pool(position_probs(x), masks);
}

Tensor Network::backward(const Tensor& gpooled, const std::uint8_t* masks) {
    std::size_t B = probs_.dim(0), P = probs_.dim(1);
    unsigned c = static_cast<unsigned>(probs_.dim(2));
    Tensor gprobs(probs_.shape());
    const float* gd = gpooled.data();
    float* gp = gprobs.data();
    float inv = 1.0f / static_cast<float>(P);
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t p = 0; p < P; ++p) {
            unsigned m = masks ? masks[b * P + p] : 0u;
            float* row = gp + (b * P + p) * c;
            const float* src = gd + b * c;
            for (unsigned j = 0; j < c; ++j) row[j] = src[j ^ m] * inv;
        }
    Tensor g = softmax_backward(gprobs);
    g = head.backward(g);
    for (std::size_t i = blocks.size(); i-- > 0;) g = blocks[i].backward(g);
    return g;
}

}  // namespace toric
