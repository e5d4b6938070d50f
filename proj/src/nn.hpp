#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace toric {

class Rng;

// Activations are channels-last: [batch, positions, channels] with
// positions = L^3 in lattice order. That makes the per-position softmax and
// the convolution patch gather contiguous, and it keeps the network fully
// convolutional: the same weights run at any L.

// Periodic 3D convolution (cross-correlation). Weights live in patch order,
// shape [k, k, k, in_c, out_c], so the inner GEMM is a plain row-major
// product against gathered patches.
class Conv3d {
public:
    Conv3d(int in_c, int out_c, int k);

    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& gy);

    int in_c() const { return in_c_; }
    int out_c() const { return out_c_; }
    int kernel() const { return k_; }
    std::size_t fan_in() const { return static_cast<std::size_t>(k_) * k_ * k_ * in_c_; }

    Tensor w, b, gw, gb;

private:
    void ensure_geometry(int L);
    void gather_patches(const Tensor& x, std::size_t b0, std::size_t bs, float* out) const;

    int in_c_, out_c_, k_;
    int L_ = -1;
    std::size_t P_ = 0;
    std::vector<std::int32_t> nbr_;  // [tap * P + p] -> neighbor position
    Tensor x_;                       // cached input for backward
};

// Per-channel batch normalization over batch x positions. Training mode uses
// batch statistics (biased variance) and tracks running stats with momentum
// 0.1 and an unbiased variance update; eval mode applies the running stats.
class BatchNorm {
public:
    explicit BatchNorm(int channels);

    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& gy);

    int channels() const { return c_; }

    bool training = false;
    float momentum = 0.1f;
    float eps = 1e-5f;
    Tensor gamma, beta, ggamma, gbeta;
    Tensor run_mean, run_var;

private:
    int c_;
    Tensor xhat_;
    std::vector<float> invstd_;
};

// exact GELU, x * Phi(x)
class Gelu {
public:
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& gy);

private:
    Tensor x_;
};

// Residual block: a projection shortcut (1x1x1 conv) added to a main path
// of `stages` repetitions of [conv k -> batchnorm -> gelu].
class WideResBlock {
public:
    WideResBlock(int in_c, int out_c, int stages, int k);

    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& gy);

    std::vector<Conv3d> convs;
    std::vector<BatchNorm> norms;
    std::vector<Gelu> acts;
    Conv3d proj;
};

enum class HeadKind { Gap, GapT };

struct NetworkConfig {
    int in_channels = 4;
    int n_classes = 64;
    std::vector<int> channels = {128, 64, 64};
    int stages = 3;
    int kernel = 3;
    HeadKind head = HeadKind::GapT;
};

// paper-scale channels for real lattices, desk scale for L <= 3
std::vector<int> default_channels(int L);

struct Param {
    std::string name;
    Tensor* value;
    Tensor* grad;
};

// Trunk + per-position class scores + per-position softmax, then a pooling
// head. Plain pooling averages the position distributions as they are; the
// equivariant head permutes each position's distribution by its pooling
// mask before averaging, so the pooled prediction transforms correctly
// under lattice translations of the syndrome.
class Network {
public:
    explicit Network(NetworkConfig cfg);

    void init(Rng& rng);  // kaiming-normal weights, unit batchnorm
    void set_training(bool on);
    void zero_grad();
    std::vector<Param> params();         // trainable
    std::vector<Param> buffers();        // batchnorm running stats

    // masks: nullptr or [B * positions] class-xor masks, one per position
    Tensor position_probs(const Tensor& x);                       // [B, P, C]
    Tensor pool(const Tensor& probs, const std::uint8_t* masks) const;  // [B, C]
    Tensor forward(const Tensor& x, const std::uint8_t* masks);
    // gradient of the scalar loss w.r.t. pooled probabilities in, input out
    Tensor backward(const Tensor& gpooled, const std::uint8_t* masks);

    const NetworkConfig& config() const { return cfg_; }
    std::vector<WideResBlock> blocks;
    Conv3d head;

private:
    Tensor softmax_forward(const Tensor& scores);
    Tensor softmax_backward(const Tensor& gprobs);

    NetworkConfig cfg_;
    Tensor probs_;  // cached per-position distributions
};

}  // namespace toric
