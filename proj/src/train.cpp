#include "train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "container.hpp"
#include "equivariance.hpp"
#include "noise.hpp"

namespace toric {

std::vector<float> class_weights(const std::vector<std::uint64_t>& counts,
                                 std::uint64_t n_seen) {
    std::vector<float> w(counts.size());
    double c = static_cast<double>(counts.size());
    for (std::size_t j = 0; j < counts.size(); ++j) {
        if (counts[j] == 0) throw std::invalid_argument("class_weights: zero count");
        w[j] = static_cast<float>(static_cast<double>(n_seen) / (counts[j] * c));
    }
    return w;
}

ClassWeightTracker::ClassWeightTracker(unsigned n_classes) : counts_(n_classes, 1) {
    if (n_classes == 0) throw std::invalid_argument("tracker: no classes");
}

void ClassWeightTracker::update(const std::vector<unsigned>& labels) {
    for (unsigned l : labels) {
        if (l >= counts_.size()) throw std::invalid_argument("tracker: label out of range");
        ++counts_[l];
    }
    seen_ += labels.size();
}

std::vector<float> ClassWeightTracker::weights() const { return class_weights(counts_, seen_); }

double weighted_cross_entropy(const Tensor& pooled, const std::vector<unsigned>& labels,
                              const std::vector<float>& weights, Tensor& gpooled) {
    if (pooled.rank() != 2 || pooled.dim(0) != labels.size() ||
        pooled.dim(1) != weights.size())
        throw std::invalid_argument("weighted_ce: shape mismatch");
    std::size_t b = pooled.dim(0), c = pooled.dim(1);
    constexpr double eps = 1e-9;
    if (!gpooled.same_shape(pooled)) gpooled = Tensor(pooled.shape());
    gpooled.fill(0.0f);
    double loss = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
        unsigned y = labels[i];
        double p = pooled[i * c + y] + eps;
        loss -= weights[y] * std::log(p);
        gpooled[i * c + y] = static_cast<float>(-double(weights[y]) / (p * double(b)));
    }
    return loss / static_cast<double>(b);
}

double onecycle_lr(std::size_t step, std::size_t total_steps, double max_lr) {
    if (total_steps == 0) throw std::invalid_argument("onecycle: no steps");
    double s = static_cast<double>(std::min(step, total_steps));
    double peak = 0.3 * static_cast<double>(total_steps);
    double start = max_lr / 25.0, floor = max_lr / 1e4;
    if (s <= peak) {
        double u = peak > 0.0 ? s / peak : 1.0;
        return start + (max_lr - start) * 0.5 * (1.0 - std::cos(std::numbers::pi * u));
    }
    double u = (s - peak) / (static_cast<double>(total_steps) - peak);
    return floor + (max_lr - floor) * 0.5 * (1.0 + std::cos(std::numbers::pi * u));
}

AdamW::AdamW(std::vector<Param> params, double weight_decay, double beta1, double beta2,
             double eps)
    : params_(std::move(params)), wd_(weight_decay), b1_(beta1), b2_(beta2), eps_(eps) {
    for (const auto& p : params_) {
        m_.emplace_back(p.value->numel(), 0.0f);
        v_.emplace_back(p.value->numel(), 0.0f);
    }
}

void AdamW::step(double lr) {
    ++t_;
    double bc1 = 1.0 - std::pow(b1_, t_);
    double bc2 = 1.0 - std::pow(b2_, t_);
    for (std::size_t i = 0; i < params_.size(); ++i) {
        Tensor& p = *params_[i].value;
        const Tensor& g = *params_[i].grad;
        auto& m = m_[i];
        auto& v = v_[i];
        for (std::size_t j = 0; j < p.numel(); ++j) {
            double gj = g[j];
            m[j] = static_cast<float>(b1_ * m[j] + (1.0 - b1_) * gj);
            v[j] = static_cast<float>(b2_ * v[j] + (1.0 - b2_) * gj * gj);
            double mhat = m[j] / bc1, vhat = v[j] / bc2;
            p[j] = static_cast<float>(p[j] - lr * (mhat / (std::sqrt(vhat) + eps_) +
                                                   wd_ * p[j]));
        }
    }
}

NetworkConfig network_config(const Code& code, const TrainConfig& cfg) {
    NetworkConfig nc;
    nc.in_channels = static_cast<int>(n_channels(code));
    nc.n_classes = static_cast<int>(code.n_classes());
    nc.channels = cfg.channels.empty() ? default_channels(cfg.L) : cfg.channels;
    nc.stages = cfg.stages;
    nc.kernel = cfg.kernel;
    nc.head = cfg.head;
    return nc;
}

TrainResult train(const Code& code, const TrainConfig& cfg) {
    if (code.L != cfg.L || code.dim != cfg.dim)
        throw std::invalid_argument("train: code does not match config");
    if (cfg.batch == 0 || cfg.total_samples < cfg.batch)
        throw std::invalid_argument("train: need at least one full batch");
    if (!(cfg.p_train >= 0.0 && cfg.p_train <= 1.0))
        throw std::invalid_argument("train: error rate out of range");

    Network net(network_config(code, cfg));
    Rng init_rng(cfg.seed, 0);
    net.init(init_rng);
    net.set_training(true);

    bool use_masks = cfg.head == HeadKind::GapT;
    FlipTables tables(code);

    std::size_t P = code.volume();
    std::size_t nc = n_channels(code);
    unsigned n_classes = static_cast<unsigned>(code.n_classes());
    std::size_t steps = cfg.total_samples / cfg.batch;

    Rng data_rng(cfg.seed, 1);
    ClassWeightTracker tracker(n_classes);
    AdamW opt(net.params(), cfg.weight_decay);

    Tensor x({cfg.batch, P, nc});
    Tensor gpooled;
    std::vector<std::uint8_t> masks(use_masks ? cfg.batch * P : 0);
    std::vector<unsigned> labels(cfg.batch);

    TrainResult out{std::move(net), {}, {}};
    out.loss.reserve(steps);
    out.lr.reserve(steps);

    for (std::size_t step = 0; step < steps; ++step) {
        for (std::size_t b = 0; b < cfg.batch; ++b) {
            PauliError e = sample_error(code, cfg.p_train, data_rng);
            BitVec s = extract_syndrome(code, e);
            labels[b] = logical_label(code, e);
            write_channels_last(code, s, x.data() + b * P * nc);
            if (use_masks) tables.pooling_masks(s, masks.data() + b * P);
        }
        tracker.update(labels);
        std::vector<float> w = tracker.weights();

        const std::uint8_t* mp = use_masks ? masks.data() : nullptr;
        Tensor pooled = out.net.forward(x, mp);
        double loss = weighted_cross_entropy(pooled, labels, w, gpooled);
        out.net.zero_grad();
        out.net.backward(gpooled, mp);
        double lr = onecycle_lr(step, steps, cfg.max_lr);
        opt.step(lr);

        out.loss.push_back(loss);
        out.lr.push_back(lr);
    }
    out.net.set_training(false);
    return out;
}

void write_loss_csv(const TrainResult& r, std::ostream& out) {
    out << "step,lr,loss\n";
    char buf[96];
    for (std::size_t i = 0; i < r.loss.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.9g,%.9g\n", i, r.lr[i], r.loss[i]);
        out << buf;
    }
}

void write_loss_csv(const TrainResult& r, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    write_loss_csv(r, f);
}

namespace {

Tensor scalar_tensor(double v) { return Tensor::scalar(static_cast<float>(v)); }

// 16-bit limbs, low first; exact for any 64-bit value
Tensor seed_tensor(std::uint64_t seed) {
    Tensor t({4});
    for (int i = 0; i < 4; ++i) t[i] = static_cast<float>((seed >> (16 * i)) & 0xffffu);
    return t;
}

std::uint64_t seed_from_tensor(const Tensor& t) {
    if (t.numel() != 4) throw std::runtime_error("checkpoint: bad seed record");
    std::uint64_t s = 0;
    for (int i = 0; i < 4; ++i)
        s |= static_cast<std::uint64_t>(static_cast<std::uint32_t>(t[i])) << (16 * i);
    return s;
}

int meta_int(const NamedTensors& ts, const std::string& name) {
    return static_cast<int>(must_tensor(ts, name)[0]);
}

}  // namespace

void save_checkpoint(const std::string& path, Network& net, const TrainConfig& cfg) {
    const NetworkConfig& nc = net.config();
    NamedTensors ts;
    ts.emplace_back("meta.version", scalar_tensor(1));
    ts.emplace_back("meta.dim", scalar_tensor(cfg.dim));
    ts.emplace_back("meta.train_L", scalar_tensor(cfg.L));
    ts.emplace_back("meta.head", scalar_tensor(nc.head == HeadKind::GapT ? 1 : 0));
    ts.emplace_back("meta.in_channels", scalar_tensor(nc.in_channels));
    ts.emplace_back("meta.n_classes", scalar_tensor(nc.n_classes));
    ts.emplace_back("meta.stages", scalar_tensor(nc.stages));
    ts.emplace_back("meta.kernel", scalar_tensor(nc.kernel));
    Tensor ch({nc.channels.size()});
    for (std::size_t i = 0; i < nc.channels.size(); ++i)
        ch[i] = static_cast<float>(nc.channels[i]);
    ts.emplace_back("meta.channels", std::move(ch));
    ts.emplace_back("meta.p_train", scalar_tensor(cfg.p_train));
    ts.emplace_back("meta.seed", seed_tensor(cfg.seed));
    ts.emplace_back("meta.batch", scalar_tensor(static_cast<double>(cfg.batch)));
    ts.emplace_back("meta.total_samples",
                    scalar_tensor(static_cast<double>(cfg.total_samples)));
    ts.emplace_back("meta.max_lr", scalar_tensor(cfg.max_lr));
    ts.emplace_back("meta.weight_decay", scalar_tensor(cfg.weight_decay));
    for (const auto& p : net.params()) ts.emplace_back(p.name, *p.value);
    for (const auto& b : net.buffers()) ts.emplace_back(b.name, *b.value);
    write_tensor_file(path, ts);
}

Checkpoint load_checkpoint(const std::string& path) {
    NamedTensors ts = read_tensor_file(path);
    if (meta_int(ts, "meta.version") != 1)
        throw std::runtime_error("checkpoint: unsupported version");

    TrainConfig cfg;
    cfg.dim = meta_int(ts, "meta.dim");
    cfg.L = meta_int(ts, "meta.train_L");
    cfg.head = meta_int(ts, "meta.head") ? HeadKind::GapT : HeadKind::Gap;
    cfg.stages = meta_int(ts, "meta.stages");
    cfg.kernel = meta_int(ts, "meta.kernel");
    const Tensor& ch = must_tensor(ts, "meta.channels");
    for (std::size_t i = 0; i < ch.numel(); ++i)
        cfg.channels.push_back(static_cast<int>(ch[i]));
    cfg.p_train = must_tensor(ts, "meta.p_train")[0];
    cfg.seed = seed_from_tensor(must_tensor(ts, "meta.seed"));
    cfg.batch = static_cast<std::size_t>(must_tensor(ts, "meta.batch")[0]);
    cfg.total_samples = static_cast<std::size_t>(must_tensor(ts, "meta.total_samples")[0]);
    cfg.max_lr = must_tensor(ts, "meta.max_lr")[0];
    cfg.weight_decay = must_tensor(ts, "meta.weight_decay")[0];

    NetworkConfig nc;
    nc.in_channels = meta_int(ts, "meta.in_channels");
    nc.n_classes = meta_int(ts, "meta.n_classes");
    nc.channels = cfg.channels;
    nc.stages = cfg.stages;
    nc.kernel = cfg.kernel;
    nc.head = cfg.head;

    Checkpoint ck{Network(nc), cfg};
    auto restore = [&ts](const Param& p) {
        const Tensor& t = must_tensor(ts, p.name);
        if (!t.same_shape(*p.value))
            throw std::runtime_error("checkpoint: shape mismatch for " + p.name);
        *p.value = t;
    };
    for (const auto& p : ck.net.params()) restore(p);
    for (const auto& b : ck.net.buffers()) restore(b);
    ck.net.set_training(false);
    return ck;
}

}  // namespace toric
