#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "code.hpp"
#include "nn.hpp"

namespace toric {

// loss weight per class from cumulative counts: n_seen / (count_j * n_classes)
std::vector<float> class_weights(const std::vector<std::uint64_t>& counts,
                                 std::uint64_t n_seen);

// Running class counts for the weighted loss. Counts start at one so a class
// never seen keeps a finite, maximal weight; update with each batch's labels
// before reading the weights.
class ClassWeightTracker {
public:
    explicit ClassWeightTracker(unsigned n_classes);
    void update(const std::vector<unsigned>& labels);
    std::vector<float> weights() const;
    std::uint64_t seen() const { return seen_; }

private:
    std::vector<std::uint64_t> counts_;
    std::uint64_t seen_ = 0;
};

// mean over the batch of -w[y] * ln(pooled[y] + 1e-9); fills the gradient
// w.r.t. the pooled distributions
double weighted_cross_entropy(const Tensor& pooled, const std::vector<unsigned>& labels,
                              const std::vector<float>& weights, Tensor& gpooled);

// Two-phase cosine schedule on [0, total]: starts at max_lr / 25, peaks at
// max_lr after 30% of the steps, anneals to max_lr / 1e4 at the end.
double onecycle_lr(std::size_t step, std::size_t total_steps, double max_lr);

// Adam with decoupled weight decay on every parameter
class AdamW {
public:
    explicit AdamW(std::vector<Param> params, double weight_decay, double beta1 = 0.9,
                   double beta2 = 0.999, double eps = 1e-8);
    void step(double lr);

private:
    std::vector<Param> params_;
    std::vector<std::vector<float>> m_, v_;
    double wd_, b1_, b2_, eps_;
    long t_ = 0;
};

struct TrainConfig {
    int L = 3;
    int dim = 3;
    double p_train = 0.01;
    std::uint64_t seed = 0;
    std::size_t batch = 512;
    std::size_t total_samples = 1000000;
    double max_lr = 0.1;
    double weight_decay = 0.05;
    int stages = 3;
    int kernel = 3;
    std::vector<int> channels;  // empty picks default_channels(L)
    HeadKind head = HeadKind::GapT;
};

NetworkConfig network_config(const Code& code, const TrainConfig& cfg);

struct TrainResult {
    Network net;
    std::vector<double> loss;  // per optimizer step
    std::vector<double> lr;
};

// Weights come from rng stream 0, data from stream 1, both keyed by the
// config seed. Runs floor(total_samples / batch) steps and leaves the
// network in eval mode.
TrainResult train(const Code& code, const TrainConfig& cfg);

void write_loss_csv(const TrainResult& r, std::ostream& out);
void write_loss_csv(const TrainResult& r, const std::string& path);

void save_checkpoint(const std::string& path, Network& net, const TrainConfig& cfg);

struct Checkpoint {
    Network net;
    TrainConfig cfg;
};
Checkpoint load_checkpoint(const std::string& path);

}  // namespace toric
