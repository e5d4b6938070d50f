#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bitlin.hpp"
#include "code.hpp"
#include "equivariance.hpp"
#include "nn.hpp"

namespace toric {

struct DecodeResult {
    unsigned label = 0;
    std::vector<double> dist;  // normalized class distribution when available
    double seconds = 0.0;
    bool ok = true;
    std::string status;  // failure reason when not ok
};

// Frozen after construction; decode is a pure function of the syndrome.
// Ties on equal class mass break toward the lowest class index everywhere.
class Decoder {
public:
    virtual ~Decoder() = default;
    virtual std::string name() const = 0;
    virtual double train_error_rate() const { return 0.0; }
    virtual bool variable_L() const { return false; }
    virtual DecodeResult decode(const BitVec& syndrome) = 0;
    virtual std::vector<DecodeResult> decode_batch(const std::vector<BitVec>& syndromes);
};

// always answers class 0; the do-nothing baseline
class ConstantDecoder : public Decoder {
public:
    explicit ConstantDecoder(const Code& code);
    std::string name() const override { return "constant0"; }
    DecodeResult decode(const BitVec& syndrome) override;

private:
    unsigned n_classes_;
    std::size_t bits_;
};

// Trained network plus pooling-mask tables. The trunk is fully
// convolutional, so one set of weights serves any cubic lattice whose
// channel counts match; each decoder instance binds one code.
class NeuralDecoder : public Decoder {
public:
    NeuralDecoder(const Code& code, Network net, double p_train);
    std::string name() const override;
    double train_error_rate() const override { return p_train_; }
    bool variable_L() const override { return true; }
    DecodeResult decode(const BitVec& syndrome) override;
    std::vector<DecodeResult> decode_batch(const std::vector<BitVec>& syndromes) override;
    Network& net() { return net_; }

private:
    Code code_;
    Network net_;
    std::optional<FlipTables> tables_;
    double p_train_;
    std::size_t batch_cap_ = 512;
};

// Exact coset-mass decoder: tabulates every Pauli error at construction.
// 4^n table build limits it to tiny codes (n <= 8, the 2D L=2 instance).
class ExhaustiveMldDecoder : public Decoder {
public:
    ExhaustiveMldDecoder(const Code& code, double p);
    std::string name() const override { return "mld_exhaustive"; }
    double train_error_rate() const override { return p_; }
    DecodeResult decode(const BitVec& syndrome) override;
    // unnormalized per-class masses for one syndrome
    const double* masses(const BitVec& syndrome) const;

private:
    Code code_;
    double p_;
    unsigned n_classes_;
    std::vector<double> table_;
};

// Coset masses restricted to errors of weight <= w_max, enumerated in
// increasing weight. Stops a level early once the remaining enumeration
// mass cannot change the argmax; reports "no candidate" when nothing in
// the budget matches the syndrome.
class TruncatedMldDecoder : public Decoder {
public:
    // early_stop=false forces every weight level to be enumerated, making the
    // reported masses exact over the budget instead of argmax-sufficient
    TruncatedMldDecoder(const Code& code, double p, int w_max, bool early_stop = true);
    std::string name() const override { return "mld_truncated"; }
    double train_error_rate() const override { return p_; }
    DecodeResult decode(const BitVec& syndrome) override;

private:
    Code code_;
    double p_;
    int w_max_;
    bool early_stop_;
    unsigned n_classes_;
    std::vector<BitVec> col_[3];    // syndrome of X, Z, XZ on each qubit
    std::vector<unsigned> lab_[3];  // matching label masks
    std::vector<double> level_prob_;  // per-error probability at each weight
    std::vector<double> tail_;        // total mass of every error heavier than w
};

}  // namespace toric
