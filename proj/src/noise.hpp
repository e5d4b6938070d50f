#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>

#include "bitlin.hpp"
#include "code.hpp"
#include "tensor.hpp"

namespace toric {

// Deterministic stream generator keyed by (seed, stream). The engine is a
// fixed, fully specified algorithm, and uniform/gaussian conversion is done
// here rather than through library distributions, so two builds produce the
// same draws. Parallel consumers get distinct streams instead of sharing one.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t bits() { return gen_(); }
    double uniform();   // [0, 1), 53-bit
    double gaussian();  // standard normal

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// X/Z support pair; an XZ entry on a qubit sets both bits
struct PauliError {
    BitVec x, z;
};

// i.i.d. depolarizing channel: each qubit stays clean with probability 1-p,
// otherwise picks X, Z, or XZ uniformly
PauliError sample_error(const Code& code, double p, Rng& rng);

// [face bits ; vertex bits]; face checks see e.x, vertex checks see e.z
BitVec extract_syndrome(const Code& code, const PauliError& e);

// class index with bit t = overlap parity of e.z with the t-th X membrane
// and bit dim+t = overlap parity of e.x with the t-th Z loop
unsigned logical_label(const Code& code, const PauliError& e);

// syndrome reshaped to channels over the lattice volume: one channel per
// face block (3 in 3D, 1 in 2D), plus a final channel of vertex bits
std::size_t n_channels(const Code& code);
void write_channels(const Code& code, const BitVec& syndrome, float* dst);
Tensor to_channels(const Code& code, const BitVec& syndrome);
// same data, channels-last: dst[position * n_channels + channel]
void write_channels_last(const Code& code, const BitVec& syndrome, float* dst);

std::string syndrome_hex(const BitVec& syndrome);

void dump_dataset_csv(const Code& code, double p, long n_samples, std::uint64_t seed,
                      std::uint64_t stream, std::ostream& out);
void dump_dataset_csv(const Code& code, double p, long n_samples, std::uint64_t seed,
                      std::uint64_t stream, const std::string& path);

}  // namespace toric
