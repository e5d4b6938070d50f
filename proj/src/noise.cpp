#include "noise.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace toric {

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    gen_.seed(seq);
}

double Rng::uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

double Rng::gaussian() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double th = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(th);
    have_spare_ = true;
    return r * std::cos(th);
}

PauliError sample_error(const Code& code, double p, Rng& rng) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("sample_error: p outside [0,1]");
    std::size_t n = code.n_qubits();
    PauliError e{BitVec(n), BitVec(n)};
    for (std::size_t q = 0; q < n; ++q) {
        double u = rng.uniform();
        if (u < 1.0 - p) continue;
        int k = std::min(2, static_cast<int>(3.0 * (u - (1.0 - p)) / p));
        if (k != 1) e.x.set(q, true);
        if (k != 0) e.z.set(q, true);
    }
    return e;
}

BitVec extract_syndrome(const Code& code, const PauliError& e) {
    BitVec s(code.syndrome_bits());
    BitVec f = code.face_checks * e.x;
    BitVec v = code.vertex_checks * e.z;
    for (auto i : f.support()) s.set(i, true);
    std::size_t off = code.n_face();
    for (auto i : v.support()) s.set(off + i, true);
    return s;
}

unsigned logical_label(const Code& code, const PauliError& e) {
    unsigned label = 0;
    for (int t = 0; t < code.dim; ++t) {
        if (code.x_logicals.row(t).dot(e.z)) label |= 1u << t;
        if (code.z_logicals.row(t).dot(e.x)) label |= 1u << (code.dim + t);
    }
    return label;
}

void write_channels(const Code& code, const BitVec& syndrome, float* dst) {
    if (syndrome.size() != code.syndrome_bits())
        throw std::invalid_argument("write_channels: syndrome size mismatch");
    std::size_t v = code.volume();
    std::size_t face_blocks = code.n_face() / v;
    for (std::size_t c = 0; c <= face_blocks; ++c) {
        std::size_t base = c < face_blocks ? c * v : code.n_face();
        for (std::size_t i = 0; i < v; ++i) dst[c * v + i] = syndrome.get(base + i) ? 1.0f : 0.0f;
    }
}

std::size_t n_channels(const Code& code) { return code.n_face() / code.volume() + 1; }

void write_channels_last(const Code& code, const BitVec& syndrome, float* dst) {
    if (syndrome.size() != code.syndrome_bits())
        throw std::invalid_argument("write_channels_last: syndrome size mismatch");
    std::size_t v = code.volume();
    std::size_t nc = n_channels(code);
    for (std::size_t c = 0; c < nc; ++c) {
        std::size_t base = c + 1 < nc ? c * v : code.n_face();
        for (std::size_t i = 0; i < v; ++i)
            dst[i * nc + c] = syndrome.get(base + i) ? 1.0f : 0.0f;
    }
}

Tensor to_channels(const Code& code, const BitVec& syndrome) {
    std::size_t l = static_cast<std::size_t>(code.L);
    std::vector<std::size_t> shape{n_channels(code)};
    for (int i = 0; i < code.dim; ++i) shape.push_back(l);
    Tensor t(shape);
    write_channels(code, syndrome, t.data());
    return t;
}

std::string syndrome_hex(const BitVec& syndrome) {
    std::size_t nbytes = (syndrome.size() + 7) / 8;
    std::string out(nbytes * 2, '0');
    for (std::size_t b = 0; b < nbytes; ++b) {
        unsigned byte = 0;
        for (std::size_t i = 0; i < 8; ++i) {
            std::size_t bit = b * 8 + i;
            if (bit < syndrome.size() && syndrome.get(bit)) byte |= 1u << i;
        }
        static const char* hexd = "0123456789abcdef";
        out[b * 2] = hexd[byte >> 4];
        out[b * 2 + 1] = hexd[byte & 15];
    }
    return out;
}

void dump_dataset_csv(const Code& code, double p, long n_samples, std::uint64_t seed,
                      std::uint64_t stream, std::ostream& out) {
    Rng rng(seed, stream);
    out << "seed,stream,sample_idx,p,label_index,syndrome_hex\n";
    char pbuf[32];
    std::snprintf(pbuf, sizeof pbuf, "%.9g", p);
    for (long i = 0; i < n_samples; ++i) {
        PauliError e = sample_error(code, p, rng);
        out << seed << ',' << stream << ',' << i << ',' << pbuf << ','
            << logical_label(code, e) << ',' << syndrome_hex(extract_syndrome(code, e)) << '\n';
    }
}

void dump_dataset_csv(const Code& code, double p, long n_samples, std::uint64_t seed,
                      std::uint64_t stream, const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("dataset dump: cannot open " + path);
    dump_dataset_csv(code, p, n_samples, seed, stream, f);
    if (!f) throw std::runtime_error("dataset dump: write failed for " + path);
}

}  // namespace toric
