#include "decoders.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "noise.hpp"

namespace toric {

namespace {

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

unsigned argmax_lowest(const double* v, unsigned n) {
    unsigned best = 0;
    for (unsigned i = 1; i < n; ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

void check_syndrome_size(const BitVec& s, std::size_t bits, const char* who) {
    if (s.size() != bits)
        throw std::invalid_argument(std::string(who) + ": syndrome size mismatch");
}

}  // namespace

std::vector<DecodeResult> Decoder::decode_batch(const std::vector<BitVec>& syndromes) {
    std::vector<DecodeResult> out;
    out.reserve(syndromes.size());
    for (const auto& s : syndromes) out.push_back(decode(s));
    return out;
}

ConstantDecoder::ConstantDecoder(const Code& code)
    : n_classes_(static_cast<unsigned>(code.n_classes())), bits_(code.syndrome_bits()) {}

DecodeResult ConstantDecoder::decode(const BitVec& syndrome) {
    check_syndrome_size(syndrome, bits_, "constant decoder");
    DecodeResult r;
    r.label = 0;
    r.dist.assign(n_classes_, 0.0);
    r.dist[0] = 1.0;
    return r;
}

NeuralDecoder::NeuralDecoder(const Code& code, Network net, double p_train)
    : code_(code), net_(std::move(net)), p_train_(p_train) {
    if (code_.dim != 3)
        throw std::invalid_argument("neural decoder: positions must form a cubic lattice");
    if (net_.config().in_channels != static_cast<int>(n_channels(code_)))
        throw std::invalid_argument("neural decoder: input channel mismatch");
    if (net_.config().n_classes != code_.n_classes())
        throw std::invalid_argument("neural decoder: class count mismatch");
    net_.set_training(false);
    if (net_.config().head == HeadKind::GapT) tables_.emplace(code_);
}

std::string NeuralDecoder::name() const {
    return net_.config().head == HeadKind::GapT ? "neural_gapt" : "neural_gap";
}

DecodeResult NeuralDecoder::decode(const BitVec& syndrome) {
    return decode_batch({syndrome}).front();
}

std::vector<DecodeResult> NeuralDecoder::decode_batch(const std::vector<BitVec>& syndromes) {
    std::size_t n = syndromes.size();
    std::size_t P = code_.volume(), nc = n_channels(code_);
    unsigned classes = static_cast<unsigned>(code_.n_classes());
    std::vector<DecodeResult> out(n);
    for (std::size_t i0 = 0; i0 < n; i0 += batch_cap_) {
        std::size_t bs = std::min(batch_cap_, n - i0);
        double t0 = now_seconds();
        Tensor x({bs, P, nc});
        std::vector<std::uint8_t> masks(tables_ ? bs * P : 0);
        for (std::size_t i = 0; i < bs; ++i) {
            const BitVec& s = syndromes[i0 + i];
            check_syndrome_size(s, code_.syndrome_bits(), "neural decoder");
            write_channels_last(code_, s, x.data() + i * P * nc);
            if (tables_) tables_->pooling_masks(s, masks.data() + i * P);
        }
        Tensor pooled = net_.forward(x, tables_ ? masks.data() : nullptr);
        double per = (now_seconds() - t0) / static_cast<double>(bs);
        for (std::size_t i = 0; i < bs; ++i) {
            DecodeResult& r = out[i0 + i];
            const float* row = pooled.data() + i * classes;
            r.dist.assign(row, row + classes);
            double best = r.dist[0];
            r.label = 0;
            for (unsigned c = 1; c < classes; ++c)
                if (r.dist[c] > best) {
                    best = r.dist[c];
                    r.label = c;
                }
            r.seconds = per;
        }
    }
    return out;
}

ExhaustiveMldDecoder::ExhaustiveMldDecoder(const Code& code, double p)
    : code_(code), p_(p), n_classes_(static_cast<unsigned>(code.n_classes())) {
    std::size_t n = code_.n_qubits();
    if (n > 8)
        throw std::invalid_argument("exhaustive mld: only feasible up to 8 qubits");
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("exhaustive mld: error rate out of range");
    std::size_t bits = code_.syndrome_bits();
    if (bits > 20) throw std::invalid_argument("exhaustive mld: syndrome too wide");
    table_.assign((std::size_t(1) << bits) * n_classes_, 0.0);

    std::vector<double> pw(n + 1);
    for (std::size_t w = 0; w <= n; ++w)
        pw[w] = std::pow(p / 3.0, double(w)) * std::pow(1.0 - p, double(n - w));

    std::size_t total = std::size_t(1) << n;
    for (std::size_t ex = 0; ex < total; ++ex)
        for (std::size_t ez = 0; ez < total; ++ez) {
            PauliError e{BitVec(n), BitVec(n)};
            for (std::size_t q = 0; q < n; ++q) {
                if (ex >> q & 1) e.x.set(q, true);
                if (ez >> q & 1) e.z.set(q, true);
            }
            std::size_t w = std::popcount(ex | ez);
            BitVec s = extract_syndrome(code_, e);
            std::size_t idx = 0;
            for (std::size_t b = 0; b < bits; ++b)
                if (s.get(b)) idx |= std::size_t(1) << b;
            table_[idx * n_classes_ + logical_label(code_, e)] += pw[w];
        }
}

const double* ExhaustiveMldDecoder::masses(const BitVec& syndrome) const {
    check_syndrome_size(syndrome, code_.syndrome_bits(), "exhaustive mld");
    std::size_t idx = 0;
    for (std::size_t b = 0; b < syndrome.size(); ++b)
        if (syndrome.get(b)) idx |= std::size_t(1) << b;
    return table_.data() + idx * n_classes_;
}

DecodeResult ExhaustiveMldDecoder::decode(const BitVec& syndrome) {
    double t0 = now_seconds();
    const double* row = masses(syndrome);
    DecodeResult r;
    double total = 0.0;
    for (unsigned c = 0; c < n_classes_; ++c) total += row[c];
    if (total <= 0.0) {
        r.ok = false;
        r.status = "syndrome not achievable";
        r.seconds = now_seconds() - t0;
        return r;
    }
    r.label = argmax_lowest(row, n_classes_);
    r.dist.resize(n_classes_);
    for (unsigned c = 0; c < n_classes_; ++c) r.dist[c] = row[c] / total;
    r.seconds = now_seconds() - t0;
    return r;
}

TruncatedMldDecoder::TruncatedMldDecoder(const Code& code, double p, int w_max, bool early_stop)
    : code_(code),
      p_(p),
      w_max_(w_max),
      early_stop_(early_stop),
      n_classes_(static_cast<unsigned>(code.n_classes())) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("truncated mld: error rate out of range");
    if (w_max < 0) throw std::invalid_argument("truncated mld: negative weight cap");
    std::size_t n = code_.n_qubits();
    if (static_cast<std::size_t>(w_max) > n) w_max_ = static_cast<int>(n);

    double candidates = 0.0, comb = 1.0, pow3 = 1.0;
    for (int w = 0; w <= w_max_; ++w) {
        candidates += comb * pow3;
        comb = comb * double(n - w) / double(w + 1);
        pow3 *= 3.0;
    }
    if (candidates > 5e6)
        throw std::invalid_argument("truncated mld: enumeration budget exceeded");

    std::size_t bits = code_.syndrome_bits();
    std::size_t nf = code_.n_face();
    BitMat ft = transpose(code_.face_checks);
    BitMat vt = transpose(code_.vertex_checks);
    for (int t = 0; t < 3; ++t) {
        col_[t].reserve(n);
        lab_[t].reserve(n);
    }
    for (std::size_t q = 0; q < n; ++q) {
        BitVec sx(bits), sz(bits);
        for (std::size_t r : ft.row(q).support()) sx.set(r, true);
        for (std::size_t r : vt.row(q).support()) sz.set(nf + r, true);
        PauliError x{BitVec(n), BitVec(n)}, z{BitVec(n), BitVec(n)};
        x.x.set(q, true);
        z.z.set(q, true);
        unsigned lx = logical_label(code_, x);
        unsigned lz = logical_label(code_, z);
        col_[0].push_back(sx);
        col_[1].push_back(sz);
        col_[2].push_back(sx ^ sz);
        lab_[0].push_back(lx);
        lab_[1].push_back(lz);
        lab_[2].push_back(lx ^ lz);
    }

    level_prob_.resize(w_max_ + 1);
    for (int w = 0; w <= w_max_; ++w)
        level_prob_[w] = std::pow(p / 3.0, double(w)) * std::pow(1.0 - p, double(n - w));
    // tail_[w]: mass of all errors with weight in (w, w_max]
    tail_.assign(w_max_ + 1, 0.0);
    comb = 1.0;
    std::vector<double> level_total(w_max_ + 1);
    for (int w = 0; w <= w_max_; ++w) {
        level_total[w] = comb * std::pow(p, double(w)) * std::pow(1.0 - p, double(n - w));
        comb = comb * double(n - w) / double(w + 1);
    }
    for (int w = w_max_ - 1; w >= 0; --w) tail_[w] = tail_[w + 1] + level_total[w + 1];
}

DecodeResult TruncatedMldDecoder::decode(const BitVec& syndrome) {
    check_syndrome_size(syndrome, code_.syndrome_bits(), "truncated mld");
    double t0 = now_seconds();
    std::size_t n = code_.n_qubits();
    std::vector<double> mass(n_classes_, 0.0);

    BitVec acc(code_.syndrome_bits());
    std::function<void(std::size_t, int, unsigned, int)> rec =
        [&](std::size_t start, int remaining, unsigned lab, int w) {
            if (remaining == 0) {
                if (acc == syndrome) mass[lab] += level_prob_[w];
                return;
            }
            for (std::size_t q = start; q + remaining <= n; ++q)
                for (int t = 0; t < 3; ++t) {
                    acc ^= col_[t][q];
                    rec(q + 1, remaining - 1, lab ^ lab_[t][q], w);
                    acc ^= col_[t][q];
                }
        };

    for (int w = 0; w <= w_max_; ++w) {
        rec(0, w, 0, w);
        double best = 0.0, second = 0.0;
        for (unsigned c = 0; c < n_classes_; ++c) {
            if (mass[c] > best) {
                second = best;
                best = mass[c];
            } else if (mass[c] > second) {
                second = mass[c];
            }
        }
        if (early_stop_ && best - second > tail_[w]) break;
    }

    DecodeResult r;
    double total = 0.0;
    for (double m : mass) total += m;
    if (total <= 0.0) {
        r.ok = false;
        r.status = "no candidate";
        r.seconds = now_seconds() - t0;
        return r;
    }
    r.label = argmax_lowest(mass.data(), n_classes_);
    r.dist.resize(n_classes_);
    for (unsigned c = 0; c < n_classes_; ++c) r.dist[c] = mass[c] / total;
    r.seconds = now_seconds() - t0;
    return r;
}

}  // namespace toric
