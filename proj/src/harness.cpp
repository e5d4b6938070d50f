#include "harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "noise.hpp"

namespace toric {

namespace {

double now_seconds() {
    auto t = std::chrono::steady_clock::now().time_since_epoch();
    return std::chrono::duration<double>(t).count();
}

struct SampleSet {
    std::vector<BitVec> syndromes;
    std::vector<unsigned> truth;
};

SampleSet draw_samples(const Code& code, double p, std::size_t n, std::uint64_t seed,
                       std::uint64_t stream) {
    SampleSet set;
    set.syndromes.reserve(n);
    set.truth.reserve(n);
    Rng rng(seed, stream);
    for (std::size_t i = 0; i < n; ++i) {
        PauliError e = sample_error(code, p, rng);
        set.syndromes.push_back(extract_syndrome(code, e));
        set.truth.push_back(logical_label(code, e));
    }
    return set;
}

// mean cross-entropy of the decoder's reported distribution against truth;
// a missing or failed distribution scores as probability zero
double mean_loss(const std::vector<DecodeResult>& results, const std::vector<unsigned>& truth) {
    double total = 0.0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        double p_true = 0.0;
        if (results[i].ok && truth[i] < results[i].dist.size()) p_true = results[i].dist[truth[i]];
        total += -std::log(p_true + 1e-9);
    }
    return results.empty() ? 0.0 : total / double(results.size());
}

double mean_accuracy(const std::vector<DecodeResult>& results,
                     const std::vector<unsigned>& truth) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < results.size(); ++i)
        if (results[i].ok && results[i].label == truth[i]) ++hits;
    return results.empty() ? 0.0 : double(hits) / double(results.size());
}

void format_row(std::string& out, const MetricsRow& r, bool include_time) {
    char buf[256];
    if (include_time) {
        std::snprintf(buf, sizeof buf, "%s,%d,%.9g,%.9g,%zu,%.9g,%.9g,%.9g\n",
                      r.decoder.c_str(), r.L, r.p, r.p_train, r.samples, r.accuracy, r.loss,
                      r.wall_time_per_decode);
    } else {
        std::snprintf(buf, sizeof buf, "%s,%d,%.9g,%.9g,%zu,%.9g,%.9g\n", r.decoder.c_str(),
                      r.L, r.p, r.p_train, r.samples, r.accuracy, r.loss);
    }
    out += buf;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

const char* const kMetricsHeader = "decoder,L,p,p_train,samples,accuracy,loss,wall_time_per_decode";

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows,
                       bool include_time) {
    std::string out = kMetricsHeader;
    if (!include_time) out.resize(out.rfind(",wall_time_per_decode"));
    out += '\n';
    for (const MetricsRow& r : rows) format_row(out, r, include_time);
    os << out;
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows,
                       bool include_time) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open metrics file: " + path);
    write_metrics_csv(os, rows, include_time);
}

MetricsRow eval_accuracy(Decoder& decoder, const Code& code, double p, std::size_t n,
                         std::uint64_t seed, std::uint64_t stream) {
    if (n == 0) throw std::invalid_argument("eval_accuracy: sample count must be positive");
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("eval_accuracy: error rate out of range");

    SampleSet set = draw_samples(code, p, n, seed, stream);
    double t0 = now_seconds();
    std::vector<DecodeResult> results = decoder.decode_batch(set.syndromes);
    double elapsed = now_seconds() - t0;

    MetricsRow row;
    row.decoder = decoder.name();
    row.L = code.L;
    row.p = p;
    row.p_train = decoder.train_error_rate();
    row.samples = n;
    row.accuracy = mean_accuracy(results, set.truth);
    row.loss = mean_loss(results, set.truth);
    row.wall_time_per_decode = elapsed / double(n);
    return row;
}

ThresholdEstimate threshold_from_curves(const std::vector<int>& Ls,
                                        const std::vector<double>& p_grid,
                                        const std::vector<std::vector<double>>& acc) {
    if (Ls.size() < 2) throw std::invalid_argument("threshold: need at least two lattice sizes");
    if (acc.size() != Ls.size())
        throw std::invalid_argument("threshold: one accuracy curve per lattice size");
    if (p_grid.size() < 2 || !std::is_sorted(p_grid.begin(), p_grid.end()))
        throw std::invalid_argument("threshold: error-rate grid must be sorted");
    for (const auto& curve : acc)
        if (curve.size() != p_grid.size())
            throw std::invalid_argument("threshold: curve length must match the grid");

    ThresholdEstimate est;
    std::vector<double> crossings;
    for (std::size_t i = 0; i + 1 < Ls.size(); ++i) {
        for (std::size_t k = 0; k + 1 < p_grid.size(); ++k) {
            double d0 = acc[i][k] - acc[i + 1][k];
            double d1 = acc[i][k + 1] - acc[i + 1][k + 1];
            double cross;
            if (d0 == 0.0) {
                cross = p_grid[k];
            } else if (d0 * d1 < 0.0) {
                double t = d0 / (d0 - d1);
                cross = p_grid[k] + t * (p_grid[k + 1] - p_grid[k]);
            } else {
                continue;
            }
            est.pairs.push_back({Ls[i], Ls[i + 1], cross});
            crossings.push_back(cross);
            break;  // first sign change along the grid counts for this pair
        }
    }
    if (crossings.empty()) return est;

    est.found = true;
    est.p_threshold = median(crossings);
    for (double c : crossings) est.residual = std::max(est.residual, std::abs(c - est.p_threshold));
    return est;
}

ThresholdEstimate threshold_sweep(const std::vector<FamilyMember>& family,
                                  const std::vector<double>& p_grid, std::size_t n_per_point,
                                  std::uint64_t seed, std::vector<MetricsRow>* rows_out) {
    if (family.size() < 2)
        throw std::invalid_argument("threshold: need at least two lattice sizes");
    std::vector<int> Ls;
    for (const FamilyMember& m : family) {
        if (!m.code || !m.decoder) throw std::invalid_argument("threshold: null family member");
        if (!Ls.empty() && m.code->L <= Ls.back())
            throw std::invalid_argument("threshold: members must have strictly increasing L");
        Ls.push_back(m.code->L);
    }

    std::vector<std::vector<double>> acc(family.size());
    for (std::size_t i = 0; i < family.size(); ++i) {
        acc[i].reserve(p_grid.size());
        for (double p : p_grid) {
            MetricsRow row = eval_accuracy(*family[i].decoder, *family[i].code, p, n_per_point, seed);
            acc[i].push_back(row.accuracy);
            if (rows_out) rows_out->push_back(std::move(row));
        }
    }
    return threshold_from_curves(Ls, p_grid, acc);
}

double trainability_metric(const std::vector<double>& losses) {
    if (losses.empty()) throw std::invalid_argument("trainability: empty loss trace");
    std::size_t n = losses.size();
    std::size_t window = std::clamp<std::size_t>(n / 100, 10, n);
    double first = 0.0, last = 0.0;
    for (std::size_t i = 0; i < window; ++i) {
        first += losses[i];
        last += losses[n - window + i];
    }
    first /= double(window);
    last /= double(window);
    if (first <= 0.0) return 0.0;
    return std::clamp((first - last) / first, 0.0, 1.0);
}

BenchResult bench_runtime(Decoder& decoder, const Code& code, double p, std::size_t n,
                          std::uint64_t seed) {
    BenchResult out;
    out.batched.decoder = decoder.name() + ".batched";
    out.unbatched.decoder = decoder.name() + ".unbatched";
    for (MetricsRow* r : {&out.batched, &out.unbatched}) {
        r->L = code.L;
        r->p = p;
        r->p_train = decoder.train_error_rate();
    }
    if (n == 0) return out;

    SampleSet set = draw_samples(code, p, n, seed, 3);

    double t0 = now_seconds();
    std::vector<DecodeResult> batched = decoder.decode_batch(set.syndromes);
    double batched_elapsed = now_seconds() - t0;

    std::vector<DecodeResult> unbatched;
    unbatched.reserve(n);
    t0 = now_seconds();
    for (const BitVec& s : set.syndromes) unbatched.push_back(decoder.decode(s));
    double unbatched_elapsed = now_seconds() - t0;

    out.batched.samples = n;
    out.batched.accuracy = mean_accuracy(batched, set.truth);
    out.batched.loss = mean_loss(batched, set.truth);
    out.batched.wall_time_per_decode = batched_elapsed / double(n);

    out.unbatched.samples = n;
    out.unbatched.accuracy = mean_accuracy(unbatched, set.truth);
    out.unbatched.loss = mean_loss(unbatched, set.truth);
    out.unbatched.wall_time_per_decode = unbatched_elapsed / double(n);
    return out;
}

MaxPResult binary_search_max_p(const std::function<double(double)>& accuracy_at, double lo,
                               double hi, double resolution, double target) {
    if (!(lo < hi)) throw std::invalid_argument("binary search: need lo < hi");
    if (resolution <= 0.0) throw std::invalid_argument("binary search: resolution must be positive");

    MaxPResult out;
    if (accuracy_at(lo) <= target) return out;
    out.found = true;
    if (accuracy_at(hi) > target) {
        out.p = hi;
        return out;
    }
    while (hi - lo > resolution) {
        double mid = 0.5 * (lo + hi);
        if (accuracy_at(mid) > target)
            lo = mid;
        else
            hi = mid;
    }
    out.p = lo;
    return out;
}

}  // namespace toric
