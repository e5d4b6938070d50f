#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "code.hpp"
#include "decoders.hpp"

namespace toric {

// One line of the metrics table. wall_time_per_decode is the only
// non-deterministic field; writers can omit it for byte-stable output.
struct MetricsRow {
    std::string decoder;
    int L = 0;
    double p = 0.0;
    double p_train = 0.0;
    std::size_t samples = 0;
    double accuracy = 0.0;
    double loss = 0.0;
    double wall_time_per_decode = 0.0;
};

extern const char* const kMetricsHeader;

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows,
                       bool include_time = true);
void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows,
                       bool include_time = true);

// Accuracy, mean cross-entropy, and per-decode wall time over n freshly
// sampled errors. Stream 2 is the evaluation stream; two decoders evaluated
// with the same (seed, stream) see the identical sample sequence.
MetricsRow eval_accuracy(Decoder& decoder, const Code& code, double p, std::size_t n,
                         std::uint64_t seed, std::uint64_t stream = 2);

struct PairCrossing {
    int l1 = 0;
    int l2 = 0;
    double p = 0.0;
};

struct ThresholdEstimate {
    bool found = false;
    double p_threshold = 0.0;
    double residual = 0.0;  // max deviation of any pair crossing from the median
    std::vector<PairCrossing> pairs;
};

// Crossings of piecewise-linear accuracy curves for consecutive lattice
// sizes; the estimate is the median crossing. acc[i][k] pairs Ls[i] with
// p_grid[k].
ThresholdEstimate threshold_from_curves(const std::vector<int>& Ls,
                                        const std::vector<double>& p_grid,
                                        const std::vector<std::vector<double>>& acc);

struct FamilyMember {
    const Code* code = nullptr;
    Decoder* decoder = nullptr;
};

// Evaluates every family member across the grid, then locates the curve
// crossings. Members must be ordered by strictly increasing L. rows_out,
// when given, receives one MetricsRow per (member, p) for persistence.
ThresholdEstimate threshold_sweep(const std::vector<FamilyMember>& family,
                                  const std::vector<double>& p_grid, std::size_t n_per_point,
                                  std::uint64_t seed,
                                  std::vector<MetricsRow>* rows_out = nullptr);

// Relative decrease of the smoothed loss over training, clamped to [0,1].
// Smoothing window is 1% of the trace, at least 10 points.
double trainability_metric(const std::vector<double>& losses);

struct BenchResult {
    MetricsRow batched;
    MetricsRow unbatched;
};

// Times decode_batch against one-at-a-time decodes on the same syndromes.
// Pure measurement; rows are named <decoder>.batched / <decoder>.unbatched.
BenchResult bench_runtime(Decoder& decoder, const Code& code, double p, std::size_t n,
                          std::uint64_t seed);

struct MaxPResult {
    bool found = false;
    double p = 0.0;
};

// Highest p in [lo, hi] where accuracy_at(p) stays above target, bisected
// down to the given resolution. found=false when even lo fails the target.
MaxPResult binary_search_max_p(const std::function<double(double)>& accuracy_at, double lo,
                               double hi, double resolution = 0.0025, double target = 0.5);

}  // namespace toric
