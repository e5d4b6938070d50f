#include "toric3d/toric3d.h"

#include <cstring>
#include <exception>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "code.hpp"
#include "decoders.hpp"
#include "harness.hpp"
#include "noise.hpp"
#include "train.hpp"

using namespace toric;

struct tc3d_code {
    Code code;
};

struct tc3d_sampler {
    Code code;
    double p;
    Rng rng;
};

struct tc3d_decoder {
    std::unique_ptr<Decoder> impl;
    std::string name;
    std::size_t syndrome_bits = 0;
};

namespace {

thread_local std::string g_last_error;

tc3d_status fail(tc3d_status s, const std::string& what) {
    g_last_error = what;
    return s;
}

template <typename F>
tc3d_status guarded(F&& body) {
    try {
        return body();
    } catch (const std::invalid_argument& e) {
        return fail(TC3D_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::runtime_error& e) {
        return fail(TC3D_ERR_IO, e.what());
    } catch (const std::exception& e) {
        return fail(TC3D_ERR_INTERNAL, e.what());
    }
}

BitVec unpack_syndrome(const std::uint8_t* bytes, std::size_t bits) {
    BitVec v(bits);
    for (std::size_t i = 0; i < bits; ++i)
        if (bytes[i >> 3] >> (i & 7) & 1) v.set(i, true);
    return v;
}

void pack_syndrome(const BitVec& v, std::uint8_t* bytes) {
    std::memset(bytes, 0, (v.size() + 7) / 8);
    for (std::size_t i = 0; i < v.size(); ++i)
        if (v.get(i)) bytes[i >> 3] |= std::uint8_t(1) << (i & 7);
}

tc3d_status make_decoder(tc3d_decoder** out, std::unique_ptr<Decoder> impl,
                         const tc3d_code* code) {
    auto* d = new tc3d_decoder{std::move(impl), {}, code->code.syndrome_bits()};
    d->name = d->impl->name();
    *out = d;
    return TC3D_OK;
}

TrainConfig to_train_config(const tc3d_train_config& c) {
    TrainConfig cfg;
    cfg.L = c.L;
    cfg.dim = c.dim;
    cfg.p_train = c.p_train;
    cfg.seed = c.seed;
    cfg.batch = static_cast<std::size_t>(c.batch);
    cfg.total_samples = static_cast<std::size_t>(c.total_samples);
    cfg.max_lr = c.max_lr;
    cfg.weight_decay = c.weight_decay;
    cfg.head = c.head_gapt ? HeadKind::GapT : HeadKind::Gap;
    if (c.stages > 0) cfg.stages = c.stages;
    if (c.kernel > 0) cfg.kernel = c.kernel;
    if (c.n_channels < 0 || c.n_channels > 8)
        throw std::invalid_argument("train config: channel count out of range");
    for (int i = 0; i < c.n_channels; ++i) cfg.channels.push_back(c.channels[i]);
    return cfg;
}

}  // namespace

extern "C" {

const char* tc3d_last_error(void) { return g_last_error.c_str(); }

tc3d_status tc3d_code_new(int L, int dim, tc3d_code** out) {
    if (!out) return fail(TC3D_ERR_INVALID_ARGUMENT, "code_new: null output");
    *out = nullptr;
    return guarded([&] {
        *out = new tc3d_code{build_toric(L, dim)};
        return TC3D_OK;
    });
}

void tc3d_code_free(tc3d_code* code) { delete code; }

int tc3d_code_lattice(const tc3d_code* code) { return code ? code->code.L : 0; }
int tc3d_code_dim(const tc3d_code* code) { return code ? code->code.dim : 0; }
size_t tc3d_code_n_qubits(const tc3d_code* code) { return code ? code->code.n_qubits() : 0; }
size_t tc3d_code_syndrome_bits(const tc3d_code* code) {
    return code ? code->code.syndrome_bits() : 0;
}
size_t tc3d_code_syndrome_bytes(const tc3d_code* code) {
    return code ? (code->code.syndrome_bits() + 7) / 8 : 0;
}
size_t tc3d_code_n_classes(const tc3d_code* code) {
    return code ? static_cast<size_t>(code->code.n_classes()) : 0;
}

tc3d_status tc3d_code_validate(const tc3d_code* code) {
    if (!code) return fail(TC3D_ERR_INVALID_ARGUMENT, "validate: null code");
    return guarded([&] {
        ValidationReport report = validate(code->code);
        if (!report.ok) return fail(TC3D_ERR_INTERNAL, report.summary());
        return TC3D_OK;
    });
}

tc3d_status tc3d_code_save(const tc3d_code* code, const char* path) {
    if (!code || !path) return fail(TC3D_ERR_INVALID_ARGUMENT, "code_save: null argument");
    return guarded([&] {
        save_code(code->code, path);
        return TC3D_OK;
    });
}

tc3d_status tc3d_code_load(const char* path, tc3d_code** out) {
    if (!path || !out) return fail(TC3D_ERR_INVALID_ARGUMENT, "code_load: null argument");
    *out = nullptr;
    return guarded([&] {
        *out = new tc3d_code{load_code(path)};
        return TC3D_OK;
    });
}

tc3d_status tc3d_sampler_new(const tc3d_code* code, double p, uint64_t seed, uint64_t stream,
                             tc3d_sampler** out) {
    if (!code || !out) return fail(TC3D_ERR_INVALID_ARGUMENT, "sampler_new: null argument");
    *out = nullptr;
    if (!(p >= 0.0 && p <= 1.0))
        return fail(TC3D_ERR_INVALID_ARGUMENT, "sampler_new: error rate out of range");
    return guarded([&] {
        *out = new tc3d_sampler{code->code, p, Rng(seed, stream)};
        return TC3D_OK;
    });
}

void tc3d_sampler_free(tc3d_sampler* s) { delete s; }

tc3d_status tc3d_sampler_next(tc3d_sampler* s, uint8_t* syndrome, uint32_t* label) {
    if (!s || !syndrome || !label)
        return fail(TC3D_ERR_INVALID_ARGUMENT, "sampler_next: null argument");
    return guarded([&] {
        PauliError e = sample_error(s->code, s->p, s->rng);
        pack_syndrome(extract_syndrome(s->code, e), syndrome);
        *label = logical_label(s->code, e);
        return TC3D_OK;
    });
}

tc3d_status tc3d_dataset_dump(const tc3d_code* code, double p, size_t n, uint64_t seed,
                              uint64_t stream, const char* path) {
    if (!code || !path) return fail(TC3D_ERR_INVALID_ARGUMENT, "dataset_dump: null argument");
    return guarded([&] {
        dump_dataset_csv(code->code, p, static_cast<long>(n), seed, stream, path);
        return TC3D_OK;
    });
}

tc3d_status tc3d_decoder_new_constant(const tc3d_code* code, tc3d_decoder** out) {
    if (!code || !out) return fail(TC3D_ERR_INVALID_ARGUMENT, "decoder_new: null argument");
    *out = nullptr;
    return guarded([&] { return make_decoder(out, std::make_unique<ConstantDecoder>(code->code), code); });
}

tc3d_status tc3d_decoder_new_mld(const tc3d_code* code, double p, tc3d_decoder** out) {
    if (!code || !out) return fail(TC3D_ERR_INVALID_ARGUMENT, "decoder_new: null argument");
    *out = nullptr;
    return guarded(
        [&] { return make_decoder(out, std::make_unique<ExhaustiveMldDecoder>(code->code, p), code); });
}

tc3d_status tc3d_decoder_new_mld_truncated(const tc3d_code* code, double p, int w_max,
                                           tc3d_decoder** out) {
    if (!code || !out) return fail(TC3D_ERR_INVALID_ARGUMENT, "decoder_new: null argument");
    *out = nullptr;
    return guarded([&] {
        return make_decoder(out, std::make_unique<TruncatedMldDecoder>(code->code, p, w_max), code);
    });
}

tc3d_status tc3d_decoder_new_neural(const tc3d_code* code, const char* checkpoint_path,
                                    tc3d_decoder** out) {
    if (!code || !checkpoint_path || !out)
        return fail(TC3D_ERR_INVALID_ARGUMENT, "decoder_new: null argument");
    *out = nullptr;
    return guarded([&] {
        Checkpoint ck = load_checkpoint(checkpoint_path);
        return make_decoder(out, std::make_unique<NeuralDecoder>(code->code, std::move(ck.net),
                                                                 ck.cfg.p_train),
                            code);
    });
}

void tc3d_decoder_free(tc3d_decoder* d) { delete d; }

const char* tc3d_decoder_name(const tc3d_decoder* d) { return d ? d->name.c_str() : ""; }

double tc3d_decoder_train_error_rate(const tc3d_decoder* d) {
    return d ? d->impl->train_error_rate() : 0.0;
}

tc3d_status tc3d_decode(tc3d_decoder* d, const uint8_t* syndrome, uint32_t* label,
                        double* dist_or_null) {
    if (!d || !syndrome || !label) return fail(TC3D_ERR_INVALID_ARGUMENT, "decode: null argument");
    return guarded([&] {
        DecodeResult r = d->impl->decode(unpack_syndrome(syndrome, d->syndrome_bits));
        if (!r.ok) return fail(TC3D_ERR_NO_CANDIDATE, r.status);
        *label = r.label;
        if (dist_or_null) {
            for (std::size_t c = 0; c < r.dist.size(); ++c) dist_or_null[c] = r.dist[c];
        }
        return TC3D_OK;
    });
}

tc3d_status tc3d_decode_batch(tc3d_decoder* d, const uint8_t* syndromes, size_t n,
                              uint32_t* labels) {
    if (!d || (!syndromes && n) || (!labels && n))
        return fail(TC3D_ERR_INVALID_ARGUMENT, "decode_batch: null argument");
    return guarded([&] {
        std::size_t bits = d->syndrome_bits;
        std::size_t stride = (bits + 7) / 8;
        std::vector<BitVec> batch;
        batch.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            batch.push_back(unpack_syndrome(syndromes + i * stride, bits));
        std::vector<DecodeResult> results = d->impl->decode_batch(batch);
        for (std::size_t i = 0; i < n; ++i)
            labels[i] = results[i].ok ? results[i].label : UINT32_MAX;
        return TC3D_OK;
    });
}

void tc3d_train_config_init(tc3d_train_config* cfg) {
    if (!cfg) return;
    TrainConfig d;
    std::memset(cfg, 0, sizeof *cfg);
    cfg->L = d.L;
    cfg->dim = d.dim;
    cfg->p_train = d.p_train;
    cfg->seed = d.seed;
    cfg->batch = d.batch;
    cfg->total_samples = d.total_samples;
    cfg->max_lr = d.max_lr;
    cfg->weight_decay = d.weight_decay;
    cfg->head_gapt = 1;
    cfg->stages = d.stages;
    cfg->kernel = d.kernel;
}

tc3d_status tc3d_train(const tc3d_train_config* cfg, const char* checkpoint_path_or_null,
                       const char* loss_csv_path_or_null, double* trainability_or_null) {
    if (!cfg) return fail(TC3D_ERR_INVALID_ARGUMENT, "train: null config");
    return guarded([&] {
        TrainConfig tcfg = to_train_config(*cfg);
        Code code = build_toric(tcfg.L, tcfg.dim);
        TrainResult result = train(code, tcfg);
        if (checkpoint_path_or_null) save_checkpoint(checkpoint_path_or_null, result.net, tcfg);
        if (loss_csv_path_or_null) write_loss_csv(result, loss_csv_path_or_null);
        if (trainability_or_null) *trainability_or_null = trainability_metric(result.loss);
        return TC3D_OK;
    });
}

tc3d_status tc3d_trainability(const double* losses, size_t n, double* out) {
    if (!losses || !out) return fail(TC3D_ERR_INVALID_ARGUMENT, "trainability: null argument");
    return guarded([&] {
        *out = trainability_metric(std::vector<double>(losses, losses + n));
        return TC3D_OK;
    });
}

tc3d_status tc3d_eval(tc3d_decoder* d, const tc3d_code* code, double p, size_t n, uint64_t seed,
                      double* accuracy, double* loss, double* seconds_per_decode) {
    if (!d || !code) return fail(TC3D_ERR_INVALID_ARGUMENT, "eval: null argument");
    return guarded([&] {
        MetricsRow row = eval_accuracy(*d->impl, code->code, p, n, seed);
        if (accuracy) *accuracy = row.accuracy;
        if (loss) *loss = row.loss;
        if (seconds_per_decode) *seconds_per_decode = row.wall_time_per_decode;
        return TC3D_OK;
    });
}

tc3d_status tc3d_eval_csv(tc3d_decoder* d, const tc3d_code* code, const double* ps, size_t n_p,
                          size_t n_samples, uint64_t seed, int include_time,
                          const char* csv_path) {
    if (!d || !code || !ps || !csv_path || n_p == 0)
        return fail(TC3D_ERR_INVALID_ARGUMENT, "eval_csv: null argument");
    return guarded([&] {
        std::vector<MetricsRow> rows;
        rows.reserve(n_p);
        for (std::size_t i = 0; i < n_p; ++i)
            rows.push_back(eval_accuracy(*d->impl, code->code, ps[i], n_samples, seed));
        write_metrics_csv(csv_path, rows, include_time != 0);
        return TC3D_OK;
    });
}

tc3d_status tc3d_threshold(const tc3d_code* const* codes, tc3d_decoder* const* decoders,
                           size_t n_members, const double* p_grid, size_t n_p, size_t n_per_point,
                           uint64_t seed, const char* csv_path_or_null, int* found,
                           double* p_threshold, double* residual) {
    if (!codes || !decoders || !p_grid || !found)
        return fail(TC3D_ERR_INVALID_ARGUMENT, "threshold: null argument");
    return guarded([&] {
        std::vector<FamilyMember> family;
        family.reserve(n_members);
        for (std::size_t i = 0; i < n_members; ++i) {
            if (!codes[i] || !decoders[i])
                throw std::invalid_argument("threshold: null family member");
            family.push_back({&codes[i]->code, decoders[i]->impl.get()});
        }
        std::vector<double> grid(p_grid, p_grid + n_p);
        std::vector<MetricsRow> rows;
        ThresholdEstimate est =
            threshold_sweep(family, grid, n_per_point, seed, csv_path_or_null ? &rows : nullptr);
        if (csv_path_or_null) write_metrics_csv(csv_path_or_null, rows);
        *found = est.found ? 1 : 0;
        if (p_threshold) *p_threshold = est.p_threshold;
        if (residual) *residual = est.residual;
        return TC3D_OK;
    });
}

tc3d_status tc3d_bench(tc3d_decoder* d, const tc3d_code* code, double p, size_t n, uint64_t seed,
                       const char* csv_path_or_null, double* batched_seconds_per_decode,
                       double* unbatched_seconds_per_decode) {
    if (!d || !code) return fail(TC3D_ERR_INVALID_ARGUMENT, "bench: null argument");
    return guarded([&] {
        BenchResult r = bench_runtime(*d->impl, code->code, p, n, seed);
        if (csv_path_or_null) write_metrics_csv(csv_path_or_null, {r.batched, r.unbatched});
        if (batched_seconds_per_decode)
            *batched_seconds_per_decode = r.batched.wall_time_per_decode;
        if (unbatched_seconds_per_decode)
            *unbatched_seconds_per_decode = r.unbatched.wall_time_per_decode;
        return TC3D_OK;
    });
}

}  // extern "C"
