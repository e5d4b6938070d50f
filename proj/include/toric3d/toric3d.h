#ifndef TORIC3D_H
#define TORIC3D_H

/* C interface to the toric-code simulation and decoding toolkit.
 *
 * All functions returning tc3d_status leave a human-readable message for
 * the calling thread in tc3d_last_error() on failure. Handles are created
 * by tc3d_*_new functions and released by the matching tc3d_*_free; a
 * failed constructor never produces a handle.
 *
 * Syndromes cross this interface as packed bytes: syndrome bit i lives in
 * byte i/8 at bit position i%8 (least significant bit first), and buffers
 * hold tc3d_code_syndrome_bytes(code) bytes per syndrome. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define TC3D_API __declspec(dllexport)
#else
#define TC3D_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tc3d_status {
    TC3D_OK = 0,
    TC3D_ERR_INVALID_ARGUMENT = 1,
    TC3D_ERR_IO = 2,
    TC3D_ERR_NO_CANDIDATE = 3,
    TC3D_ERR_INTERNAL = 4
} tc3d_status;

typedef struct tc3d_code tc3d_code;
typedef struct tc3d_sampler tc3d_sampler;
typedef struct tc3d_decoder tc3d_decoder;

/* message for the most recent failure on this thread; never NULL */
TC3D_API const char* tc3d_last_error(void);

/* ---- codes ---- */

TC3D_API tc3d_status tc3d_code_new(int L, int dim, tc3d_code** out);
TC3D_API void tc3d_code_free(tc3d_code* code);
TC3D_API int tc3d_code_lattice(const tc3d_code* code);
TC3D_API int tc3d_code_dim(const tc3d_code* code);
TC3D_API size_t tc3d_code_n_qubits(const tc3d_code* code);
TC3D_API size_t tc3d_code_syndrome_bits(const tc3d_code* code);
TC3D_API size_t tc3d_code_syndrome_bytes(const tc3d_code* code);
TC3D_API size_t tc3d_code_n_classes(const tc3d_code* code);
/* runs the structural self-checks; failures are listed in tc3d_last_error */
TC3D_API tc3d_status tc3d_code_validate(const tc3d_code* code);
TC3D_API tc3d_status tc3d_code_save(const tc3d_code* code, const char* path);
TC3D_API tc3d_status tc3d_code_load(const char* path, tc3d_code** out);

/* ---- noise ---- */

/* independent depolarizing noise at rate p, seeded reproducibly; equal
 * (seed, stream) pairs replay the same error sequence */
TC3D_API tc3d_status tc3d_sampler_new(const tc3d_code* code, double p, uint64_t seed,
                                      uint64_t stream, tc3d_sampler** out);
TC3D_API void tc3d_sampler_free(tc3d_sampler* s);
/* draws one error; writes its packed syndrome and true class label */
TC3D_API tc3d_status tc3d_sampler_next(tc3d_sampler* s, uint8_t* syndrome, uint32_t* label);

/* writes n samples as CSV rows "label,syndrome_hex" with header */
TC3D_API tc3d_status tc3d_dataset_dump(const tc3d_code* code, double p, size_t n, uint64_t seed,
                                       uint64_t stream, const char* path);

/* ---- decoders ---- */

TC3D_API tc3d_status tc3d_decoder_new_constant(const tc3d_code* code, tc3d_decoder** out);
/* exact coset-mass table; only tiny codes (2D L=2) are feasible */
TC3D_API tc3d_status tc3d_decoder_new_mld(const tc3d_code* code, double p, tc3d_decoder** out);
/* weight-truncated coset masses up to w_max flipped qubits */
TC3D_API tc3d_status tc3d_decoder_new_mld_truncated(const tc3d_code* code, double p, int w_max,
                                                    tc3d_decoder** out);
/* trained network restored from a checkpoint file; the code's lattice may
 * differ from the training lattice, channel counts must match */
TC3D_API tc3d_status tc3d_decoder_new_neural(const tc3d_code* code, const char* checkpoint_path,
                                             tc3d_decoder** out);
TC3D_API void tc3d_decoder_free(tc3d_decoder* d);
TC3D_API const char* tc3d_decoder_name(const tc3d_decoder* d);
TC3D_API double tc3d_decoder_train_error_rate(const tc3d_decoder* d);

/* decodes one packed syndrome. dist_or_null, when given, receives the
 * decoder's class distribution (tc3d_code_n_classes doubles). Returns
 * TC3D_ERR_NO_CANDIDATE when the decoder cannot explain the syndrome. */
TC3D_API tc3d_status tc3d_decode(tc3d_decoder* d, const uint8_t* syndrome, uint32_t* label,
                                 double* dist_or_null);
/* n packed syndromes stored back to back; labels[i] receives each choice.
 * Samples the decoder cannot explain get label UINT32_MAX. */
TC3D_API tc3d_status tc3d_decode_batch(tc3d_decoder* d, const uint8_t* syndromes, size_t n,
                                       uint32_t* labels);

/* ---- training ---- */

typedef struct tc3d_train_config {
    int L;
    int dim;               /* 2 or 3 */
    double p_train;        /* depolarizing rate of the training stream */
    uint64_t seed;
    uint64_t batch;
    uint64_t total_samples;
    double max_lr;
    double weight_decay;
    int head_gapt;         /* nonzero: translation-equivariant pooling head */
    int stages;            /* conv stages per residual block */
    int kernel;            /* conv kernel size, odd */
    int n_channels;        /* entries of channels[] in use; 0 picks defaults */
    int channels[8];
} tc3d_train_config;

/* fills the configuration with library defaults (L=3 three-dimensional) */
TC3D_API void tc3d_train_config_init(tc3d_train_config* cfg);

/* runs the training loop; optionally writes the checkpoint, the loss trace
 * CSV, and the trainability score of the run */
TC3D_API tc3d_status tc3d_train(const tc3d_train_config* cfg, const char* checkpoint_path_or_null,
                                const char* loss_csv_path_or_null, double* trainability_or_null);

/* relative smoothed loss decrease over a trace, clamped to [0, 1] */
TC3D_API tc3d_status tc3d_trainability(const double* losses, size_t n, double* out);

/* ---- evaluation ---- */

/* accuracy, mean cross-entropy, and seconds per decode over n fresh samples */
TC3D_API tc3d_status tc3d_eval(tc3d_decoder* d, const tc3d_code* code, double p, size_t n,
                               uint64_t seed, double* accuracy, double* loss,
                               double* seconds_per_decode);

/* evaluates the decoder across an error-rate list and writes the metrics
 * CSV (header: decoder,L,p,p_train,samples,accuracy,loss[,wall_time_per_decode]) */
TC3D_API tc3d_status tc3d_eval_csv(tc3d_decoder* d, const tc3d_code* code, const double* ps,
                                   size_t n_p, size_t n_samples, uint64_t seed, int include_time,
                                   const char* csv_path);

/* accuracy-curve crossings over a family of codes of strictly increasing
 * lattice size, one decoder per code. *found reports whether consecutive
 * curves crossed; on success *p_threshold is the median crossing and
 * *residual the largest deviation of any pair from it. metrics rows for
 * every (member, p) point are appended to csv_path_or_null when given. */
TC3D_API tc3d_status tc3d_threshold(const tc3d_code* const* codes, tc3d_decoder* const* decoders,
                                    size_t n_members, const double* p_grid, size_t n_p,
                                    size_t n_per_point, uint64_t seed,
                                    const char* csv_path_or_null, int* found,
                                    double* p_threshold, double* residual);

/* times decode_batch against one-at-a-time decoding on the same samples;
 * writes two rows (<name>.batched, <name>.unbatched) when csv_path given */
TC3D_API tc3d_status tc3d_bench(tc3d_decoder* d, const tc3d_code* code, double p, size_t n,
                                uint64_t seed, const char* csv_path_or_null,
                                double* batched_seconds_per_decode,
                                double* unbatched_seconds_per_decode);

#ifdef __cplusplus
}
#endif

#endif /* TORIC3D_H */
