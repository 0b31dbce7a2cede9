/* C interface to the courtside transcript enhancement library. */
#ifndef COURTSIDE_H
#define COURTSIDE_H

#include <stddef.h>
#include <stdint.h>

#define CS_API __attribute__((visibility("default")))

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cs_status {
  CS_OK = 0,
  CS_ERR_INVALID_ARGUMENT = 1,
  CS_ERR_IO = 2,
  CS_ERR_PARSE = 3,
  CS_ERR_CONFIG = 4,
  CS_ERR_UNDEFINED_WER = 5,
  CS_ERR_NO_LEXICON = 6,
  CS_ERR_DUPLICATE_ENTRY = 7,
  CS_ERR_DISJOINTNESS = 8,
  CS_ERR_UNKNOWN_ENTRY = 9,
  CS_ERR_ID_MISMATCH = 10,
  CS_ERR_TRANSPORT = 11,
  CS_ERR_ASR = 12,
  CS_ERR_CHAT = 13,
  CS_ERR_VALIDATION = 14,
  CS_ERR_INTERNAL = 15
} cs_status;

typedef struct cs_config cs_config;
typedef struct cs_session cs_session;

/* Message for the last failing call on this thread; empty after success. */
CS_API const char* cs_last_error(void);
CS_API const char* cs_status_name(cs_status status);
CS_API const char* cs_version(void);

/* Strings returned through char** out-parameters are owned by the caller. */
CS_API void cs_free_string(char* s);

/* Stateless helpers. */
CS_API cs_status cs_wer(const char* reference, const char* hypothesis, double* out_wer);
CS_API cs_status cs_similarity(const char* a, const char* b, double* out_score);
CS_API cs_status cs_length_safeguard(const char* baseline, const char* enhanced, double ratio, int* out_accept);

/* Configuration, loaded from a JSON file and adjustable before a session is
   opened. */
CS_API cs_status cs_config_load(const char* path, cs_config** out);
CS_API cs_status cs_config_set_seed(cs_config* config, uint64_t seed);
CS_API cs_status cs_config_set_workers(cs_config* config, size_t workers);
CS_API uint64_t cs_config_seed(const cs_config* config);
/* Output directory from the config; valid until the config is freed. */
CS_API const char* cs_config_output_dir(const cs_config* config);
CS_API void cs_config_free(cs_config* config);

/* A session validates the config and loads the lexicon. */
CS_API cs_status cs_session_open(const cs_config* config, cs_session** out);
/* Saves recorded chat exchanges when the config asks for it. */
CS_API cs_status cs_session_finish(cs_session* session);
CS_API void cs_session_close(cs_session* session);

/* Writes `count` synthetic segments with ground truth to a manifest file. */
CS_API cs_status cs_generate_corpus(cs_session* session, size_t count, uint64_t seed, const char* manifest_out);

typedef struct cs_run_summary {
  size_t segments;
  size_t failed;
  size_t accepted;
  size_t asr_calls;
  size_t prompted_asr_calls; /* second passes */
} cs_run_summary;

typedef void (*cs_progress_fn)(const char* segment_id, size_t done, size_t total, int failed, void* user);

/* Runs a variant ("baseline", "p1" ... "p4") over a manifest and writes the
   run artifact. Per-segment failures are recorded, not returned. */
CS_API cs_status cs_transcribe(cs_session* session, const char* manifest_path, const char* variant,
                               const char* artifact_out, cs_progress_fn progress, void* user,
                               cs_run_summary* out_summary);

/* Scores a run artifact against the manifest ground truth. */
CS_API cs_status cs_score(const char* artifact_path, const char* manifest_path, const char* scores_out,
                          size_t* out_scored);

typedef struct cs_report_summary {
  size_t evaluated;
  size_t improved;
  size_t degraded;
  size_t unchanged;
  double mean_baseline;
  double sd_baseline;
  double mean_variant;
  double sd_variant;
  double relative_reduction;
  double statistic;
  double p_value;
  size_t n_effective;
  int exact;
  double effect_size;
  int effect_size_defined;
} cs_report_summary;

/* Compares two score files. Either output path may be NULL; `out_table`
   receives the rendered table when non-NULL. */
CS_API cs_status cs_compare(const char* baseline_scores, const char* variant_scores, const char* table_out,
                            const char* machine_out, cs_report_summary* out_summary, char** out_table);

#ifdef __cplusplus
}
#endif

#endif /* COURTSIDE_H */
