#ifndef FORGE_FORGE_H
#define FORGE_FORGE_H

#include <stddef.h>
#include <stdint.h>

#if defined(FORGE_BUILDING_LIBRARY)
#define FORGE_API __attribute__((visibility("default")))
#else
#define FORGE_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum forge_status {
    FORGE_OK = 0,
    FORGE_E_USAGE,
    FORGE_E_CONFIG_INVALID,
    FORGE_E_MISSING_UPSTREAM_ARTIFACT,
    FORGE_E_MISSING_PROFILE,
    FORGE_E_DUPLICATE_VIDEO_ID,
    FORGE_E_UNAUTHORIZED_PERSONA,
    FORGE_E_MALFORMED_RECORD,
    FORGE_E_EMPTY_TRANSCRIPT,
    FORGE_E_INVALID_REQUEST,
    FORGE_E_PROVIDER_FAILURE,
    FORGE_E_RATE_LIMITED,
    FORGE_E_EMPTY_TEXT,
    FORGE_E_EXTRACTION_COUNT_MISMATCH,
    FORGE_E_PARSE_FAILURE,
    FORGE_E_VERDICT_PARSE_FAILURE,
    FORGE_E_UNRESOLVED_OPINION_REF,
    FORGE_E_UNFILTERED_PAIR,
    FORGE_E_MIXED_PERSONA,
    FORGE_E_IO_FAILURE,
    FORGE_E_EMPTY_CORPUS,
    FORGE_E_DIMENSION_MISMATCH,
    FORGE_E_TOKENIZER_MISMATCH,
    FORGE_E_EMPTY_INDEX,
    FORGE_E_MISSING_INDEX,
    FORGE_E_CONTEXT_BUDGET_EXCEEDED,
    FORGE_E_EMPTY_MESSAGE,
    FORGE_E_BUSY,
    FORGE_E_NOT_FOUND,
    FORGE_E_NO_COMMENTS,
    FORGE_E_SERVICE_UNREACHABLE,
    FORGE_E_EMPTY_TURN,
    FORGE_E_SCORE_PARSE_FAILURE,
    FORGE_E_INCOMPLETE_SESSION,
    FORGE_E_LENGTH_MISMATCH,
    FORGE_E_NOT_DEFINED,
    FORGE_E_JOIN_MISMATCH,
    FORGE_E_INTERNAL,
    FORGE_STATUS_COUNT_
} forge_status;

typedef struct forge_context forge_context;
typedef struct forge_server forge_server;
typedef struct forge_chat forge_chat;

enum { FORGE_LOG_WARN = 0, FORGE_LOG_INFO = 1, FORGE_LOG_DEBUG = 2, FORGE_LOG_QUIET = -1 };

typedef struct forge_options {
    const char* workspace;    /* default "." */
    const char* config_path;  /* NULL: <workspace>/forge.toml if present */
    int has_seed;
    uint64_t seed;
    int mock;                 /* nonzero: offline seeded providers */
    int log_level;            /* FORGE_LOG_* ; logs go to stderr */
} forge_options;

FORGE_API const char* forge_version(void);
FORGE_API const char* forge_status_name(forge_status status);
/* 0 for FORGE_OK, 2 for input/validation errors, 1 for runtime failures. */
FORGE_API int forge_exit_code(forge_status status);
/* Message of the last failed call on this thread; never NULL. */
FORGE_API const char* forge_last_error(void);
/* Frees strings returned through char** out-parameters. */
FORGE_API void forge_string_free(char* s);

FORGE_API void forge_options_init(forge_options* options);
FORGE_API forge_status forge_context_create(const forge_options* options, forge_context** out);
FORGE_API void forge_context_destroy(forge_context* ctx);

/* Pipeline stages. Each writes its artifacts under the workspace and, when
 * out_json is non-NULL, returns a JSON summary to be freed with
 * forge_string_free. Zero-valued numeric arguments mean "use the config". */
FORGE_API forge_status forge_ingest(forge_context* ctx, const char* persona, char** out_json);
FORGE_API forge_status forge_clean(forge_context* ctx, const char* persona, char** out_json);
FORGE_API forge_status forge_synth(forge_context* ctx, const char* persona, int pairs_per_opinion, char** out_json);
FORGE_API forge_status forge_filter(forge_context* ctx, const char* persona, char** out_json);
FORGE_API forge_status forge_build_train(forge_context* ctx, const char* persona, char** out_json);
FORGE_API forge_status forge_index(forge_context* ctx, const char* persona, size_t max_tokens, char** out_json);
FORGE_API forge_status forge_search(forge_context* ctx, const char* persona, const char* query, size_t k,
                                    char** out_json);

/* mode: "profile_only" | "profile_rag" | "long_context".
 * dimension: "knowledge" | "tone" | NULL for both. */
FORGE_API forge_status forge_eval_mcq(forge_context* ctx, const char* persona, const char* dimension,
                                      const char* mode, int full, char** out_json);
/* fan_type: "new" | "old" | NULL for both. persona_url: NULL to run the
 * persona in-process, else the base URL of a running server. */
FORGE_API forge_status forge_eval_fan(forge_context* ctx, const char* persona, const char* fan_type,
                                      const char* mode, size_t sessions, const char* persona_url, char** out_json);
/* format: "table_text" | "json" | "csv". */
FORGE_API forge_status forge_report(forge_context* ctx, const char* persona, const char* format, char** out_doc);
/* unit: "item" | "session". */
FORGE_API forge_status forge_correlate(forge_context* ctx, const char* persona, const char* human_csv,
                                       const char* mode, const char* unit, char** out_json);

/* HTTP persona service. */
FORGE_API forge_status forge_server_create(forge_context* ctx, const char* const* personas, size_t n_personas,
                                           const char* mode, const char* ui_dir, const char* transcript_log,
                                           forge_server** out);
/* port 0 picks a free port; the bound port is stored in *bound_port. */
FORGE_API forge_status forge_server_bind(forge_server* server, const char* host, int port, int* bound_port);
/* Blocks until forge_server_stop is called from another thread. */
FORGE_API forge_status forge_server_run(forge_server* server);
FORGE_API void forge_server_stop(forge_server* server);
FORGE_API void forge_server_destroy(forge_server* server);

/* In-process conversation with one persona. */
FORGE_API forge_status forge_chat_open(forge_context* ctx, const char* persona, const char* mode, forge_chat** out);
FORGE_API forge_status forge_chat_send(forge_chat* chat, const char* message, char** out_reply);
FORGE_API forge_status forge_chat_history(forge_chat* chat, char** out_json);
FORGE_API void forge_chat_close(forge_chat* chat);

/* Correlation coefficients; FORGE_E_NOT_DEFINED for constant input or n < 2. */
FORGE_API forge_status forge_pearson(const double* x, const double* y, size_t n, double* out);
FORGE_API forge_status forge_spearman(const double* x, const double* y, size_t n, double* out);
FORGE_API forge_status forge_kendall(const double* x, const double* y, size_t n, double* out);

#ifdef __cplusplus
}
#endif

#endif
