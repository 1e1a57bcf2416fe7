/* corrnet — market correlation-network analysis.
 *
 * C API of the shared library. All functions return corrnet_status unless
 * stated otherwise; on any failure corrnet_errmsg() carries a thread-local
 * description of the last error. Objects returned through out-parameters
 * are owned by the caller and released with the matching _free function.
 */
#ifndef CORRNET_H
#define CORRNET_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define CORRNET_API __declspec(dllexport)
#else
#define CORRNET_API __attribute__((visibility("default")))
#endif

typedef enum corrnet_status {
  CORRNET_OK = 0,
  CORRNET_ERR_ARGUMENT = 1, /* precondition violated by the caller */
  CORRNET_ERR_PARSE = 2,    /* malformed input file */
  CORRNET_ERR_DATA = 3,     /* well-formed input violating a data invariant */
  CORRNET_ERR_COMPUTE = 4,  /* statistic mathematically unavailable */
  CORRNET_ERR_IO = 5,       /* file system failure */
  CORRNET_ERR_INTERNAL = 6
} corrnet_status;

CORRNET_API const char* corrnet_version(void);

/* Message for the most recent failure on this thread; empty after success. */
CORRNET_API const char* corrnet_errmsg(void);

/* ------------------------------------------------------------------ */
/* Panels                                                             */
/* ------------------------------------------------------------------ */

typedef struct corrnet_panel corrnet_panel;

/* format: "long" (date,asset_id,adjusted_close) or "wide" (date,<id>,...). */
CORRNET_API corrnet_status corrnet_panel_load_prices(const char* path, const char* format,
                                                     corrnet_panel** out);

/* Attaches kind/sector labels from a sector map CSV to the panel assets. */
CORRNET_API corrnet_status corrnet_panel_apply_sector_map(corrnet_panel* panel, const char* path);

/* Daily log returns; gaps in the price series are never spanned. */
CORRNET_API corrnet_status corrnet_panel_log_returns(const corrnet_panel* prices,
                                                     corrnet_panel** out);

CORRNET_API corrnet_status corrnet_panel_write_wide_csv(const corrnet_panel* panel,
                                                        const char* path);

CORRNET_API void corrnet_panel_free(corrnet_panel* panel);

CORRNET_API size_t corrnet_panel_n_dates(const corrnet_panel* panel);
CORRNET_API size_t corrnet_panel_n_assets(const corrnet_panel* panel);

/* ISO-8601 date / asset id copied into buf (truncated if needed). */
CORRNET_API corrnet_status corrnet_panel_date(const corrnet_panel* panel, size_t idx, char* buf,
                                              size_t bufsize);
CORRNET_API corrnet_status corrnet_panel_asset_id(const corrnet_panel* panel, size_t idx,
                                                  char* buf, size_t bufsize);

/* Returns 1 and stores the value when present, 0 when the cell is missing,
 * -1 on bad indices. */
CORRNET_API int corrnet_panel_value(const corrnet_panel* panel, size_t date_idx, size_t asset_idx,
                                    double* out);

/* ------------------------------------------------------------------ */
/* Correlation matrices                                               */
/* ------------------------------------------------------------------ */

typedef struct corrnet_corr corrnet_corr;

/* Pearson matrix of `returns` over [win_start, win_end) after removing the
 * trim_k days with the largest absolute cross-sectional mean return. Pairs
 * with fewer than min_overlap joint observations are undefined. */
CORRNET_API corrnet_status corrnet_corr_compute(const corrnet_panel* returns,
                                                const char* win_start, const char* win_end,
                                                int trim_k, int min_overlap, corrnet_corr** out);

CORRNET_API void corrnet_corr_free(corrnet_corr* corr);

CORRNET_API size_t corrnet_corr_n_assets(const corrnet_corr* corr);

/* Returns 1 and stores rho when the pair is defined, 0 when undefined,
 * -1 on bad indices. */
CORRNET_API int corrnet_corr_rho(const corrnet_corr* corr, size_t i, size_t j, double* out);

/* Pairwise joint observation count, or -1 on bad indices. */
CORRNET_API long long corrnet_corr_n_obs(const corrnet_corr* corr, size_t i, size_t j);

CORRNET_API corrnet_status corrnet_corr_write_csv(const corrnet_corr* corr, const char* path);
CORRNET_API corrnet_status corrnet_corr_cache_write(const corrnet_corr* corr, const char* path);
CORRNET_API corrnet_status corrnet_corr_cache_read(const char* path, corrnet_corr** out);

/* ------------------------------------------------------------------ */
/* Threshold networks                                                 */
/* ------------------------------------------------------------------ */

typedef struct corrnet_network corrnet_network;

/* Keeps the ceil(quantile * P) highest-correlation defined pairs. */
CORRNET_API corrnet_status corrnet_network_build(const corrnet_corr* corr, double quantile,
                                                 corrnet_network** out);

CORRNET_API void corrnet_network_free(corrnet_network* net);

CORRNET_API size_t corrnet_network_n_nodes(const corrnet_network* net);
CORRNET_API size_t corrnet_network_n_edges(const corrnet_network* net);

/* |edges| over all unordered node pairs. */
CORRNET_API double corrnet_network_density(const corrnet_network* net);
/* |edges| over defined pairs (the base rate for index linkage). */
CORRNET_API double corrnet_network_global_density(const corrnet_network* net);

/* Edge endpoints/weight by edge index; ids copied into the buffers. */
CORRNET_API corrnet_status corrnet_network_edge(const corrnet_network* net, size_t edge_idx,
                                                char* id_a, size_t id_a_size, char* id_b,
                                                size_t id_b_size, double* rho);

/* format: "edge_list", "graphml", or "dot". */
CORRNET_API corrnet_status corrnet_network_export(const corrnet_network* net, const char* format,
                                                  const char* path);

/* ------------------------------------------------------------------ */
/* Sector statistics                                                  */
/* ------------------------------------------------------------------ */

/* Sector names are "Major" or "Major.Minor", e.g. "Finance.RealEstate". */

typedef struct corrnet_merge_result {
  double t;            /* meaningful only when has_t != 0 */
  int has_t;
  double p_one_sided;  /* meaningful only when has_t != 0 */
  int merged;
  int degenerate;
  long long n_within;  /* defined within pairs, both sectors pooled */
  long long n_between;
  double density_within;   /* < 0 when undefined */
  double density_between;  /* < 0 when undefined */
} corrnet_merge_result;

CORRNET_API corrnet_status corrnet_merge_tstat(const corrnet_network* net, const char* sector_a,
                                               const char* sector_b, double alpha_merge,
                                               corrnet_merge_result* out);

typedef struct corrnet_self_cluster_result {
  double t_min;  /* meaningful only when has_t_min != 0 */
  int has_t_min;
  char argmin_sector[64];
  int any_excluded;
} corrnet_self_cluster_result;

/* others: comma-separated sector names. */
CORRNET_API corrnet_status corrnet_self_clustering(const corrnet_network* net, const char* sector,
                                                   const char* others,
                                                   corrnet_self_cluster_result* out);

typedef enum corrnet_link_status {
  CORRNET_LINKED = 0,
  CORRNET_UNLINKED = 1,
  CORRNET_INDETERMINATE = 2
} corrnet_link_status;

typedef struct corrnet_index_link_result {
  double t;  /* meaningful only when has_t != 0 */
  int has_t;
  corrnet_link_status status;
  int degenerate;
  double p_hat;
  double p0;
  long long n;
} corrnet_index_link_result;

CORRNET_API corrnet_status corrnet_index_linkage(const corrnet_network* net, const char* index_id,
                                                 const char* sector,
                                                 corrnet_index_link_result* out);

typedef struct corrnet_trend_result {
  double slope;
  double intercept;
  double t_slope;  /* +inf on a perfect nonzero-slope fit */
  double p;        /* two-sided, floored at 1e-300 */
  int degenerate_fit;
} corrnet_trend_result;

CORRNET_API corrnet_status corrnet_slope_trend_test(const double* series, size_t n,
                                                    corrnet_trend_result* out);

typedef struct corrnet_sign_change_result {
  int changed;
  double p_sign;
  double pre_mean;
  double year_mean;
} corrnet_sign_change_result;

/* quarters: ISO dates, comma-separated, aligned with values. */
CORRNET_API corrnet_status corrnet_sign_change_test(const char* quarters, const double* values,
                                                    size_t n, int year,
                                                    corrnet_sign_change_result* out);

typedef struct corrnet_decline_result {
  double t;
  int has_t;
  double p_one_sided;
  long long n_decline;
  long long n_rise;
  double mean_decline;
  double mean_rise;
  int degenerate;
} corrnet_decline_result;

CORRNET_API corrnet_status corrnet_decline_coincidence_test(const double* avg_corr,
                                                            const double* market_return, size_t n,
                                                            corrnet_decline_result* out);

/* ------------------------------------------------------------------ */
/* Synthetic factor-model market                                      */
/* ------------------------------------------------------------------ */

/* Generates the panel described by a synth spec file into a returns panel
 * handle (see README for the spec schema). seed_override < 0 keeps the
 * spec's seed. */
CORRNET_API corrnet_status corrnet_synth_generate(const char* spec_path, long long seed_override,
                                                  corrnet_panel** out);

/* ------------------------------------------------------------------ */
/* Pipeline commands (the CLI is a thin wrapper over these)           */
/* ------------------------------------------------------------------ */

typedef struct corrnet_run_overrides {
  const char* out_dir;  /* NULL: keep config value */
  int trim_k;           /* < 0: keep config value */
  double quantile;      /* <= 0: keep config value */
  long long seed;       /* < 0: keep spec value (synth only) */
  int threads;          /* <= 0: CORRNET_THREADS env, then hardware */
} corrnet_run_overrides;

CORRNET_API corrnet_status corrnet_analyze(const char* config_path,
                                           const corrnet_run_overrides* overrides);

CORRNET_API corrnet_status corrnet_synth(const char* spec_path, const char* out_dir,
                                         const corrnet_run_overrides* overrides);

/* window: "all", "YYYY", or "YYYY-YYYY"; format as in corrnet_network_export. */
CORRNET_API corrnet_status corrnet_export(const char* config_path, const char* window,
                                          const char* format,
                                          const corrnet_run_overrides* overrides);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* CORRNET_H */
