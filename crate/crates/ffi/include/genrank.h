#ifndef GENRANK_H
#define GENRANK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GenrankStatus {
  GENRANK_STATUS_OK = 0,
  GENRANK_STATUS_CONFIG_ERROR = 1,
  GENRANK_STATUS_DATA_ERROR = 2,
  GENRANK_STATUS_RUNTIME_ERROR = 3,
  GENRANK_STATUS_NULL_POINTER = 4,
  GENRANK_STATUS_INVALID_UTF8 = 5,
  GENRANK_STATUS_OUT_OF_RANGE = 6,
} GenrankStatus;

/**
 * A tokenized document collection.
 */
typedef struct GenrankCorpus GenrankCorpus;

/**
 * A ranked list of document names and scores.
 */
typedef struct GenrankResults GenrankResults;

/**
 * Parameters of [`genrank_rerank`].
 */
typedef struct GenrankRerankParams {
  /**
   * Algorithm name such as `R-W-In+LM`, or `initial`.
   */
  const char *algorithm;
  /**
   * Size of the initial retrieval.
   */
  size_t k;
  /**
   * Ancestry size; ignored by algorithms without a graph.
   */
  size_t alpha;
  /**
   * Smoothing factor; ignored by algorithms on unsmoothed graphs.
   */
  double lambda;
  double mu;
  /**
   * 0 for language-model links, 1 for cosine links.
   */
  uint32_t link_mode;
} GenrankRerankParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call into the library from this thread.
 */
const char *genrank_last_error(void);

/**
 * Library version as a static nul-terminated string.
 */
const char *genrank_version(void);

/**
 * Loads a corpus file. `format` is `"jsonl"` or `"trec-sgml"`.
 *
 * # Safety
 * `path` and `format` must be nul-terminated strings; `out` must be writable.
 */
enum GenrankStatus genrank_corpus_load(const char *path,
                                       const char *format,
                                       struct GenrankCorpus **out);

/**
 * Builds a corpus from JSON lines of the form `{"name": ..., "text": ...}`.
 *
 * # Safety
 * `jsonl` must be a nul-terminated string; `out` must be writable.
 */
enum GenrankStatus genrank_corpus_from_jsonl(const char *jsonl, struct GenrankCorpus **out);

/**
 * # Safety
 * `corpus` must come from this library and not be used afterwards. Null is ignored.
 */
void genrank_corpus_free(struct GenrankCorpus *corpus);

/**
 * Number of documents, or 0 for a null handle.
 *
 * # Safety
 * `corpus` must be null or a live handle.
 */
size_t genrank_corpus_len(const struct GenrankCorpus *corpus);

/**
 * Log generation score `-KL(mle(text) || p_doc)` of `text` under the
 * Dirichlet-smoothed model of document `doc_name`. Terms unknown to the
 * corpus are ignored.
 *
 * # Safety
 * `corpus` must be a live handle, strings nul-terminated and `out` writable.
 */
enum GenrankStatus genrank_gen_log_prob(const struct GenrankCorpus *corpus,
                                        const char *doc_name,
                                        const char *text,
                                        double mu,
                                        double *out);

/**
 * Retrieves the top `params.k` documents for `query` and re-ranks them.
 *
 * # Safety
 * `corpus` and `params` must be valid, `query` and `params.algorithm`
 * nul-terminated, and `out` writable.
 */
enum GenrankStatus genrank_rerank(const struct GenrankCorpus *corpus,
                                  const char *query,
                                  const struct GenrankRerankParams *params,
                                  struct GenrankResults **out);

/**
 * Number of ranked entries, or 0 for a null handle.
 *
 * # Safety
 * `results` must be null or a live handle.
 */
size_t genrank_results_len(const struct GenrankResults *results);

/**
 * Entry `index` (0-based). The name pointer lives as long as `results`.
 *
 * # Safety
 * `results` must be a live handle; `name` and `score` writable.
 */
enum GenrankStatus genrank_results_get(const struct GenrankResults *results,
                                       size_t index,
                                       const char **name,
                                       double *score);

/**
 * # Safety
 * `results` must come from this library and not be used afterwards. Null is ignored.
 */
void genrank_results_free(struct GenrankResults *results);

/**
 * Smooths the row-major `n x n` matrix `weights` (`weights[o*n + g]` is the
 * edge `o -> g`) with factor `lambda` and writes its stationary
 * distribution to `out_pi` (length `n`).
 *
 * # Safety
 * `weights` must hold `n * n` values and `out_pi` room for `n`.
 */
enum GenrankStatus genrank_stationary_distribution(const double *weights,
                                                   size_t n,
                                                   double lambda,
                                                   double *out_pi);

/**
 * HITS authority and hub vectors (unit L2 norm) of the row-major `n x n`
 * matrix `weights`.
 *
 * # Safety
 * `weights` must hold `n * n` values; `out_auth` and `out_hub` room for `n`.
 */
enum GenrankStatus genrank_hits(const double *weights, size_t n, double *out_auth, double *out_hub);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GENRANK_H */
