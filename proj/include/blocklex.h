/* blocklex — affect-lexicon induction over block-segmentation word vectors.
 *
 * C interface to the shared library: opaque handles, status codes, and
 * config-driven pipeline entry points. Every function that can fail returns
 * a blx_status; blx_last_error() describes the most recent failure on the
 * calling thread. Handles are freed with their matching *_free function.
 */
#ifndef BLOCKLEX_H
#define BLOCKLEX_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum blx_status {
  BLX_OK = 0,
  BLX_ERR_INTERNAL = 1,
  BLX_ERR_CONFIG = 2, /* invalid parameters or configuration */
  BLX_ERR_DATA = 3,   /* unreadable or inconsistent input data */
  BLX_ERR_NUMERIC = 4 /* numeric failure during computation */
} blx_status;

const char* blx_version(void);

/* Message for the last failing call on this thread; empty if none. */
const char* blx_last_error(void);

/* Frees strings returned through char** out parameters. */
void blx_string_free(char* s);

typedef struct blx_corpus blx_corpus;
typedef struct blx_index blx_index;
typedef struct blx_graph blx_graph;
typedef struct blx_lexicon blx_lexicon;
typedef struct blx_vectors blx_vectors;
typedef struct blx_scores blx_scores;

/* ---- corpus -------------------------------------------------------------- */

blx_status blx_corpus_load(const char* path, int lowercase, uint32_t min_token_len,
                           blx_corpus** out);
void blx_corpus_free(blx_corpus* corpus);
uint64_t blx_corpus_token_count(const blx_corpus* corpus);
uint32_t blx_corpus_vocab_size(const blx_corpus* corpus);

/* ---- block inverted index ------------------------------------------------ */

blx_status blx_index_build(const blx_corpus* corpus, uint32_t block_size, double overlap,
                           blx_index** out);
blx_status blx_index_save(const blx_index* index, const char* path);
blx_status blx_index_open(const char* path, blx_index** out);
void blx_index_free(blx_index* index);
uint32_t blx_index_block_count(const blx_index* index);
uint64_t blx_index_token_count(const blx_index* index);
uint32_t blx_index_vocab_size(const blx_index* index);

/* Sorted block ids containing the word. *out_len receives the posting count;
 * up to cap ids are copied into buf. Words outside the vocabulary have zero
 * postings. Returns BLX_ERR_CONFIG when cap is too small (out_len is still
 * set, so call once with cap = 0 to size the buffer). */
blx_status blx_index_postings(const blx_index* index, const char* word, uint32_t* buf,
                              uint32_t cap, uint32_t* out_len);

/* ---- synset graph and lexicon -------------------------------------------- */

blx_status blx_graph_load(const char* path, blx_graph** out);
void blx_graph_free(blx_graph* graph);
uint32_t blx_graph_synset_count(const blx_graph* graph);

blx_status blx_lexicon_load(const char* path, blx_lexicon** out);
void blx_lexicon_free(blx_lexicon* lexicon);
uint32_t blx_lexicon_size(const blx_lexicon* lexicon);

/* ---- synset feature vectors ---------------------------------------------- */

blx_status blx_vectors_build(const blx_index* index, const blx_graph* graph, blx_vectors** out);
blx_status blx_vectors_save(const blx_vectors* vectors, const char* path);
blx_status blx_vectors_open(const char* path, blx_vectors** out);
void blx_vectors_free(blx_vectors* vectors);
uint32_t blx_vectors_dim(const blx_vectors* vectors);
uint64_t blx_vectors_count(const blx_vectors* vectors);

/* ---- score tables --------------------------------------------------------- */

/* TSV `synset-id \t score [\t provenance]`, ordered by synset id. */
blx_status blx_scores_open(const char* path, blx_scores** out);
blx_status blx_scores_save(const blx_scores* scores, const char* path);
void blx_scores_free(blx_scores* scores);
uint64_t blx_scores_size(const blx_scores* scores);
blx_status blx_scores_get(const blx_scores* scores, const char* synset_id, double* out_score);

/* ---- random-walk refinement ----------------------------------------------- */

/* a_i <- (alpha/|C(i)|) sum_{j in C(i)} a_j + (1-alpha) e_i over gloss edges,
 * run to convergence (tol on the max per-node change) or max_iters. */
blx_status blx_random_walk(const blx_graph* graph, const blx_scores* initial, double alpha,
                           uint32_t max_iters, double tol, blx_scores** out,
                           uint32_t* out_iterations, int* out_converged);

/* ---- evaluation ------------------------------------------------------------ */

/* p-normalized Kendall tau distance between two score tables over the
 * synsets they share: (n_d + p * n_u) / (h(h-1)/2). */
blx_status blx_evaluate(const blx_scores* predicted, const blx_scores* gold, double p,
                        double* out_tau, uint64_t* out_h, uint64_t* out_nd, uint64_t* out_nu);

/* ---- config-driven pipeline ------------------------------------------------ */

/* config_json is the configuration text (not a path); see the README for the
 * schema. blx_run executes index -> vectors -> select -> train -> scores ->
 * walk -> eval for every grid point and writes reports under output_dir.
 * When out_report_json is non-null it receives a malloc'd JSON array of the
 * per-point reports; free it with blx_string_free. */
blx_status blx_run(const char* config_json, char** out_report_json);

/* Runs every grid point through the named stage only:
 * index | vectors | select | train | scores | walk | eval. */
blx_status blx_run_stage(const char* config_json, const char* stage);

/* Model selection: evaluates the (b, o) grid on the validation split, picks
 * the best point, and computes the test tau only for it. Writes sweep.csv
 * and sweep_result.json under output_dir. */
blx_status blx_sweep(const char* config_json, char** out_report_json);

/* CSV of (position, token, level) for corpus positions [begin, end), where
 * level is the mean score of the synsets listing the token. */
blx_status blx_dump_tokens(const char* config_json, const char* scores_path, uint64_t begin,
                           uint64_t end, const char* out_csv_path);

#ifdef __cplusplus
}
#endif

#endif /* BLOCKLEX_H */
