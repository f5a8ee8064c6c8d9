/* C interface to the hints toolkit. */
#ifndef HINTS_H
#define HINTS_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(HINTS_BUILDING_LIBRARY)
#define HINTS_API __attribute__((visibility("default")))
#else
#define HINTS_API
#endif

typedef enum hints_status {
  HINTS_OK = 0,
  HINTS_ERR_USAGE = 1,    /* bad arguments or configuration */
  HINTS_ERR_DATA = 2,     /* malformed or missing input */
  HINTS_ERR_CONTRACT = 3, /* inputs violate a documented precondition */
  HINTS_ERR_INTERNAL = 4
} hints_status;

typedef enum hints_task { HINTS_TASK_SYNTAX = 1, HINTS_TASK_ENTITY = 2 } hints_task;

typedef struct hints_corpus hints_corpus;
typedef struct hints_model hints_model;

/* Message for the last failing call on this thread; never NULL. */
HINTS_API const char* hints_last_error(void);
HINTS_API const char* hints_version(void);
/* Frees strings returned through char** out-parameters. */
HINTS_API void hints_string_free(char* s);

/* ---- corpora ---------------------------------------------------------- */

/* columns: e.g. "token,pos,chunk,ner" ("_" skips a column).
 * role: "labeled1", "labeled2", "unlabeled" or "test". */
HINTS_API hints_status hints_corpus_read(const char* path, const char* columns, const char* role,
                                         hints_corpus** out, size_t* repairs);
HINTS_API hints_status hints_corpus_parse(const char* text, const char* columns, const char* role,
                                          hints_corpus** out, size_t* repairs);
HINTS_API hints_status hints_corpus_write(const hints_corpus* corpus, const char* path, const char* columns);
HINTS_API size_t hints_corpus_size(const hints_corpus* corpus);
HINTS_API void hints_corpus_free(hints_corpus* corpus);

/* ---- synthetic data --------------------------------------------------- */

/* config: "key = value" lines; NULL or "" for defaults. */
HINTS_API hints_status hints_synth_generate(const char* config, size_t n_sentences, hints_corpus** out);
/* out receives d1, d2, unlab, test, dev in that order. */
HINTS_API hints_status hints_synth_split(const hints_corpus* corpus, size_t d1, size_t d2, size_t unlab, size_t test,
                                         size_t dev, uint64_t seed, int two_sided, hints_corpus* out[5]);

/* ---- models ----------------------------------------------------------- */

/* learner: "hmm" or "perceptron". */
HINTS_API hints_status hints_model_train(const hints_corpus* corpus, hints_task task, const char* learner,
                                         hints_model** out);
HINTS_API hints_status hints_model_save(const hints_model* model, const char* path);
HINTS_API hints_status hints_model_load(const char* path, hints_model** out);
/* Copy of `input` whose labeling for the model's task is replaced by
 * predictions; confidences (optional, one per sentence) go to *confidence,
 * to be released with hints_doubles_free. */
HINTS_API hints_status hints_model_decode(const hints_model* model, const hints_corpus* input, hints_task task,
                                          hints_corpus** out, double** confidence);
HINTS_API void hints_model_free(hints_model* model);
HINTS_API void hints_doubles_free(double* p);

/* ---- evaluation ------------------------------------------------------- */

/* TSV report of span P/R/F and token accuracy. */
HINTS_API hints_status hints_eval(const hints_corpus* gold, const hints_corpus* predicted, hints_task task,
                                  char** report, double* f1);
/* McNemar between two prediction corpora; per_token selects token units. */
HINTS_API hints_status hints_mcnemar(const hints_corpus* gold, const hints_corpus* a, const hints_corpus* b,
                                     hints_task task, int per_token, char** report);

/* ---- analysis --------------------------------------------------------- */

/* constraint: "full", "pos-only", "np-only", "constant" or a path to a
 * rules file. */
HINTS_API hints_status hints_analyze_discrimination(const hints_corpus* pool, const hints_model* h0,
                                                    const char* constraint, char** report);
HINTS_API hints_status hints_analyze_usefulness(const hints_model* h, const hints_corpus* reference, double epsilon,
                                                int per_token, int as_printed, char** report, int* useful);
HINTS_API hints_status hints_analyze_uncorrelated(const hints_model* h1, const hints_model* h2,
                                                  const hints_corpus* pool, double tolerance, char** report,
                                                  int* passes);
HINTS_API hints_status hints_verify_bound(const char* instance_text, int as_printed, char** report, int* holds);
HINTS_API double hints_hamming_threshold(double mean_len, size_t labels_per_vertex);

/* ---- experiments ------------------------------------------------------ */

/* Runs a JSON experiment spec; *failed_cells gets the number of cells that
 * failed (the run still completes). *summary is the index TSV. */
HINTS_API hints_status hints_experiment_run(const char* spec_json, size_t* failed_cells, char** summary);

#ifdef __cplusplus
}
#endif

#endif
