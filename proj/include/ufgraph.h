/* ufgraph — deterministic simulator of a graph-guided federated
 * recommendation protocol. C API over the C++ core: opaque handles, integer
 * status codes, thread-local error messages. */

#ifndef UFGRAPH_H
#define UFGRAPH_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ufg_status {
  UFG_OK = 0,
  UFG_ERR_IO = 1,
  UFG_ERR_PARSE = 2,
  UFG_ERR_CONFIG = 3,
  UFG_ERR_DATA = 4,
  UFG_ERR_DIMENSION = 5,
  UFG_ERR_RUNTIME = 6,
  UFG_ERR_INVALID_ARG = 7
} ufg_status;

typedef struct ufg_spec ufg_spec;       /* parsed + validated experiment config */
typedef struct ufg_dataset ufg_dataset; /* loaded and split interaction data */
typedef struct ufg_result ufg_result;   /* one or more named runs of metrics */

typedef struct ufg_dataset_info {
  uint64_t num_users;
  uint64_t num_items;
  uint64_t num_interactions;
  double sparsity; /* 1 - interactions / (users * items), in [0, 1] */
} ufg_dataset_info;

typedef struct ufg_round_metrics {
  uint64_t round;
  double loss;
  double hr10;    /* percent */
  double ndcg10;  /* percent */
  int graph_rebuilt;
  uint64_t upload_floats;
} ufg_round_metrics;

const char* ufg_version(void);
/* Message for the most recent failing call on this thread ("" if none). */
const char* ufg_last_error(void);
void ufg_string_free(char* s);

ufg_status ufg_spec_load(const char* path, ufg_spec** out);
ufg_status ufg_spec_parse_json(const char* json_text, ufg_spec** out);
ufg_status ufg_spec_set_seed(ufg_spec* spec, uint64_t seed);
ufg_status ufg_spec_set_workers(ufg_spec* spec, uint32_t workers);
ufg_status ufg_spec_set_output_dir(ufg_spec* spec, const char* dir);
/* Canonical JSON for the spec; free with ufg_string_free. */
ufg_status ufg_spec_to_json(const ufg_spec* spec, char** out_json);
/* Checks that every referenced path exists. */
ufg_status ufg_spec_validate_paths(const ufg_spec* spec);
void ufg_spec_free(ufg_spec* spec);

ufg_status ufg_dataset_open(const ufg_spec* spec, ufg_dataset** out);
ufg_status ufg_dataset_stats(const ufg_dataset* ds, ufg_dataset_info* out);
void ufg_dataset_free(ufg_dataset* ds);

/* Runs T federation rounds per the spec. */
ufg_status ufg_run(const ufg_spec* spec, const ufg_dataset* ds,
                   ufg_result** out);
/* variants == NULL uses the spec's ablation_variants list. */
ufg_status ufg_run_ablation(const ufg_spec* spec, const ufg_dataset* ds,
                            const char* const* variants, size_t num_variants,
                            ufg_result** out);
/* alphas == NULL uses the spec's dp_sweep_alphas list. */
ufg_status ufg_run_dp_sweep(const ufg_spec* spec, const ufg_dataset* ds,
                            const double* alphas, size_t num_alphas,
                            ufg_result** out);

size_t ufg_result_run_count(const ufg_result* res);
const char* ufg_result_run_name(const ufg_result* res, size_t run);
size_t ufg_result_round_count(const ufg_result* res, size_t run);
ufg_status ufg_result_round_metrics(const ufg_result* res, size_t run,
                                    size_t index, ufg_round_metrics* out);
/* Metrics CSV for one run (header: round,loss,hr10,ndcg10,graph_rebuilt,
 * upload_floats), written atomically. */
ufg_status ufg_result_write_csv(const ufg_result* res, size_t run,
                                const char* path);
/* Writes every artifact the spec's output section configures (metrics
 * CSV(s), ablation/dp-sweep summary, graph dump, model snapshot). */
ufg_status ufg_result_write_outputs(const ufg_result* res,
                                    const ufg_spec* spec);
void ufg_result_free(ufg_result* res);

#ifdef __cplusplus
}
#endif

#endif /* UFGRAPH_H */
