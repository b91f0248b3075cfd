#include "ufgraph.h"

#include <cstring>
#include <string>

#include "config.hpp"
#include "error.hpp"
#include "io.hpp"
#include "runner.hpp"

using namespace ufg;

struct ufg_spec {
  ExperimentSpec spec;
};

struct ufg_dataset {
  InteractionDataset ds;
};

struct ufg_result {
  RunOutput out;
};

namespace {

thread_local std::string t_last_error;

ufg_status to_status(const Error& e) {
  switch (e.code()) {
    case ErrorCode::Io: return UFG_ERR_IO;
    case ErrorCode::Parse: return UFG_ERR_PARSE;
    case ErrorCode::Config: return UFG_ERR_CONFIG;
    case ErrorCode::Data: return UFG_ERR_DATA;
    case ErrorCode::Dimension: return UFG_ERR_DIMENSION;
    case ErrorCode::Runtime: return UFG_ERR_RUNTIME;
    case ErrorCode::InvalidArg: return UFG_ERR_INVALID_ARG;
  }
  return UFG_ERR_RUNTIME;
}

template <typename Fn>
ufg_status guarded(Fn&& fn) {
  try {
    fn();
    t_last_error.clear();
    return UFG_OK;
  } catch (const Error& e) {
    t_last_error = e.what();
    return to_status(e);
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return UFG_ERR_RUNTIME;
  } catch (...) {
    t_last_error = "unknown error";
    return UFG_ERR_RUNTIME;
  }
}

ufg_status invalid(const char* msg) {
  t_last_error = msg;
  return UFG_ERR_INVALID_ARG;
}

}  // namespace

extern "C" {

const char* ufg_version(void) { return "0.1.0"; }

const char* ufg_last_error(void) { return t_last_error.c_str(); }

void ufg_string_free(char* s) { delete[] s; }

ufg_status ufg_spec_load(const char* path, ufg_spec** out) {
  if (!path || !out) return invalid("ufg_spec_load: null argument");
  return guarded([&] {
    auto* h = new ufg_spec{parse_config_file(path)};
    *out = h;
  });
}

ufg_status ufg_spec_parse_json(const char* json_text, ufg_spec** out) {
  if (!json_text || !out) return invalid("ufg_spec_parse_json: null argument");
  return guarded([&] {
    auto* h = new ufg_spec{parse_config_json(json_text)};
    *out = h;
  });
}

ufg_status ufg_spec_set_seed(ufg_spec* spec, uint64_t seed) {
  if (!spec) return invalid("ufg_spec_set_seed: null spec");
  spec->spec.federation.seed = seed;
  t_last_error.clear();
  return UFG_OK;
}

ufg_status ufg_spec_set_workers(ufg_spec* spec, uint32_t workers) {
  if (!spec) return invalid("ufg_spec_set_workers: null spec");
  if (workers == 0) return invalid("workers must be >= 1");
  spec->spec.federation.workers = workers;
  t_last_error.clear();
  return UFG_OK;
}

ufg_status ufg_spec_set_output_dir(ufg_spec* spec, const char* dir) {
  if (!spec || !dir) return invalid("ufg_spec_set_output_dir: null argument");
  spec->spec.output.dir = dir;
  t_last_error.clear();
  return UFG_OK;
}

ufg_status ufg_spec_to_json(const ufg_spec* spec, char** out_json) {
  if (!spec || !out_json) return invalid("ufg_spec_to_json: null argument");
  return guarded([&] {
    const std::string text = spec_to_json(spec->spec);
    char* buf = new char[text.size() + 1];
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *out_json = buf;
  });
}

ufg_status ufg_spec_validate_paths(const ufg_spec* spec) {
  if (!spec) return invalid("ufg_spec_validate_paths: null spec");
  return guarded([&] { validate_spec_paths(spec->spec); });
}

void ufg_spec_free(ufg_spec* spec) { delete spec; }

ufg_status ufg_dataset_open(const ufg_spec* spec, ufg_dataset** out) {
  if (!spec || !out) return invalid("ufg_dataset_open: null argument");
  return guarded([&] {
    auto* h = new ufg_dataset{open_dataset(spec->spec)};
    *out = h;
  });
}

ufg_status ufg_dataset_stats(const ufg_dataset* ds, ufg_dataset_info* out) {
  if (!ds || !out) return invalid("ufg_dataset_stats: null argument");
  out->num_users = ds->ds.num_users;
  out->num_items = ds->ds.num_items;
  out->num_interactions = ds->ds.total_interactions();
  out->sparsity = ds->ds.sparsity();
  t_last_error.clear();
  return UFG_OK;
}

void ufg_dataset_free(ufg_dataset* ds) { delete ds; }

ufg_status ufg_run(const ufg_spec* spec, const ufg_dataset* ds,
                   ufg_result** out) {
  if (!spec || !ds || !out) return invalid("ufg_run: null argument");
  return guarded([&] {
    auto* h = new ufg_result{run_single(spec->spec, ds->ds)};
    *out = h;
  });
}

ufg_status ufg_run_ablation(const ufg_spec* spec, const ufg_dataset* ds,
                            const char* const* variants, size_t num_variants,
                            ufg_result** out) {
  if (!spec || !ds || !out) return invalid("ufg_run_ablation: null argument");
  return guarded([&] {
    std::vector<std::string> list;
    if (variants && num_variants > 0) {
      for (size_t i = 0; i < num_variants; ++i) {
        if (!variants[i]) throw_config("null variant name");
        list.emplace_back(variants[i]);
      }
    } else {
      list = spec->spec.ablation_variants;
    }
    auto* h = new ufg_result{run_ablation_suite(spec->spec, ds->ds, list)};
    *out = h;
  });
}

ufg_status ufg_run_dp_sweep(const ufg_spec* spec, const ufg_dataset* ds,
                            const double* alphas, size_t num_alphas,
                            ufg_result** out) {
  if (!spec || !ds || !out) return invalid("ufg_run_dp_sweep: null argument");
  return guarded([&] {
    std::vector<double> list;
    if (alphas && num_alphas > 0)
      list.assign(alphas, alphas + num_alphas);
    else
      list = spec->spec.dp_sweep_alphas;
    auto* h = new ufg_result{run_dp_sweep(spec->spec, ds->ds, list)};
    *out = h;
  });
}

size_t ufg_result_run_count(const ufg_result* res) {
  return res ? res->out.runs.size() : 0;
}

const char* ufg_result_run_name(const ufg_result* res, size_t run) {
  if (!res || run >= res->out.runs.size()) return nullptr;
  return res->out.runs[run].name.c_str();
}

size_t ufg_result_round_count(const ufg_result* res, size_t run) {
  if (!res || run >= res->out.runs.size()) return 0;
  return res->out.runs[run].result.rounds.size();
}

ufg_status ufg_result_round_metrics(const ufg_result* res, size_t run,
                                    size_t index, ufg_round_metrics* out) {
  if (!res || !out) return invalid("ufg_result_round_metrics: null argument");
  if (run >= res->out.runs.size())
    return invalid("ufg_result_round_metrics: run index out of range");
  const auto& rounds = res->out.runs[run].result.rounds;
  if (index >= rounds.size())
    return invalid("ufg_result_round_metrics: round index out of range");
  const RoundMetrics& m = rounds[index];
  out->round = m.round;
  out->loss = m.loss;
  out->hr10 = m.hr10;
  out->ndcg10 = m.ndcg10;
  out->graph_rebuilt = m.graph_rebuilt ? 1 : 0;
  out->upload_floats = m.upload_floats;
  t_last_error.clear();
  return UFG_OK;
}

ufg_status ufg_result_write_csv(const ufg_result* res, size_t run,
                                const char* path) {
  if (!res || !path) return invalid("ufg_result_write_csv: null argument");
  if (run >= res->out.runs.size())
    return invalid("ufg_result_write_csv: run index out of range");
  return guarded([&] {
    atomic_write_file(path,
                      format_metrics_csv(res->out.runs[run].result.rounds));
  });
}

ufg_status ufg_result_write_outputs(const ufg_result* res,
                                    const ufg_spec* spec) {
  if (!res || !spec) return invalid("ufg_result_write_outputs: null argument");
  return guarded([&] { write_outputs(spec->spec, res->out); });
}

void ufg_result_free(ufg_result* res) { delete res; }

}  // extern "C"
