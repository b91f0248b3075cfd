// Command-line front end; everything goes through the C API in ufgraph.h.

#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ufgraph.h"

namespace {

struct SpecDeleter {
  void operator()(ufg_spec* s) const { ufg_spec_free(s); }
};
struct DatasetDeleter {
  void operator()(ufg_dataset* d) const { ufg_dataset_free(d); }
};
struct ResultDeleter {
  void operator()(ufg_result* r) const { ufg_result_free(r); }
};

using SpecPtr = std::unique_ptr<ufg_spec, SpecDeleter>;
using DatasetPtr = std::unique_ptr<ufg_dataset, DatasetDeleter>;
using ResultPtr = std::unique_ptr<ufg_result, ResultDeleter>;

[[noreturn]] void die(const char* what) {
  std::fprintf(stderr, "ufgraph: %s: %s\n", what, ufg_last_error());
  std::exit(1);
}

struct CommonOpts {
  std::string config;
  uint64_t seed = 0;
  bool seed_set = false;
  uint32_t workers = 0;
  std::string out_dir;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config, "experiment config (JSON)")
      ->required();
  cmd->add_option("--seed", opts.seed, "override federation.seed")
      ->each([&](const std::string&) { opts.seed_set = true; });
  cmd->add_option("--workers", opts.workers,
                  "override federation.workers (parallel clients)");
  cmd->add_option("--out", opts.out_dir, "override output.dir");
}

SpecPtr load_spec(const CommonOpts& opts) {
  ufg_spec* raw = nullptr;
  if (ufg_spec_load(opts.config.c_str(), &raw) != UFG_OK) die("config");
  SpecPtr spec(raw);
  if (opts.seed_set && ufg_spec_set_seed(spec.get(), opts.seed) != UFG_OK)
    die("seed");
  if (opts.workers > 0 &&
      ufg_spec_set_workers(spec.get(), opts.workers) != UFG_OK)
    die("workers");
  if (!opts.out_dir.empty() &&
      ufg_spec_set_output_dir(spec.get(), opts.out_dir.c_str()) != UFG_OK)
    die("out dir");
  return spec;
}

DatasetPtr open_dataset(const ufg_spec* spec) {
  ufg_dataset* raw = nullptr;
  if (ufg_dataset_open(spec, &raw) != UFG_OK) die("dataset");
  return DatasetPtr(raw);
}

void print_summary(const ufg_result* res) {
  const size_t runs = ufg_result_run_count(res);
  for (size_t r = 0; r < runs; ++r) {
    const size_t rounds = ufg_result_round_count(res, r);
    if (rounds == 0) continue;
    ufg_round_metrics m;
    if (ufg_result_round_metrics(res, r, rounds - 1, &m) != UFG_OK) continue;
    std::fprintf(stderr,
                 "ufgraph: %s: round %llu  loss=%.4f  hr10=%.2f  ndcg10=%.2f\n",
                 ufg_result_run_name(res, r),
                 static_cast<unsigned long long>(m.round), m.loss, m.hr10,
                 m.ndcg10);
  }
}

void finish(const ufg_spec* spec, const ufg_result* res) {
  if (ufg_result_write_outputs(res, spec) != UFG_OK) die("write outputs");
  print_summary(res);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ufgraph — graph-guided federated recommendation simulator"};
  app.require_subcommand(1);

  CommonOpts run_opts, ablate_opts, sweep_opts, validate_opts;
  std::vector<std::string> variants;
  std::vector<double> alphas;

  CLI::App* cmd_run = app.add_subcommand("run", "run one experiment");
  add_common(cmd_run, run_opts);

  CLI::App* cmd_ablate =
      app.add_subcommand("ablate", "run the ablation variants side by side");
  add_common(cmd_ablate, ablate_opts);
  cmd_ablate->add_option("--variants", variants,
                         "subset of full,nT,nJ,nB,fedavg (default: config)")
      ->delimiter(',');

  CLI::App* cmd_sweep =
      app.add_subcommand("dp-sweep", "rerun with each DP noise intensity");
  add_common(cmd_sweep, sweep_opts);
  cmd_sweep->add_option("--alphas", alphas,
                        "noise intensities to sweep (default: config)")
      ->delimiter(',');

  CLI::App* cmd_validate = app.add_subcommand(
      "validate-config", "parse, validate, and echo the canonical config");
  add_common(cmd_validate, validate_opts);

  CLI11_PARSE(app, argc, argv);

  if (cmd_run->parsed()) {
    SpecPtr spec = load_spec(run_opts);
    DatasetPtr ds = open_dataset(spec.get());
    ufg_result* raw = nullptr;
    if (ufg_run(spec.get(), ds.get(), &raw) != UFG_OK) die("run");
    ResultPtr res(raw);
    finish(spec.get(), res.get());
  } else if (cmd_ablate->parsed()) {
    SpecPtr spec = load_spec(ablate_opts);
    DatasetPtr ds = open_dataset(spec.get());
    std::vector<const char*> names;
    for (const auto& v : variants) names.push_back(v.c_str());
    ufg_result* raw = nullptr;
    if (ufg_run_ablation(spec.get(), ds.get(),
                         names.empty() ? nullptr : names.data(), names.size(),
                         &raw) != UFG_OK)
      die("ablate");
    ResultPtr res(raw);
    finish(spec.get(), res.get());
  } else if (cmd_sweep->parsed()) {
    SpecPtr spec = load_spec(sweep_opts);
    DatasetPtr ds = open_dataset(spec.get());
    ufg_result* raw = nullptr;
    if (ufg_run_dp_sweep(spec.get(), ds.get(),
                         alphas.empty() ? nullptr : alphas.data(),
                         alphas.size(), &raw) != UFG_OK)
      die("dp-sweep");
    ResultPtr res(raw);
    finish(spec.get(), res.get());
  } else if (cmd_validate->parsed()) {
    SpecPtr spec = load_spec(validate_opts);
    if (ufg_spec_validate_paths(spec.get()) != UFG_OK) die("validate");
    DatasetPtr ds = open_dataset(spec.get());
    ufg_dataset_info info;
    if (ufg_dataset_stats(ds.get(), &info) != UFG_OK) die("stats");
    std::fprintf(stderr,
                 "ufgraph: dataset ok: %llu users, %llu items, %llu "
                 "interactions, sparsity %.2f%%\n",
                 static_cast<unsigned long long>(info.num_users),
                 static_cast<unsigned long long>(info.num_items),
                 static_cast<unsigned long long>(info.num_interactions),
                 100.0 * info.sparsity);
    char* json = nullptr;
    if (ufg_spec_to_json(spec.get(), &json) != UFG_OK) die("config echo");
    std::fputs(json, stdout);
    ufg_string_free(json);
  }
  return 0;
}
