#include "config.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "error.hpp"

namespace ufg {

namespace {

using json = nlohmann::ordered_json;

void reject_unknown(const json& obj, const std::string& section,
                    const std::set<std::string>& known) {
  for (const auto& [key, value] : obj.items()) {
    if (!known.count(key))
      throw_config("unknown config key '" +
                   (section.empty() ? key : section + "." + key) + "'");
  }
}

const json* get_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

std::string want(const std::string& section, const char* key) {
  return section.empty() ? key : section + "." + std::string(key);
}

std::string get_string(const json& obj, const std::string& section,
                       const char* key, const std::string& def) {
  const json* f = get_field(obj, key);
  if (!f) return def;
  if (!f->is_string())
    throw_config("expected string for " + want(section, key));
  return f->get<std::string>();
}

double get_double(const json& obj, const std::string& section, const char* key,
                  double def) {
  const json* f = get_field(obj, key);
  if (!f) return def;
  if (!f->is_number())
    throw_config("expected number for " + want(section, key));
  return f->get<double>();
}

std::size_t get_count(const json& obj, const std::string& section,
                      const char* key, std::size_t def) {
  const json* f = get_field(obj, key);
  if (!f) return def;
  if (!f->is_number_integer() || (f->is_number_integer() && f->get<long long>() < 0))
    throw_config("expected non-negative integer for " + want(section, key));
  return f->get<std::size_t>();
}

uint64_t get_u64(const json& obj, const std::string& section, const char* key,
                 uint64_t def) {
  const json* f = get_field(obj, key);
  if (!f) return def;
  if (!f->is_number_unsigned() && !f->is_number_integer())
    throw_config("expected non-negative integer for " + want(section, key));
  if (f->is_number_integer() && f->get<long long>() < 0)
    throw_config("expected non-negative integer for " + want(section, key));
  return f->get<uint64_t>();
}

bool get_bool(const json& obj, const std::string& section, const char* key,
              bool def) {
  const json* f = get_field(obj, key);
  if (!f) return def;
  if (!f->is_boolean())
    throw_config("expected boolean for " + want(section, key));
  return f->get<bool>();
}

}  // namespace

ExperimentSpec parse_config_json(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw_parse(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw_config("config root must be a JSON object");
  reject_unknown(root, "", {"dataset", "encoder", "federation", "output",
                            "dp_sweep_alphas", "ablation_variants"});

  ExperimentSpec spec;

  const json* ds = get_field(root, "dataset");
  if (!ds) throw_config("missing required section 'dataset'");
  if (!ds->is_object()) throw_config("'dataset' must be an object");
  reject_unknown(*ds, "dataset",
                 {"name", "data_path", "user_path", "max_users", "split_mode"});
  spec.dataset.name = get_string(*ds, "dataset", "name", "ml100k");
  if (spec.dataset.name != "ml100k" && spec.dataset.name != "generic")
    throw_config("dataset.name must be 'ml100k' or 'generic', got '" +
                 spec.dataset.name + "'");
  spec.dataset.data_path = get_string(*ds, "dataset", "data_path", "");
  if (spec.dataset.data_path.empty())
    throw_config("dataset.data_path is required");
  spec.dataset.user_path = get_string(*ds, "dataset", "user_path", "");
  if (spec.dataset.name == "ml100k" && spec.dataset.user_path.empty())
    throw_config("dataset.user_path is required for ml100k");
  spec.dataset.max_users = get_count(*ds, "dataset", "max_users", 0);
  spec.dataset.split_mode = get_string(*ds, "dataset", "split_mode", "first");
  if (spec.dataset.split_mode != "first" && spec.dataset.split_mode != "last")
    throw_config("dataset.split_mode must be 'first' or 'last'");

  if (const json* enc = get_field(root, "encoder")) {
    if (!enc->is_object()) throw_config("'encoder' must be an object");
    reject_unknown(*enc, "encoder", {"kind", "d1", "seed", "path", "template"});
    spec.encoder.kind = get_string(*enc, "encoder", "kind", "hash");
    if (spec.encoder.kind != "hash" && spec.encoder.kind != "file")
      throw_config("encoder.kind must be 'hash' or 'file'");
    spec.encoder.d1 = get_count(*enc, "encoder", "d1", 100);
    spec.encoder.seed = get_u64(*enc, "encoder", "seed", 1);
    spec.encoder.path = get_string(*enc, "encoder", "path", "");
    spec.encoder.prompt_template = get_string(*enc, "encoder", "template", "");
    if (spec.encoder.kind == "file" && spec.encoder.path.empty())
      throw_config("encoder.path is required when encoder.kind is 'file'");
    if (spec.encoder.kind == "hash" && spec.encoder.d1 < 8)
      throw_config("encoder.d1 must be >= 8 for the hash encoder");
  }
  spec.encoder.dataset_kind = spec.dataset.name;

  if (const json* fed = get_field(root, "federation")) {
    if (!fed->is_object()) throw_config("'federation' must be an object");
    reject_unknown(
        *fed, "federation",
        {"rounds", "local_epochs", "learning_rate", "lambda", "embedding_dim",
         "heads", "ffn_dim", "seq_len", "top_k", "dp_alpha", "lite_interval",
         "reduce_mode", "aggregator", "disable_transformer",
         "disable_joint_embedding", "symmetrize_graph", "use_positional",
         "batch_size", "train_negatives", "eval_negatives", "eval_every",
         "workers", "seed"});
    FederationConfig& f = spec.federation;
    f.rounds = get_count(*fed, "federation", "rounds", 100);
    f.local_epochs = get_count(*fed, "federation", "local_epochs", 1);
    f.lr = get_double(*fed, "federation", "learning_rate", 0.01);
    f.lambda = get_double(*fed, "federation", "lambda", 0.1);
    f.embedding_dim = get_count(*fed, "federation", "embedding_dim", 32);
    f.heads = get_count(*fed, "federation", "heads", 2);
    f.ffn_dim = get_count(*fed, "federation", "ffn_dim", 64);
    f.seq_len = get_count(*fed, "federation", "seq_len", 50);
    f.top_k = get_count(*fed, "federation", "top_k", 10);
    f.dp_alpha = get_double(*fed, "federation", "dp_alpha", 0.0);
    f.lite_interval = get_count(*fed, "federation", "lite_interval", 1);
    const std::string mode =
        get_string(*fed, "federation", "reduce_mode", "mean");
    if (mode == "mean")
      f.reduce_mode = ReduceMode::Mean;
    else if (mode == "personalized")
      f.reduce_mode = ReduceMode::Personalized;
    else
      throw_config("federation.reduce_mode must be 'mean' or 'personalized'");
    f.aggregator = get_string(*fed, "federation", "aggregator", "graph");
    f.disable_transformer =
        get_bool(*fed, "federation", "disable_transformer", false);
    f.disable_joint_embedding =
        get_bool(*fed, "federation", "disable_joint_embedding", false);
    f.symmetrize_graph = get_bool(*fed, "federation", "symmetrize_graph", false);
    f.use_positional = get_bool(*fed, "federation", "use_positional", false);
    f.batch_size = get_count(*fed, "federation", "batch_size", 256);
    f.train_negatives = get_count(*fed, "federation", "train_negatives", 4);
    f.eval_negatives = get_count(*fed, "federation", "eval_negatives", 99);
    f.eval_every = get_count(*fed, "federation", "eval_every", 1);
    f.workers = get_count(*fed, "federation", "workers", 1);
    f.seed = get_u64(*fed, "federation", "seed", 42);
  }
  spec.federation.validate();

  if (const json* out = get_field(root, "output")) {
    if (!out->is_object()) throw_config("'output' must be an object");
    reject_unknown(*out, "output",
                   {"dir", "metrics_csv", "graph_dump", "snapshot"});
    spec.output.dir = get_string(*out, "output", "dir", ".");
    spec.output.metrics_csv =
        get_string(*out, "output", "metrics_csv", "metrics.csv");
    spec.output.graph_dump = get_string(*out, "output", "graph_dump", "");
    spec.output.snapshot = get_string(*out, "output", "snapshot", "");
  }

  if (const json* sw = get_field(root, "dp_sweep_alphas")) {
    if (!sw->is_array()) throw_config("dp_sweep_alphas must be an array");
    spec.dp_sweep_alphas.clear();
    for (const auto& v : *sw) {
      if (!v.is_number())
        throw_config("dp_sweep_alphas entries must be numbers");
      const double a = v.get<double>();
      if (a < 0.0) throw_config("dp_sweep_alphas entries must be >= 0");
      spec.dp_sweep_alphas.push_back(a);
    }
    if (spec.dp_sweep_alphas.empty())
      throw_config("dp_sweep_alphas must not be empty");
  }

  if (const json* ab = get_field(root, "ablation_variants")) {
    if (!ab->is_array()) throw_config("ablation_variants must be an array");
    spec.ablation_variants.clear();
    for (const auto& v : *ab) {
      if (!v.is_string())
        throw_config("ablation_variants entries must be strings");
      apply_variant(spec.federation, v.get<std::string>());  // validates name
      spec.ablation_variants.push_back(v.get<std::string>());
    }
    if (spec.ablation_variants.empty())
      throw_config("ablation_variants must not be empty");
  }

  return spec;
}

ExperimentSpec parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_io("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_config_json(text);
}

std::string spec_to_json(const ExperimentSpec& spec) {
  json root;
  root["dataset"] = {{"name", spec.dataset.name},
                     {"data_path", spec.dataset.data_path},
                     {"user_path", spec.dataset.user_path},
                     {"max_users", spec.dataset.max_users},
                     {"split_mode", spec.dataset.split_mode}};
  root["encoder"] = {{"kind", spec.encoder.kind},
                     {"d1", spec.encoder.d1},
                     {"seed", spec.encoder.seed},
                     {"path", spec.encoder.path},
                     {"template", spec.encoder.prompt_template}};
  const FederationConfig& f = spec.federation;
  root["federation"] = {
      {"rounds", f.rounds},
      {"local_epochs", f.local_epochs},
      {"learning_rate", f.lr},
      {"lambda", f.lambda},
      {"embedding_dim", f.embedding_dim},
      {"heads", f.heads},
      {"ffn_dim", f.ffn_dim},
      {"seq_len", f.seq_len},
      {"top_k", f.top_k},
      {"dp_alpha", f.dp_alpha},
      {"lite_interval", f.lite_interval},
      {"reduce_mode",
       f.reduce_mode == ReduceMode::Mean ? "mean" : "personalized"},
      {"aggregator", f.aggregator},
      {"disable_transformer", f.disable_transformer},
      {"disable_joint_embedding", f.disable_joint_embedding},
      {"symmetrize_graph", f.symmetrize_graph},
      {"use_positional", f.use_positional},
      {"batch_size", f.batch_size},
      {"train_negatives", f.train_negatives},
      {"eval_negatives", f.eval_negatives},
      {"eval_every", f.eval_every},
      {"workers", f.workers},
      {"seed", f.seed}};
  root["output"] = {{"dir", spec.output.dir},
                    {"metrics_csv", spec.output.metrics_csv},
                    {"graph_dump", spec.output.graph_dump},
                    {"snapshot", spec.output.snapshot}};
  root["dp_sweep_alphas"] = spec.dp_sweep_alphas;
  root["ablation_variants"] = spec.ablation_variants;
  return root.dump(2) + "\n";
}

void validate_spec_paths(const ExperimentSpec& spec) {
  namespace fs = std::filesystem;
  if (!fs::exists(spec.dataset.data_path))
    throw_io("dataset.data_path does not exist: " + spec.dataset.data_path);
  if (spec.dataset.name == "ml100k" && !fs::exists(spec.dataset.user_path))
    throw_io("dataset.user_path does not exist: " + spec.dataset.user_path);
  if (spec.encoder.kind == "file" && !fs::exists(spec.encoder.path))
    throw_io("encoder.path does not exist: " + spec.encoder.path);
}

InteractionDataset open_dataset(const ExperimentSpec& spec) {
  validate_spec_paths(spec);
  RawData raw = spec.dataset.name == "ml100k"
                    ? load_movielens_100k(spec.dataset.data_path,
                                          spec.dataset.user_path)
                    : load_generic_tsv(spec.dataset.data_path);
  if (spec.dataset.max_users > 0) raw = restrict_users(raw, spec.dataset.max_users);
  const SplitMode mode = spec.dataset.split_mode == "last"
                             ? SplitMode::LastAsTest
                             : SplitMode::FirstAsTest;
  return leave_one_out_split(raw, mode);
}

}  // namespace ufg
