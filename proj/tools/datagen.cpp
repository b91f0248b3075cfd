// Generates a deterministic synthetic interaction corpus in the
// MovieLens-100K file formats, for smoke runs and CI where the real
// dataset is not checked in.

#include <cstdio>

#include <CLI11.hpp>

#include "synthgen.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ufgraph-datagen — synthetic MovieLens-100K-shaped corpus"};
  std::string data_path = "u.data";
  std::string user_path = "u.user";
  ufg::SynthSpec spec;
  app.add_option("--data", data_path, "interaction file to write");
  app.add_option("--users-file", user_path, "profile file to write");
  app.add_option("--num-users", spec.users, "user count");
  app.add_option("--num-items", spec.items, "item count");
  app.add_option("--interactions", spec.interactions, "total interactions");
  app.add_option("--clusters", spec.clusters, "preference clusters (<= 8)");
  app.add_option("--in-cluster-prob", spec.in_cluster_prob,
                 "probability an interaction stays in the user's cluster");
  app.add_option("--seed", spec.seed, "generator seed");
  CLI11_PARSE(app, argc, argv);

  try {
    ufg::write_synthetic_ml100k(data_path, user_path, spec);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ufgraph-datagen: %s\n", e.what());
    return 1;
  }
  std::fprintf(stderr,
               "ufgraph-datagen: wrote %s and %s (%zu users, %zu items, %zu "
               "interactions)\n",
               data_path.c_str(), user_path.c_str(), spec.users, spec.items,
               spec.interactions);
  return 0;
}
