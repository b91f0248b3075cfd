#pragma once

#include <cstdint>
#include <string>

namespace ufg {

// Deterministic synthetic interaction corpus shaped like MovieLens-100K:
// exact user/item/interaction counts, every item rated at least once, and
// user profiles whose text correlates with planted preference clusters so
// that profile similarity carries real signal about taste.
struct SynthSpec {
  std::size_t users = 943;
  std::size_t items = 1682;
  std::size_t interactions = 100000;
  std::size_t clusters = 8;
  double in_cluster_prob = 0.8;
  uint64_t seed = 7;
};

// Writes u.data (TAB: user, item, rating, timestamp) and u.user
// (PIPE: user|age|gender|occupation|zip).
void write_synthetic_ml100k(const std::string& data_path,
                            const std::string& user_path,
                            const SynthSpec& spec);

}  // namespace ufg
