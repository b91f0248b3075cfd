#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rng.hpp"

namespace ufg {

struct UserProfile {
  uint32_t user_id = 0;
  // Ordered (name, value) pairs, e.g. age/gender/occupation/zip for
  // MovieLens or user_id/interaction_count for generic datasets.
  std::vector<std::pair<std::string, std::string>> attributes;

  const std::string* find(const std::string& name) const;
};

// One interaction after item-id remapping; item ids are dense in
// [1, num_items], id 0 is reserved for sequence padding.
struct RawRecord {
  uint32_t item = 0;
  double weight = 0.0;
  int64_t timestamp = 0;
};

// Loader output: per-user chronological records plus profiles. Users are
// ordered by ascending original id; records are sorted by timestamp with
// ties broken by file order.
struct RawData {
  std::vector<uint32_t> user_ids;               // original ids
  std::vector<std::vector<RawRecord>> records;  // aligned with user_ids
  std::vector<UserProfile> profiles;
  std::vector<uint32_t> item_ids;  // original id for remapped id i at [i-1]
  std::size_t num_items = 0;
  std::size_t total_interactions = 0;
};

RawData load_movielens_100k(const std::string& data_path,
                            const std::string& user_path);
RawData load_generic_tsv(const std::string& data_path);

// Keeps only the first max_users users (ascending original id) and rebuilds
// the dense item-id remap from their records. max_users == 0 keeps all.
RawData restrict_users(const RawData& raw, std::size_t max_users);

enum class SplitMode { FirstAsTest, LastAsTest };

struct InteractionDataset {
  std::size_t num_users = 0;
  std::size_t num_items = 0;
  std::vector<uint32_t> user_ids;
  std::vector<std::vector<uint32_t>> train;  // chronological item ids
  std::vector<uint32_t> val_item;
  std::vector<uint32_t> test_item;
  std::vector<UserProfile> profiles;
  std::vector<std::vector<uint32_t>> interacted;  // sorted train+val+test
  std::vector<uint32_t> item_ids;                 // remap table

  bool has_interacted(std::size_t user, uint32_t item) const;
  std::size_t total_interactions() const;
  double sparsity() const;
};

InteractionDataset leave_one_out_split(const RawData& raw,
                                       SplitMode mode = SplitMode::FirstAsTest);

std::vector<uint32_t> sample_train_negatives(const InteractionDataset& ds,
                                             std::size_t user,
                                             std::size_t count, Rng& rng);

struct EvalCandidates {
  std::size_t user = 0;
  uint32_t positive = 0;
  std::vector<uint32_t> negatives;
  bool truncated = false;  // fewer than the requested negatives existed
};

EvalCandidates build_eval_candidates(const InteractionDataset& ds,
                                     std::size_t user, Rng& rng,
                                     std::size_t num_negatives = 99);

}  // namespace ufg
