#pragma once

// Shared toy fixtures for orchestrator-level tests.

#include <string>
#include <vector>

#include "dataset.hpp"
#include "orchestrator.hpp"
#include "text_encoder.hpp"

namespace ufg_test {

// Deterministic in-memory dataset: user u's records are the consecutive
// items u+1 .. u+6 (1-based, wrapping), so train/val/test are disjoint.
inline ufg::InteractionDataset toy_dataset(std::size_t users = 4,
                                           std::size_t items = 12) {
  ufg::InteractionDataset ds;
  ds.num_users = users;
  ds.num_items = items;
  for (std::size_t u = 0; u < users; ++u) {
    ds.user_ids.push_back(uint32_t(u + 1));
    std::vector<uint32_t> train;
    for (std::size_t t = 0; t < 4; ++t)
      train.push_back(uint32_t((u + t) % items) + 1);
    ds.train.push_back(train);
    ds.val_item.push_back(uint32_t((u + 4) % items) + 1);
    ds.test_item.push_back(uint32_t((u + 5) % items) + 1);
    auto set = train;
    set.push_back(ds.val_item.back());
    set.push_back(ds.test_item.back());
    std::sort(set.begin(), set.end());
    ds.interacted.push_back(set);
    ufg::UserProfile p;
    p.user_id = uint32_t(u + 1);
    p.attributes = {{"user_id", std::to_string(u + 1)},
                    {"interaction_count", "6"}};
    ds.profiles.push_back(p);
  }
  for (uint32_t i = 1; i <= items; ++i) ds.item_ids.push_back(i);
  return ds;
}

inline ufg::EncoderConfig toy_encoder() {
  ufg::EncoderConfig e;
  e.kind = "hash";
  e.d1 = 8;
  e.seed = 5;
  e.dataset_kind = "generic";
  return e;
}

inline ufg::FederationConfig toy_federation(std::size_t rounds = 2) {
  ufg::FederationConfig f;
  f.rounds = rounds;
  f.local_epochs = 1;
  f.lr = 0.05;
  f.lambda = 0.1;
  f.embedding_dim = 4;
  f.heads = 2;
  f.ffn_dim = 8;
  f.seq_len = 5;
  f.top_k = 1;
  f.batch_size = 8;
  f.train_negatives = 2;
  f.eval_negatives = 5;
  f.seed = 1234;
  return f;
}

}  // namespace ufg_test
