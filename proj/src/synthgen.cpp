#include "synthgen.hpp"

#include <algorithm>
#include <unordered_set>
#include <vector>

#include "error.hpp"
#include "io.hpp"
#include "rng.hpp"

namespace ufg {

namespace {

const char* kOccupations[] = {"engineer", "teacher", "doctor", "artist",
                              "lawyer",   "farmer",  "writer", "student"};

}  // namespace

void write_synthetic_ml100k(const std::string& data_path,
                            const std::string& user_path,
                            const SynthSpec& spec) {
  if (spec.users < 2 || spec.items < 2 || spec.clusters == 0)
    throw_config("synthetic corpus needs >= 2 users, >= 2 items, >= 1 cluster");
  const std::size_t min_per_user = 3;
  if (spec.interactions < spec.users * min_per_user ||
      spec.interactions < spec.items)
    throw_config("not enough interactions to cover every user and item");

  Rng rng = Rng::derive(spec.seed, 0x53594e);
  const std::size_t C = std::min(spec.clusters, std::size_t(8));

  // Per-user record counts: near-uniform, summing exactly to the target.
  const std::size_t base = spec.interactions / spec.users;
  const std::size_t extra = spec.interactions % spec.users;
  std::vector<std::size_t> counts(spec.users, base);
  for (std::size_t u = 0; u < extra; ++u) ++counts[u];

  std::vector<std::vector<uint32_t>> cluster_items(C);
  for (uint32_t item = 1; item <= spec.items; ++item)
    cluster_items[(item - 1) % C].push_back(item);

  std::vector<std::vector<uint32_t>> chosen(spec.users);
  std::vector<std::size_t> item_freq(spec.items + 1, 0);
  for (std::size_t u = 0; u < spec.users; ++u) {
    const std::size_t cu = u % C;
    std::unordered_set<uint32_t> seen;
    auto& list = chosen[u];
    list.reserve(counts[u]);
    while (list.size() < counts[u]) {
      uint32_t item;
      if (rng.next_double() < spec.in_cluster_prob) {
        const auto& pool = cluster_items[cu];
        item = pool[rng.next_below(pool.size())];
      } else {
        item = 1 + static_cast<uint32_t>(rng.next_below(spec.items));
      }
      if (!seen.insert(item).second) continue;
      list.push_back(item);
      ++item_freq[item];
    }
  }

  // Swap never-chosen items in (replacing an interaction whose item keeps a
  // positive count) so the dense item remap spans the full catalog.
  std::size_t cursor_user = 0;
  for (uint32_t missing = 1; missing <= spec.items; ++missing) {
    if (item_freq[missing] > 0) continue;
    bool placed = false;
    for (std::size_t tries = 0; tries < spec.users && !placed; ++tries) {
      auto& list = chosen[cursor_user];
      for (std::size_t i = 0; i < list.size(); ++i) {
        const uint32_t victim = list[i];
        if (item_freq[victim] < 2) continue;
        if (std::find(list.begin(), list.end(), missing) != list.end()) break;
        --item_freq[victim];
        ++item_freq[missing];
        list[i] = missing;
        placed = true;
        break;
      }
      cursor_user = (cursor_user + 1) % spec.users;
    }
    if (!placed)
      throw_runtime("could not place item " + std::to_string(missing) +
                    " into the synthetic corpus");
  }

  std::string data;
  data.reserve(spec.interactions * 24);
  for (std::size_t u = 0; u < spec.users; ++u) {
    for (uint32_t item : chosen[u]) {
      const uint32_t rating = 1 + static_cast<uint32_t>(rng.next_below(5));
      const int64_t ts = 874000000 + int64_t(rng.next_below(5000000));
      data += std::to_string(u + 1);
      data += '\t';
      data += std::to_string(item);
      data += '\t';
      data += std::to_string(rating);
      data += '\t';
      data += std::to_string(ts);
      data += '\n';
    }
  }

  std::string users;
  users.reserve(spec.users * 32);
  for (std::size_t u = 0; u < spec.users; ++u) {
    const std::size_t cu = u % C;
    const uint64_t h = mix64(spec.seed ^ (u + 1));
    const unsigned age = 20 + unsigned(cu) * 5 + unsigned(h % 5);
    const char gender = (h >> 8) % 2 ? 'M' : 'F';
    const unsigned zip = 10000 + unsigned(cu) * 1000 + unsigned((h >> 16) % 1000);
    users += std::to_string(u + 1);
    users += '|';
    users += std::to_string(age);
    users += '|';
    users += gender;
    users += '|';
    users += kOccupations[cu % 8];
    users += '|';
    users += std::to_string(zip);
    users += '\n';
  }

  atomic_write_file(data_path, data);
  atomic_write_file(user_path, users);
}

}  // namespace ufg
