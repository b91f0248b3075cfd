#include "dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <unordered_map>

#include "error.hpp"
#include "log.hpp"

namespace ufg {

const std::string* UserProfile::find(const std::string& name) const {
  for (const auto& [k, v] : attributes)
    if (k == name) return &v;
  return nullptr;
}

namespace {

struct FileRecord {
  uint32_t user;
  uint32_t orig_item;
  double weight;
  int64_t timestamp;
};

std::vector<std::string> split_line(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

template <typename T>
T parse_num(const std::string& s, const std::string& path, std::size_t lineno,
            const char* field) {
  T value{};
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw_parse(path + ":" + std::to_string(lineno) + ": bad " + field +
                " value '" + s + "'");
  return value;
}

double parse_double(const std::string& s, const std::string& path,
                    std::size_t lineno, const char* field) {
  // from_chars for double is not complete in older libstdc++; strtod is fine
  // here since fields are already tokenized.
  if (s.empty())
    throw_parse(path + ":" + std::to_string(lineno) + ": empty " + field);
  char* endp = nullptr;
  const double v = std::strtod(s.c_str(), &endp);
  if (endp != s.c_str() + s.size())
    throw_parse(path + ":" + std::to_string(lineno) + ": bad " + field +
                " value '" + s + "'");
  return v;
}

std::vector<FileRecord> read_interaction_file(const std::string& path,
                                              char sep) {
  std::ifstream in(path);
  if (!in) throw_io("cannot open interaction file: " + path);
  std::vector<FileRecord> recs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_line(line, sep);
    if (fields.size() != 4)
      throw_parse(path + ":" + std::to_string(lineno) + ": expected 4 fields, got " +
                  std::to_string(fields.size()));
    FileRecord r;
    r.user = parse_num<uint32_t>(fields[0], path, lineno, "user id");
    r.orig_item = parse_num<uint32_t>(fields[1], path, lineno, "item id");
    r.weight = parse_double(fields[2], path, lineno, "weight");
    r.timestamp = parse_num<int64_t>(fields[3], path, lineno, "timestamp");
    recs.push_back(r);
  }
  return recs;
}

// Groups records per user, remaps item ids densely (ascending original id
// -> 1..M) and sorts each user's records by timestamp, file order on ties.
RawData assemble(std::vector<FileRecord> recs,
                 std::map<uint32_t, UserProfile> profiles) {
  RawData raw;

  std::vector<uint32_t> distinct_items;
  distinct_items.reserve(recs.size());
  for (const auto& r : recs) distinct_items.push_back(r.orig_item);
  std::sort(distinct_items.begin(), distinct_items.end());
  distinct_items.erase(
      std::unique(distinct_items.begin(), distinct_items.end()),
      distinct_items.end());
  raw.item_ids = distinct_items;
  raw.num_items = distinct_items.size();

  std::unordered_map<uint32_t, uint32_t> item_remap;
  item_remap.reserve(distinct_items.size());
  for (std::size_t i = 0; i < distinct_items.size(); ++i)
    item_remap[distinct_items[i]] = static_cast<uint32_t>(i + 1);

  struct Indexed {
    RawRecord rec;
    std::size_t file_order;
  };
  std::map<uint32_t, std::vector<Indexed>> per_user;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& r = recs[i];
    per_user[r.user].push_back(
        {{item_remap[r.orig_item], r.weight, r.timestamp}, i});
  }

  for (auto& [uid, list] : per_user) {
    std::stable_sort(list.begin(), list.end(),
                     [](const Indexed& a, const Indexed& b) {
                       return a.rec.timestamp < b.rec.timestamp;
                     });
    raw.user_ids.push_back(uid);
    std::vector<RawRecord> ordered;
    ordered.reserve(list.size());
    for (const auto& e : list) ordered.push_back(e.rec);
    raw.total_interactions += ordered.size();
    raw.records.push_back(std::move(ordered));

    auto it = profiles.find(uid);
    if (it != profiles.end()) {
      raw.profiles.push_back(std::move(it->second));
    } else {
      UserProfile p;
      p.user_id = uid;
      raw.profiles.push_back(std::move(p));
    }
  }
  return raw;
}

}  // namespace

RawData load_movielens_100k(const std::string& data_path,
                            const std::string& user_path) {
  std::ifstream uin(user_path);
  if (!uin) throw_io("cannot open user file: " + user_path);
  std::map<uint32_t, UserProfile> profiles;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(uin, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_line(line, '|');
    if (fields.size() != 5)
      throw_parse(user_path + ":" + std::to_string(lineno) +
                  ": expected 5 fields, got " + std::to_string(fields.size()));
    UserProfile p;
    p.user_id = parse_num<uint32_t>(fields[0], user_path, lineno, "user id");
    p.attributes = {{"age", fields[1]},
                    {"gender", fields[2]},
                    {"occupation", fields[3]},
                    {"zip", fields[4]}};
    profiles[p.user_id] = std::move(p);
  }

  auto recs = read_interaction_file(data_path, '\t');
  if (recs.empty()) throw_data("ratings file has zero records: " + data_path);
  for (const auto& r : recs)
    if (!profiles.count(r.user))
      throw_data("rating references unknown user " + std::to_string(r.user) +
                 " missing from " + user_path);

  RawData raw = assemble(std::move(recs), std::move(profiles));
  UFG_LOG_INFO("loaded %zu users, %zu items, %zu interactions from %s",
               raw.user_ids.size(), raw.num_items, raw.total_interactions,
               data_path.c_str());
  return raw;
}

RawData load_generic_tsv(const std::string& data_path) {
  auto recs = read_interaction_file(data_path, '\t');
  if (recs.empty()) throw_data("interaction file has zero records: " + data_path);

  // Users with fewer than 5 interactions are dropped before assembling.
  std::unordered_map<uint32_t, std::size_t> counts;
  for (const auto& r : recs) ++counts[r.user];
  std::vector<FileRecord> kept;
  kept.reserve(recs.size());
  for (const auto& r : recs)
    if (counts[r.user] >= 5) kept.push_back(r);
  if (kept.empty())
    throw_data("no user has 5 or more interactions in " + data_path);

  std::map<uint32_t, UserProfile> profiles;
  for (const auto& [uid, n] : counts) {
    if (n < 5) continue;
    UserProfile p;
    p.user_id = uid;
    p.attributes = {{"user_id", std::to_string(uid)},
                    {"interaction_count", std::to_string(n)}};
    profiles[uid] = std::move(p);
  }

  RawData raw = assemble(std::move(kept), std::move(profiles));
  UFG_LOG_INFO("loaded %zu users, %zu items, %zu interactions from %s",
               raw.user_ids.size(), raw.num_items, raw.total_interactions,
               data_path.c_str());
  return raw;
}

RawData restrict_users(const RawData& raw, std::size_t max_users) {
  if (max_users == 0 || max_users >= raw.user_ids.size()) return raw;

  // Rebuild through the original item ids so the remap stays dense.
  std::vector<FileRecord> recs;
  std::map<uint32_t, UserProfile> profiles;
  for (std::size_t u = 0; u < max_users; ++u) {
    for (const auto& r : raw.records[u]) {
      recs.push_back({raw.user_ids[u], raw.item_ids[r.item - 1], r.weight,
                      r.timestamp});
    }
    profiles[raw.user_ids[u]] = raw.profiles[u];
  }
  return assemble(std::move(recs), std::move(profiles));
}

bool InteractionDataset::has_interacted(std::size_t user,
                                        uint32_t item) const {
  const auto& set = interacted[user];
  return std::binary_search(set.begin(), set.end(), item);
}

std::size_t InteractionDataset::total_interactions() const {
  std::size_t n = 0;
  for (const auto& t : train) n += t.size();
  return n + 2 * num_users;  // plus one val and one test item per user
}

double InteractionDataset::sparsity() const {
  if (num_users == 0 || num_items == 0) return 1.0;
  return 1.0 - double(total_interactions()) / (double(num_users) * double(num_items));
}

InteractionDataset leave_one_out_split(const RawData& raw, SplitMode mode) {
  InteractionDataset ds;
  ds.num_users = raw.user_ids.size();
  ds.num_items = raw.num_items;
  ds.user_ids = raw.user_ids;
  ds.profiles = raw.profiles;
  ds.item_ids = raw.item_ids;
  ds.train.resize(ds.num_users);
  ds.val_item.resize(ds.num_users);
  ds.test_item.resize(ds.num_users);
  ds.interacted.resize(ds.num_users);

  for (std::size_t u = 0; u < ds.num_users; ++u) {
    const auto& recs = raw.records[u];
    if (recs.size() < 3)
      throw_data("user " + std::to_string(raw.user_ids[u]) + " has only " +
                 std::to_string(recs.size()) +
                 " records; need at least 3 to split");
    const std::size_t n = recs.size();
    std::size_t test_idx, val_idx;
    if (mode == SplitMode::FirstAsTest) {
      test_idx = 0;
      val_idx = 1;
    } else {
      test_idx = n - 1;
      val_idx = n - 2;
    }
    ds.test_item[u] = recs[test_idx].item;
    ds.val_item[u] = recs[val_idx].item;
    auto& tr = ds.train[u];
    tr.reserve(n - 2);
    for (std::size_t i = 0; i < n; ++i)
      if (i != test_idx && i != val_idx) tr.push_back(recs[i].item);

    auto& set = ds.interacted[u];
    set = tr;
    set.push_back(ds.val_item[u]);
    set.push_back(ds.test_item[u]);
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());

    // Holdout items must not reappear in the training sequence.
    if (ds.test_item[u] == ds.val_item[u] ||
        std::find(tr.begin(), tr.end(), ds.test_item[u]) != tr.end() ||
        std::find(tr.begin(), tr.end(), ds.val_item[u]) != tr.end())
      throw_data("user " + std::to_string(raw.user_ids[u]) +
                 " has duplicate interactions across the split");
  }
  return ds;
}

std::vector<uint32_t> sample_train_negatives(const InteractionDataset& ds,
                                             std::size_t user,
                                             std::size_t count, Rng& rng) {
  const std::size_t available = ds.num_items - ds.interacted[user].size();
  if (available == 0)
    throw_data("user " + std::to_string(ds.user_ids[user]) +
               " has interacted with every item; cannot sample negatives");
  if (count > available)
    throw_data("user " + std::to_string(ds.user_ids[user]) + " has only " +
               std::to_string(available) + " non-interacted items, asked for " +
               std::to_string(count));
  std::vector<uint32_t> out;
  out.reserve(count);
  while (out.size() < count) {
    const uint32_t item =
        1 + static_cast<uint32_t>(rng.next_below(ds.num_items));
    if (ds.has_interacted(user, item)) continue;
    if (std::find(out.begin(), out.end(), item) != out.end()) continue;
    out.push_back(item);
  }
  return out;
}

EvalCandidates build_eval_candidates(const InteractionDataset& ds,
                                     std::size_t user, Rng& rng,
                                     std::size_t num_negatives) {
  EvalCandidates ec;
  ec.user = user;
  ec.positive = ds.test_item[user];
  const std::size_t available = ds.num_items - ds.interacted[user].size();
  if (available < num_negatives) {
    // Fall back to every non-interacted item, flagged so callers can tell.
    ec.truncated = true;
    for (uint32_t item = 1; item <= ds.num_items; ++item)
      if (!ds.has_interacted(user, item)) ec.negatives.push_back(item);
    UFG_LOG_WARN("user %u has only %zu eval negatives (wanted %zu)",
                 ds.user_ids[user], available, num_negatives);
    return ec;
  }
  ec.negatives = sample_train_negatives(ds, user, num_negatives, rng);
  return ec;
}

}  // namespace ufg
