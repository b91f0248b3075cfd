#include "text_encoder.hpp"

#include <cctype>
#include <cmath>
#include <fstream>

#include "error.hpp"
#include "log.hpp"
#include "rng.hpp"

namespace ufg {

std::string render_prompt(const UserProfile& profile,
                          const std::string& templ) {
  std::string out;
  out.reserve(templ.size() + 32);
  std::size_t i = 0;
  while (i < templ.size()) {
    const char c = templ[i];
    if (c != '{') {
      out.push_back(c);
      ++i;
      continue;
    }
    const std::size_t close = templ.find('}', i);
    if (close == std::string::npos)
      throw_config("prompt template has unterminated '{' at offset " +
                   std::to_string(i));
    const std::string name = templ.substr(i + 1, close - i - 1);
    const std::string* value = profile.find(name);
    if (!value)
      throw_config("prompt template placeholder {" + name +
                   "} has no matching attribute for user " +
                   std::to_string(profile.user_id));
    out += *value;
    i = close + 1;
  }
  if (out.empty()) throw_config("prompt template rendered an empty prompt");
  return out;
}

const std::string& default_prompt_template(const std::string& dataset_kind) {
  static const std::string ml =
      "The user is a {age}-year-old {gender} working as {occupation} in area "
      "{zip}.";
  static const std::string generic =
      "User {user_id} has {interaction_count} interactions.";
  return dataset_kind == "ml100k" ? ml : generic;
}

namespace {

uint64_t fnv1a64(const std::string& s) {
  uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Lowercases and maps every non-alphanumeric run to a single space.
std::string normalize_text(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  bool last_space = true;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      out.push_back(static_cast<char>(std::tolower(c)));
      last_space = false;
    } else if (!last_space) {
      out.push_back(' ');
      last_space = true;
    }
  }
  if (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

void normalize_l2(std::vector<double>& v) {
  double norm = l2_norm(v);
  if (norm == 0.0) {
    // Degenerate (e.g. prompt with no alphanumerics): fixed basis vector.
    v[0] = 1.0;
    return;
  }
  for (double& x : v) x /= norm;
}

}  // namespace

HashEncoder::HashEncoder(std::size_t d1, uint64_t seed)
    : d1_(d1), seed_(seed) {
  if (d1 < 8)
    throw_config("hash encoder dimension must be >= 8, got " +
                 std::to_string(d1));
}

std::string HashEncoder::id() const {
  return "hash:d1=" + std::to_string(d1_) + ":seed=" + std::to_string(seed_);
}

std::vector<double> HashEncoder::encode(const std::string& text) const {
  std::vector<double> v(d1_, 0.0);
  const std::string norm = normalize_text(text);
  const uint64_t salt = mix64(seed_);

  auto add_token = [&](const std::string& tok) {
    const uint64_t h = mix64(fnv1a64(tok) ^ salt);
    const std::size_t bucket = static_cast<std::size_t>(h % d1_);
    const double sign = (h >> 63) ? -1.0 : 1.0;
    v[bucket] += sign;
  };

  std::size_t start = 0;
  while (start < norm.size()) {
    std::size_t end = norm.find(' ', start);
    if (end == std::string::npos) end = norm.size();
    if (end > start) add_token("w:" + norm.substr(start, end - start));
    start = end + 1;
  }
  for (std::size_t i = 0; i + 3 <= norm.size(); ++i)
    add_token("t:" + norm.substr(i, 3));

  normalize_l2(v);
  return v;
}

PrecomputedEmbeddings load_precomputed(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_io("cannot open embedding file: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw_parse(path + ":1: empty embedding file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  PrecomputedEmbeddings out;
  if (line.rfind("#dim=", 0) != 0)
    throw_parse(path + ":1: expected '#dim=<d1>' header, got '" + line + "'");
  out.d1 = static_cast<std::size_t>(std::stoul(line.substr(5)));
  if (out.d1 == 0) throw_parse(path + ":1: dimension must be positive");

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t pos = line.find('\t');
    if (pos == std::string::npos)
      throw_parse(path + ":" + std::to_string(lineno) + ": expected tab-separated row");
    const uint32_t uid =
        static_cast<uint32_t>(std::stoul(line.substr(0, pos)));
    std::vector<double> vec;
    vec.reserve(out.d1);
    while (pos != std::string::npos) {
      const std::size_t next = line.find('\t', pos + 1);
      const std::string field =
          line.substr(pos + 1, next == std::string::npos ? std::string::npos
                                                         : next - pos - 1);
      try {
        vec.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw_parse(path + ":" + std::to_string(lineno) + ": bad float '" +
                    field + "'");
      }
      pos = next;
    }
    if (vec.size() != out.d1)
      throw_parse(path + ":" + std::to_string(lineno) + ": row has " +
                  std::to_string(vec.size()) + " values, header says " +
                  std::to_string(out.d1));
    if (out.by_user.count(uid))
      throw_data(path + ":" + std::to_string(lineno) + ": duplicate user " +
                 std::to_string(uid));
    if (l2_norm(vec) == 0.0)
      throw_data(path + ":" + std::to_string(lineno) + ": zero-norm embedding");
    normalize_l2(vec);
    out.by_user[uid] = std::move(vec);
  }
  return out;
}

EmbeddingTable::EmbeddingTable(const EncoderConfig& cfg) : cfg_(cfg) {
  if (cfg_.kind != "hash" && cfg_.kind != "file")
    throw_config("unknown encoder kind '" + cfg_.kind + "'");
}

void EmbeddingTable::sync(const InteractionDataset& ds) {
  if (cfg_.kind == "file") {
    if (!file_loaded_) {
      file_ = load_precomputed(cfg_.path);
      d1_ = file_.d1;
      encoder_id_ = "file:" + cfg_.path;
      std::string missing;
      std::size_t missing_count = 0;
      for (uint32_t uid : ds.user_ids) {
        if (!file_.by_user.count(uid)) {
          ++missing_count;
          if (missing.size() < 200)
            missing += (missing.empty() ? "" : ", ") + std::to_string(uid);
        }
      }
      if (missing_count)
        throw_data("embedding file " + cfg_.path + " is missing " +
                   std::to_string(missing_count) + " user(s): " + missing);
      vectors_.resize(ds.num_users);
      for (std::size_t u = 0; u < ds.num_users; ++u)
        vectors_[u] = file_.by_user.at(ds.user_ids[u]);
      file_loaded_ = true;
    }
    return;
  }

  HashEncoder enc(cfg_.d1, cfg_.seed);
  if (d1_ == 0) {
    d1_ = enc.d1();
    encoder_id_ = enc.id();
  }
  const std::string& templ = cfg_.prompt_template.empty()
                                 ? default_prompt_template(cfg_.dataset_kind)
                                 : cfg_.prompt_template;
  if (prompts_.empty()) {
    prompts_.resize(ds.num_users);
    vectors_.resize(ds.num_users);
  }
  for (std::size_t u = 0; u < ds.num_users; ++u) {
    std::string prompt = render_prompt(ds.profiles[u], templ);
    if (prompt == prompts_[u] && !vectors_[u].empty()) continue;
    vectors_[u] = enc.encode(prompt);
    prompts_[u] = std::move(prompt);
    ++encoder_calls_;
  }
}

double l2_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size())
    throw_dim("cosine: length mismatch " + std::to_string(a.size()) + " vs " +
              std::to_string(b.size()));
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  const double na = l2_norm(a), nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (na * nb);
}

}  // namespace ufg
