#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dataset.hpp"

namespace ufg {

// Substitutes {name} placeholders with profile attribute values. Unknown
// placeholders raise a template error naming the placeholder.
std::string render_prompt(const UserProfile& profile,
                          const std::string& templ);

// Default prompt templates keyed by dataset kind ("ml100k" or "generic").
const std::string& default_prompt_template(const std::string& dataset_kind);

// Deterministic stand-in for a frozen language model: lowercase word tokens
// and character trigrams are feature-hashed into d1 signed buckets, then the
// vector is L2-normalized. Stable across platforms for a fixed seed.
class HashEncoder {
 public:
  HashEncoder(std::size_t d1, uint64_t seed);
  std::vector<double> encode(const std::string& text) const;
  std::size_t d1() const { return d1_; }
  std::string id() const;

 private:
  std::size_t d1_;
  uint64_t seed_;
};

struct PrecomputedEmbeddings {
  std::size_t d1 = 0;
  std::map<uint32_t, std::vector<double>> by_user;  // L2-normalized
};

PrecomputedEmbeddings load_precomputed(const std::string& path);

struct EncoderConfig {
  std::string kind = "hash";  // "hash" | "file"
  std::size_t d1 = 100;
  uint64_t seed = 1;
  std::string path;              // file kind
  std::string prompt_template;   // empty -> dataset default
  std::string dataset_kind = "generic";  // selects the default template
};

// Frozen per-user text vectors with the build-once contract: sync() encodes
// each user at most once and re-encodes only when the rendered prompt
// changed. encoder_calls() counts actual encode invocations.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(const EncoderConfig& cfg);

  // Encodes (or loads) embeddings for every user in the dataset. Calling it
  // again is cheap: unchanged prompts are served from the cache.
  void sync(const InteractionDataset& ds);

  const std::vector<double>& vec(std::size_t user) const {
    return vectors_[user];
  }
  std::size_t d1() const { return d1_; }
  std::size_t encoder_calls() const { return encoder_calls_; }
  const std::string& encoder_id() const { return encoder_id_; }

 private:
  EncoderConfig cfg_;
  std::size_t d1_ = 0;
  std::size_t encoder_calls_ = 0;
  std::string encoder_id_;
  std::vector<std::string> prompts_;  // last rendered prompt per user
  std::vector<std::vector<double>> vectors_;
  PrecomputedEmbeddings file_;
  bool file_loaded_ = false;
};

double l2_norm(const std::vector<double>& v);
double cosine(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace ufg
