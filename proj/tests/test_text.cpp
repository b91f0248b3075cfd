#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "error.hpp"
#include "text_encoder.hpp"

using namespace ufg;

namespace {

UserProfile ml_profile() {
  UserProfile p;
  p.user_id = 1;
  p.attributes = {{"age", "25"},
                  {"gender", "M"},
                  {"occupation", "engineer"},
                  {"zip", "55414"}};
  return p;
}

std::string temp_file(const std::string& content) {
  static int counter = 0;
  const auto p = std::filesystem::temp_directory_path() /
                 ("ufg_emb_" + std::to_string(::getpid()) + "_" +
                  std::to_string(counter++) + ".tsv");
  std::ofstream out(p);
  out << content;
  return p.string();
}

}  // namespace

TEST_SUITE_BEGIN("text");

TEST_CASE("prompt rendering substitutes placeholders") {
  UserProfile p = ml_profile();
  const std::string got =
      render_prompt(p, default_prompt_template("ml100k"));
  CHECK(got ==
        "The user is a 25-year-old M working as engineer in area 55414.");
  CHECK(render_prompt(p, default_prompt_template("ml100k")) == got);

  SUBCASE("missing placeholder names the placeholder") {
    CHECK_THROWS_WITH_AS(render_prompt(p, "{user_id}"),
                         doctest::Contains("{user_id}"), Error);
  }
  SUBCASE("generic template") {
    UserProfile g;
    g.user_id = 7;
    g.attributes = {{"user_id", "7"}, {"interaction_count", "12"}};
    CHECK(render_prompt(g, default_prompt_template("generic")) ==
          "User 7 has 12 interactions.");
  }
}

TEST_CASE("hash encoder determinism, norm, and similarity ordering") {
  HashEncoder enc(100, 3);
  const auto a = enc.encode("The user is a 25-year-old M working as engineer");
  const auto b = enc.encode("The user is a 25-year-old M working as engineer");
  CHECK(a == b);
  CHECK(std::fabs(l2_norm(a) - 1.0) <= 1e-9);

  // mostly-shared tokens beat fully-disjoint tokens
  const auto near =
      enc.encode("The user is a 26-year-old M working as engineer");
  const auto far = enc.encode("zq xv bnmp ghw krt lodc");
  CHECK(cosine(a, near) > cosine(a, far));

  SUBCASE("cosine stays within [-1, 1] across a fixture set") {
    const char* fixtures[] = {
        "The user is a 25-year-old M working as engineer in area 55414.",
        "The user is a 40-year-old F working as teacher in area 10001.",
        "User 17 has 204 interactions.",
        "User 3 has 5 interactions.",
    };
    for (const char* x : fixtures)
      for (const char* y : fixtures) {
        const double c = cosine(enc.encode(x), enc.encode(y));
        CHECK(c <= 1.0 + 1e-12);
        CHECK(c >= -1.0 - 1e-12);
      }
  }
  SUBCASE("dimension below 8 is rejected") {
    CHECK_THROWS_AS(HashEncoder(4, 1), Error);
  }
}

TEST_CASE("precomputed embedding file loads and normalizes") {
  const std::string path = temp_file(
      "#dim=4\n"
      "1\t1.0\t0.0\t0.0\t0.0\n"
      "2\t0.0\t2.0\t0.0\t0.0\n"
      "3\t1.0\t1.0\t1.0\t1.0\n");
  PrecomputedEmbeddings pe = load_precomputed(path);
  CHECK(pe.d1 == 4);
  CHECK(pe.by_user.size() == 3);
  CHECK(std::fabs(l2_norm(pe.by_user.at(2)) - 1.0) <= 1e-9);
  CHECK(pe.by_user.at(2)[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pe.by_user.at(3)[0] == doctest::Approx(0.5).epsilon(1e-12));

  SUBCASE("row width must match the header") {
    const std::string bad = temp_file("#dim=4\n1\t1.0\t2.0\t3.0\n");
    CHECK_THROWS_WITH_AS(load_precomputed(bad), doctest::Contains("3 values"),
                         Error);
  }
  SUBCASE("missing header is a format error") {
    const std::string bad = temp_file("1\t1.0\n");
    CHECK_THROWS_AS(load_precomputed(bad), Error);
  }
}

namespace {

InteractionDataset tiny_dataset(std::size_t users) {
  InteractionDataset ds;
  ds.num_users = users;
  ds.num_items = 10;
  for (std::size_t u = 0; u < users; ++u) {
    ds.user_ids.push_back(uint32_t(u + 1));
    ds.train.push_back({1, 2});
    ds.val_item.push_back(3);
    ds.test_item.push_back(4);
    ds.interacted.push_back({1, 2, 3, 4});
    UserProfile p;
    p.user_id = uint32_t(u + 1);
    p.attributes = {{"user_id", std::to_string(u + 1)},
                    {"interaction_count", "4"}};
    ds.profiles.push_back(p);
  }
  for (uint32_t i = 1; i <= 10; ++i) ds.item_ids.push_back(i);
  return ds;
}

}  // namespace

TEST_CASE("embedding table encodes each user exactly once") {
  InteractionDataset ds = tiny_dataset(5);
  EncoderConfig cfg;
  cfg.kind = "hash";
  cfg.d1 = 16;
  cfg.seed = 9;
  EmbeddingTable table(cfg);

  table.sync(ds);
  CHECK(table.encoder_calls() == 5);
  const auto first = table.vec(2);

  // repeated syncs (one per round) add no encoder calls
  for (int round = 0; round < 4; ++round) table.sync(ds);
  CHECK(table.encoder_calls() == 5);
  CHECK(table.vec(2) == first);

  SUBCASE("profile mutation re-encodes only that user") {
    ds.profiles[3].attributes[1].second = "99";
    table.sync(ds);
    CHECK(table.encoder_calls() == 6);
    CHECK(table.vec(2) == first);
  }
}

TEST_CASE("embedding table from file checks coverage") {
  InteractionDataset ds = tiny_dataset(3);
  const std::string good = temp_file(
      "#dim=8\n"
      "1\t1\t0\t0\t0\t0\t0\t0\t0\n"
      "2\t0\t1\t0\t0\t0\t0\t0\t0\n"
      "3\t0\t0\t1\t0\t0\t0\t0\t0\n");
  EncoderConfig cfg;
  cfg.kind = "file";
  cfg.path = good;
  EmbeddingTable table(cfg);
  table.sync(ds);
  CHECK(table.d1() == 8);
  CHECK(table.encoder_calls() == 0);
  CHECK(table.vec(1)[1] == doctest::Approx(1.0).epsilon(1e-12));

  SUBCASE("missing user is a coverage error listing the id") {
    const std::string partial = temp_file(
        "#dim=8\n"
        "1\t1\t0\t0\t0\t0\t0\t0\t0\n"
        "3\t0\t0\t1\t0\t0\t0\t0\t0\n");
    EncoderConfig c2;
    c2.kind = "file";
    c2.path = partial;
    EmbeddingTable t2(c2);
    CHECK_THROWS_WITH_AS(t2.sync(ds), doctest::Contains("2"), Error);
  }
}

TEST_SUITE_END();
