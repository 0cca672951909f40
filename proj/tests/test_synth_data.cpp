#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "dan/container.hpp"
#include "dan/hash.hpp"
#include "dan/synth_data.hpp"
#include "oracles.hpp"

using namespace dan;

namespace {

GenConfig small_config() {
  GenConfig cfg;
  cfg.n_concepts = 10;
  cfg.n_attributes = 4;
  cfg.region_dim = 16;
  cfg.attribute_subspace = 6;
  cfg.regions_per_scene = 4;
  cfg.train_items = 40;
  cfg.val_items = 10;
  cfg.test_items = 10;
  cfg.noise_rel = 0.05;
  cfg.min_caption_concepts = 2;
  cfg.max_caption_concepts = 3;
  cfg.seed = 7;
  return cfg;
}

std::string temp_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("dan_synth_" + tag);
  std::filesystem::remove_all(dir);
  return dir.string();
}

}  // namespace

TEST_CASE("concept vocabulary: separation invariant and token table") {
  GenConfig cfg = small_config();
  Rng rng(mix_seed(cfg.seed, 0));
  ConceptVocabulary vocab = make_concept_vocabulary(cfg, rng);
  CHECK(vocab.tokens[0] == "<pad>");
  CHECK(vocab.min_prototype_separation > 0.5);
  std::set<int> token_ids;
  for (const Concept& c : vocab.concepts) token_ids.insert(c.token_id);
  for (const AttributeValue& a : vocab.attributes) token_ids.insert(a.token_id);
  CHECK(token_ids.size() == vocab.concepts.size() + vocab.attributes.size());
  // Prototypes are unit vectors, pairwise distance above the invariant bound.
  for (std::size_t i = 0; i < vocab.concepts.size(); ++i) {
    double norm = 0.0;
    for (double v : vocab.concepts[i].prototype) norm += v * v;
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t j = i + 1; j < vocab.concepts.size(); ++j) {
      double d2 = 0.0;
      for (std::size_t x = 0; x < vocab.concepts[i].prototype.size(); ++x) {
        double d = vocab.concepts[i].prototype[x] - vocab.concepts[j].prototype[x];
        d2 += d * d;
      }
      CHECK(std::sqrt(d2) > 0.5);
    }
  }
}

TEST_CASE("gen_vqa_dataset: determinism, solvability, split hygiene") {
  GenConfig cfg = small_config();
  VqaDataset a = gen_vqa_dataset(cfg);
  VqaDataset b = gen_vqa_dataset(cfg);

  SUBCASE("same seed twice is bitwise identical") {
    REQUIRE(a.train.size() == b.train.size());
    for (std::size_t i = 0; i < a.train.size(); ++i)
      CHECK(encode_vqa_item(a.train[i]) == encode_vqa_item(b.train[i]));
    GenConfig other = cfg;
    other.seed = 8;
    VqaDataset c = gen_vqa_dataset(other);
    CHECK(encode_vqa_item(a.train[0]) != encode_vqa_item(c.train[0]));
  }

  SUBCASE("every item is answerable from its planted region") {
    for (const VqaItem& item : a.test) {
      const PlantedRegion* planted = nullptr;
      for (const PlantedRegion& p : item.scene.planted)
        if (p.region_index == item.planted_region) planted = &p;
      REQUIRE(planted != nullptr);
      CHECK(planted->attribute_id == item.answer_id);
      CHECK(item.question.ids[item.keyword_pos] ==
            a.vocab.concepts[planted->concept_id].token_id);
    }
  }

  SUBCASE("no scene identity appears in two splits") {
    std::set<std::uint64_t> train_ids, val_ids, test_ids;
    for (const VqaItem& i : a.train) train_ids.insert(scene_identity(i.scene));
    for (const VqaItem& i : a.val) val_ids.insert(scene_identity(i.scene));
    for (const VqaItem& i : a.test) test_ids.insert(scene_identity(i.scene));
    for (std::uint64_t id : val_ids) CHECK(train_ids.count(id) == 0);
    for (std::uint64_t id : test_ids) {
      CHECK(train_ids.count(id) == 0);
      CHECK(val_ids.count(id) == 0);
    }
  }
}

TEST_CASE("nearest-prototype oracle: exact at zero noise, robust at 0.1 separation") {
  GenConfig cfg = small_config();
  cfg.noise_rel = 0.0;
  VqaDataset clean = gen_vqa_dataset(cfg);
  int correct = 0;
  for (const VqaItem& item : clean.test)
    if (nearest_prototype_answer(item, clean.vocab) == item.answer_id) ++correct;
  CHECK(correct == static_cast<int>(clean.test.size()));

  cfg.noise_rel = 0.1;
  cfg.train_items = 1;
  cfg.val_items = 0;
  cfg.test_items = 400;
  VqaDataset noisy = gen_vqa_dataset(cfg);
  int ok = 0;
  for (const VqaItem& item : noisy.test)
    if (nearest_prototype_answer(item, noisy.vocab) == item.answer_id) ++ok;
  CHECK(static_cast<double>(ok) / noisy.test.size() >= 0.99);
}

TEST_CASE("gen_vqa_dataset: degenerate single-concept config") {
  GenConfig cfg;
  cfg.n_concepts = 1;
  cfg.n_attributes = 1;
  cfg.region_dim = 8;
  cfg.attribute_subspace = 3;
  cfg.regions_per_scene = 1;
  cfg.train_items = 3;
  cfg.val_items = 0;
  cfg.test_items = 0;
  cfg.noise_rel = 0.0;
  cfg.seed = 1;
  VqaDataset ds = gen_vqa_dataset(cfg);
  for (const VqaItem& item : ds.train) CHECK(item.answer_id == ds.train[0].answer_id);
}

TEST_CASE("gen_vqa_dataset: vocabulary too small for the scene size") {
  GenConfig cfg = small_config();
  cfg.n_concepts = 3;
  cfg.regions_per_scene = 4;
  CHECK_THROWS_WITH_AS(gen_vqa_dataset(cfg), doctest::Contains("too small"),
                       ValueError);
}

TEST_CASE("gen_matching_dataset: positives are uniquely best under set overlap") {
  GenConfig cfg = small_config();
  MatchingDataset ds = gen_matching_dataset(cfg);

  auto concept_set = [](const SyntheticScene& scene) {
    std::set<int> s;
    for (const PlantedRegion& p : scene.planted) s.insert(p.concept_id);
    return s;
  };

  // Caption concepts equal the scene's planted concepts for positives.
  std::vector<std::set<int>> caption_sets;
  for (const MatchingItem& item : ds.test) {
    std::set<int> cap;
    for (int t = 1; t < item.caption.valid_len; t += 2) {
      for (std::size_t c = 0; c < ds.vocab.concepts.size(); ++c)
        if (ds.vocab.concepts[c].token_id == item.caption.ids[t])
          cap.insert(static_cast<int>(c));
    }
    CHECK(cap == concept_set(item.scene));
    caption_sets.push_back(cap);
  }

  // Set-overlap retrieval ranks each positive strictly first.
  for (std::size_t q = 0; q < ds.test.size(); ++q) {
    std::size_t own_overlap = caption_sets[q].size();
    for (std::size_t g = 0; g < ds.test.size(); ++g) {
      if (g == q) continue;
      std::set<int> scene = concept_set(ds.test[g].scene);
      std::size_t overlap = 0;
      for (int c : caption_sets[q])
        if (scene.count(c)) ++overlap;
      CHECK(overlap < own_overlap);
    }
  }

  // No two scenes anywhere share an identical concept multiset.
  std::set<std::set<int>> all_sets;
  for (const auto* split : {&ds.train, &ds.val, &ds.test})
    for (const MatchingItem& item : *split) {
      std::set<int> s = concept_set(item.scene);
      CHECK(all_sets.count(s) == 0);
      all_sets.insert(s);
    }

  // Determinism.
  MatchingDataset again = gen_matching_dataset(cfg);
  REQUIRE(again.train.size() == ds.train.size());
  for (std::size_t i = 0; i < ds.train.size(); ++i)
    CHECK(encode_matching_item(ds.train[i]) == encode_matching_item(again.train[i]));
}

TEST_CASE("gen_matching_dataset: two-item split is mutually rankable") {
  GenConfig cfg = small_config();
  cfg.train_items = 2;
  cfg.val_items = 0;
  cfg.test_items = 0;
  MatchingDataset ds = gen_matching_dataset(cfg);
  REQUIRE(ds.train.size() == 2);
}

TEST_CASE("gen_matching_dataset: insufficient combinations raise an error") {
  GenConfig cfg = small_config();
  cfg.n_concepts = 4;
  cfg.regions_per_scene = 3;
  cfg.min_caption_concepts = 2;
  cfg.max_caption_concepts = 3;
  cfg.train_items = 500;  // far beyond the antichain capacity of 4 concepts
  CHECK_THROWS_WITH_AS(gen_matching_dataset(cfg), doctest::Contains("insufficient"),
                       ValueError);
}

TEST_CASE("dataset round-trip through the container format") {
  GenConfig cfg = small_config();
  cfg.train_items = 10;
  cfg.val_items = 3;
  cfg.test_items = 3;

  SUBCASE("vqa") {
    VqaDataset ds = gen_vqa_dataset(cfg);
    std::string dir = temp_dir("vqa_rt");
    write_dataset(ds, dir);
    CHECK(dataset_task(dir) == "vqa");
    VqaDataset back = read_vqa_dataset(dir);
    REQUIRE(back.train.size() == ds.train.size());
    for (std::size_t i = 0; i < ds.train.size(); ++i)
      CHECK(encode_vqa_item(back.train[i]) == encode_vqa_item(ds.train[i]));
    CHECK(back.sigma == ds.sigma);
    CHECK(back.vocab.tokens == ds.vocab.tokens);
    CHECK(back.vocab.concepts[2].prototype == ds.vocab.concepts[2].prototype);
    std::filesystem::remove_all(dir);
  }

  SUBCASE("matching") {
    MatchingDataset ds = gen_matching_dataset(cfg);
    std::string dir = temp_dir("match_rt");
    write_dataset(ds, dir);
    CHECK(dataset_task(dir) == "match");
    MatchingDataset back = read_matching_dataset(dir);
    for (std::size_t i = 0; i < ds.test.size(); ++i)
      CHECK(encode_matching_item(back.test[i]) == encode_matching_item(ds.test[i]));
    std::filesystem::remove_all(dir);
  }
}

TEST_CASE("container: truncation and corruption are reported, not crashes") {
  std::string dir = temp_dir("container");
  std::filesystem::create_directories(dir);
  std::string path = dir + "/records.bin";
  write_container(path, {{1, 2, 3, 4, 5}, {9, 8, 7}});

  SUBCASE("round-trip") {
    auto records = read_container(path);
    REQUIRE(records.size() == 2);
    CHECK(records[0] == std::vector<std::uint8_t>{1, 2, 3, 4, 5});
    CHECK(records[1] == std::vector<std::uint8_t>{9, 8, 7});
  }

  SUBCASE("truncated file") {
    std::ifstream in(path, std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
    in.close();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 4));
    out.close();
    CHECK_THROWS_AS(read_container(path), IoError);
  }

  SUBCASE("flipped payload byte names the record") {
    std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
    // magic(8) + count(4) + len(4) puts offset 16 at record 0, byte 0.
    f.seekp(16);
    f.put(static_cast<char>(0xee));
    f.close();
    CHECK_THROWS_WITH_AS(read_container(path), doctest::Contains("record 0"), IoError);
  }

  SUBCASE("bad magic") {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "NOTMAGIC and more bytes here";
    out.close();
    CHECK_THROWS_AS(read_container(path), IoError);
  }

  std::filesystem::remove_all(dir);
}

TEST_CASE("vqa answers are roughly balanced over attributes") {
  GenConfig cfg = small_config();
  cfg.test_items = 400;
  VqaDataset ds = gen_vqa_dataset(cfg);
  std::map<int, int> counts;
  for (const VqaItem& item : ds.test) counts[item.answer_id]++;
  int majority = 0;
  for (const auto& [id, c] : counts) majority = std::max(majority, c);
  CHECK(static_cast<double>(majority) / ds.test.size() <=
        2.0 / static_cast<double>(cfg.n_attributes));
}
