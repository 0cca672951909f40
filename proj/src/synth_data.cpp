#include "dan/synth_data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "dan/container.hpp"
#include "dan/error.hpp"
#include "dan/hash.hpp"

namespace dan {

namespace {

using nlohmann::json;

constexpr int kManifestVersion = 1;
// Prototypes and attribute offsets are rejected until this far apart, which
// keeps both decodings comfortably above the noise floor.
constexpr double kMinSeparation = 1.0;
constexpr int kMaxAttempts = 10000;

const char* kNouns[26] = {"ant",   "bear",  "crab",  "deer",   "eagle", "fox",
                          "goat",  "heron", "ibis",  "jay",    "koala", "lion",
                          "mole",  "newt",  "otter", "panda",  "quail", "raven",
                          "seal",  "tiger", "urchin", "vole",  "walrus", "xerus",
                          "yak",   "zebra"};
const char* kColors[6] = {"red", "green", "blue", "yellow", "purple", "orange"};

std::string concept_name(int i) {
  if (i < 26) return kNouns[i];
  char buf[24];
  std::snprintf(buf, sizeof(buf), "concept%02d", i);
  return buf;
}

std::string attribute_name(int i) {
  if (i < 6) return kColors[i];
  char buf[24];
  std::snprintf(buf, sizeof(buf), "attr%d", i);
  return buf;
}

double sq_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

// Unit vector supported on coords [lo, hi), at least kMinSeparation from
// every vector already in `taken`.
std::vector<double> place_unit_vector(int dim, int lo, int hi, Rng& rng,
                                      const std::vector<std::vector<double>>& taken,
                                      const char* what) {
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::vector<double> v(dim, 0.0);
    double norm = 0.0;
    for (int i = lo; i < hi; ++i) {
      v[i] = rng.gaussian();
      norm += v[i] * v[i];
    }
    norm = std::sqrt(norm);
    if (norm < 1e-9) continue;
    for (int i = lo; i < hi; ++i) v[i] /= norm;
    bool ok = true;
    for (const auto& t : taken)
      if (sq_distance(v, t) < kMinSeparation * kMinSeparation) {
        ok = false;
        break;
      }
    if (ok) return v;
  }
  throw ValueError(std::string("cannot place distinguishable ") + what +
                   " vectors; lower the count or raise the dimension");
}

std::vector<int> sample_distinct(int count, int universe, Rng& rng) {
  // Partial Fisher-Yates over [0, universe).
  std::vector<int> pool(universe);
  for (int i = 0; i < universe; ++i) pool[i] = i;
  for (int i = 0; i < count; ++i) {
    int j = i + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(universe - i)));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

}  // namespace

void validate_gen_config(const GenConfig& cfg) {
  if (cfg.n_concepts < 1 || cfg.n_attributes < 1)
    throw ValueError("gen config: need at least one concept and attribute");
  if (cfg.attribute_subspace < 1 || cfg.attribute_subspace >= cfg.region_dim)
    throw ValueError("gen config: attribute subspace must be in [1, region_dim)");
  if (cfg.regions_per_scene < 1)
    throw ValueError("gen config: regions per scene must be >= 1");
  if (cfg.n_concepts < cfg.regions_per_scene)
    throw ValueError("gen config: vocabulary too small for requested scene size (" +
                     std::to_string(cfg.n_concepts) + " concepts < " +
                     std::to_string(cfg.regions_per_scene) + " regions)");
  if (cfg.train_items < 1) throw ValueError("gen config: train split must be non-empty");
  if (cfg.val_items < 0 || cfg.test_items < 0)
    throw ValueError("gen config: negative split size");
  if (cfg.noise_rel < 0.0) throw ValueError("gen config: negative noise");
  if (cfg.min_caption_concepts < 1 ||
      cfg.min_caption_concepts > cfg.max_caption_concepts)
    throw ValueError("gen config: bad caption concept bounds");
  if (cfg.max_caption_concepts > cfg.regions_per_scene)
    throw ValueError("gen config: captions cannot mention more concepts than regions");
  if (cfg.max_caption_concepts > cfg.n_concepts)
    throw ValueError("gen config: vocabulary too small for caption bounds");
}

ConceptVocabulary make_concept_vocabulary(const GenConfig& cfg, Rng& rng) {
  ConceptVocabulary vocab;
  vocab.tokens = {"<pad>", "what", "color", "is", "the"};
  vocab.tok_what = 1;
  vocab.tok_slot = 2;
  vocab.tok_is = 3;
  vocab.tok_the = 4;

  int concept_dim = cfg.region_dim - cfg.attribute_subspace;
  std::vector<std::vector<double>> protos;
  for (int c = 0; c < cfg.n_concepts; ++c) {
    protos.push_back(place_unit_vector(cfg.region_dim, 0, concept_dim, rng, protos,
                                       "concept prototype"));
    Concept entry;
    entry.name = concept_name(c);
    entry.token_id = static_cast<int>(vocab.tokens.size());
    entry.prototype = protos.back();
    vocab.tokens.push_back(entry.name);
    vocab.concepts.push_back(std::move(entry));
  }
  std::vector<std::vector<double>> offsets;
  for (int a = 0; a < cfg.n_attributes; ++a) {
    offsets.push_back(place_unit_vector(cfg.region_dim, concept_dim, cfg.region_dim,
                                        rng, offsets, "attribute offset"));
    AttributeValue attr;
    attr.name = attribute_name(a);
    attr.token_id = static_cast<int>(vocab.tokens.size());
    attr.offset = offsets.back();
    vocab.tokens.push_back(attr.name);
    vocab.attributes.push_back(std::move(attr));
  }

  double min_sep_sq = HUGE_VAL;
  for (std::size_t i = 0; i < protos.size(); ++i)
    for (std::size_t j = i + 1; j < protos.size(); ++j)
      min_sep_sq = std::min(min_sep_sq, sq_distance(protos[i], protos[j]));
  vocab.min_prototype_separation =
      protos.size() > 1 ? std::sqrt(min_sep_sq) : kMinSeparation;
  return vocab;
}

std::uint64_t scene_identity(const SyntheticScene& scene) {
  std::vector<std::pair<int, int>> key;
  for (const PlantedRegion& p : scene.planted) key.emplace_back(p.concept_id, p.attribute_id);
  std::sort(key.begin(), key.end());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [c, a] : key) {
    std::uint64_t packed = (static_cast<std::uint64_t>(c) << 32) |
                           static_cast<std::uint32_t>(a);
    h = fnv1a64(&packed, sizeof(packed), h);
  }
  return h;
}

namespace {

SyntheticScene build_scene(const GenConfig& cfg, const ConceptVocabulary& vocab,
                           const std::vector<int>& concepts,
                           const std::vector<int>& attributes,
                           const std::vector<int>& positions, double sigma, Rng& rng) {
  SyntheticScene scene;
  scene.regions.count = static_cast<std::size_t>(cfg.regions_per_scene);
  scene.regions.dim = static_cast<std::size_t>(cfg.region_dim);
  scene.regions.features.assign(scene.regions.count * scene.regions.dim, 0.0);
  for (std::size_t i = 0; i < concepts.size(); ++i) {
    int pos = positions[i];
    double* r = scene.regions.features.data() + pos * cfg.region_dim;
    const auto& proto = vocab.concepts[concepts[i]].prototype;
    const auto& offset = vocab.attributes[attributes[i]].offset;
    for (int j = 0; j < cfg.region_dim; ++j) r[j] = proto[j] + offset[j];
    scene.planted.push_back({pos, concepts[i], attributes[i]});
  }
  if (sigma > 0.0)
    for (double& v : scene.regions.features) v += sigma * rng.gaussian();
  std::sort(scene.planted.begin(), scene.planted.end(),
            [](const PlantedRegion& a, const PlantedRegion& b) {
              return a.region_index < b.region_index;
            });
  return scene;
}

}  // namespace

VqaDataset gen_vqa_dataset(const GenConfig& cfg) {
  validate_gen_config(cfg);
  VqaDataset ds;
  ds.cfg = cfg;
  Rng vocab_rng(mix_seed(cfg.seed, 0));
  ds.vocab = make_concept_vocabulary(cfg, vocab_rng);
  ds.sigma = cfg.noise_rel * ds.vocab.min_prototype_separation;

  // Split hygiene: a scene identity may repeat inside a split but never
  // appear in two different splits.
  std::unordered_map<std::uint64_t, int> seen;
  std::uint32_t next_id = 0;
  auto gen_split = [&](int count, std::uint64_t stream, int split_index) {
    Rng rng(mix_seed(cfg.seed, stream));
    std::vector<VqaItem> items;
    items.reserve(count);
    for (int n = 0; n < count; ++n) {
      VqaItem item;
      bool placed = false;
      for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
        std::vector<int> concepts =
            sample_distinct(cfg.regions_per_scene, cfg.n_concepts, rng);
        std::vector<int> attributes(concepts.size());
        for (int& a : attributes)
          a = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(cfg.n_attributes)));
        std::vector<int> positions(concepts.size());
        for (std::size_t i = 0; i < positions.size(); ++i)
          positions[i] = static_cast<int>(i);  // every region is planted
        SyntheticScene scene =
            build_scene(cfg, ds.vocab, concepts, attributes, positions, ds.sigma, rng);
        std::uint64_t identity = scene_identity(scene);
        int target = static_cast<int>(
            rng.bounded(static_cast<std::uint64_t>(cfg.regions_per_scene)));
        auto it = seen.find(identity);
        if (it != seen.end() && it->second != split_index) continue;
        seen.emplace(identity, split_index);
        item.scene = std::move(scene);
        const PlantedRegion& planted = item.scene.planted[target];
        item.question.ids = {ds.vocab.tok_what, ds.vocab.tok_slot, ds.vocab.tok_is,
                             ds.vocab.tok_the,
                             ds.vocab.concepts[planted.concept_id].token_id};
        item.question.valid_len = static_cast<int>(item.question.ids.size());
        item.answer_id = planted.attribute_id;
        item.planted_region = planted.region_index;
        item.keyword_pos = 4;
        placed = true;
      }
      if (!placed)
        throw ValueError("gen_vqa_dataset: insufficient distinct scenes for the "
                         "requested item count");
      item.id = next_id++;
      items.push_back(std::move(item));
    }
    return items;
  };

  ds.train = gen_split(cfg.train_items, 1, 0);
  ds.val = gen_split(cfg.val_items, 2, 1);
  ds.test = gen_split(cfg.test_items, 3, 2);
  return ds;
}

MatchingDataset gen_matching_dataset(const GenConfig& cfg) {
  validate_gen_config(cfg);
  MatchingDataset ds;
  ds.cfg = cfg;
  Rng vocab_rng(mix_seed(cfg.seed, 0));
  ds.vocab = make_concept_vocabulary(cfg, vocab_rng);
  ds.sigma = cfg.noise_rel * ds.vocab.min_prototype_separation;

  if (cfg.n_concepts > 64)
    throw ValueError("gen_matching_dataset: concept-set bookkeeping supports at "
                     "most 64 concepts");
  // Concept sets across the whole dataset form an antichain (no equal sets,
  // no subset relations), so every caption's own scene is strictly the best
  // match under concept overlap.
  std::vector<std::uint64_t> seen_masks;
  std::uint32_t next_id = 0;
  auto gen_split = [&](int count, std::uint64_t stream) {
    Rng rng(mix_seed(cfg.seed, stream));
    std::vector<MatchingItem> items;
    items.reserve(count);
    for (int n = 0; n < count; ++n) {
      MatchingItem item;
      bool placed = false;
      for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
        int mentioned = cfg.min_caption_concepts +
                        static_cast<int>(rng.bounded(static_cast<std::uint64_t>(
                            cfg.max_caption_concepts - cfg.min_caption_concepts + 1)));
        std::vector<int> concepts = sample_distinct(mentioned, cfg.n_concepts, rng);
        std::uint64_t mask = 0;
        for (int c : concepts) mask |= 1ULL << c;
        std::vector<int> attributes(concepts.size());
        for (int& a : attributes)
          a = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(cfg.n_attributes)));
        std::vector<int> positions =
            sample_distinct(mentioned, cfg.regions_per_scene, rng);
        bool conflict = false;
        for (std::uint64_t other : seen_masks)
          if ((mask & other) == mask || (mask & other) == other) {
            conflict = true;
            break;
          }
        if (conflict) continue;
        seen_masks.push_back(mask);
        item.scene = build_scene(cfg, ds.vocab, concepts, attributes, positions,
                                 ds.sigma, rng);
        for (std::size_t i = 0; i < concepts.size(); ++i) {
          item.caption.ids.push_back(ds.vocab.attributes[attributes[i]].token_id);
          item.caption.ids.push_back(ds.vocab.concepts[concepts[i]].token_id);
        }
        item.caption.valid_len = static_cast<int>(item.caption.ids.size());
        placed = true;
      }
      if (!placed)
        throw ValueError("gen_matching_dataset: insufficient distinct concept "
                         "combinations for the requested item count");
      item.id = next_id++;
      items.push_back(std::move(item));
    }
    return items;
  };

  ds.train = gen_split(cfg.train_items, 1);
  ds.val = gen_split(cfg.val_items, 2);
  ds.test = gen_split(cfg.test_items, 3);
  return ds;
}

// ---- serialization ---------------------------------------------------------

namespace {

void encode_scene(ByteWriter& w, const SyntheticScene& scene) {
  w.u32(static_cast<std::uint32_t>(scene.regions.count));
  w.u32(static_cast<std::uint32_t>(scene.regions.dim));
  w.f64_span(scene.regions.features.data(), scene.regions.features.size());
  w.u32(static_cast<std::uint32_t>(scene.planted.size()));
  for (const PlantedRegion& p : scene.planted) {
    w.u32(static_cast<std::uint32_t>(p.region_index));
    w.u32(static_cast<std::uint32_t>(p.concept_id));
    w.u32(static_cast<std::uint32_t>(p.attribute_id));
  }
}

SyntheticScene decode_scene(ByteReader& r) {
  SyntheticScene scene;
  scene.regions.count = r.u32();
  scene.regions.dim = r.u32();
  scene.regions.features.resize(scene.regions.count * scene.regions.dim);
  r.f64_span(scene.regions.features.data(), scene.regions.features.size());
  std::uint32_t planted = r.u32();
  for (std::uint32_t i = 0; i < planted; ++i) {
    PlantedRegion p;
    p.region_index = static_cast<int>(r.u32());
    p.concept_id = static_cast<int>(r.u32());
    p.attribute_id = static_cast<int>(r.u32());
    scene.planted.push_back(p);
  }
  return scene;
}

void encode_tokens(ByteWriter& w, const TokenSequence& seq) {
  w.u32(static_cast<std::uint32_t>(seq.ids.size()));
  w.u32(static_cast<std::uint32_t>(seq.valid_len));
  for (int id : seq.ids) w.u32(static_cast<std::uint32_t>(id));
}

TokenSequence decode_tokens(ByteReader& r) {
  TokenSequence seq;
  std::uint32_t n = r.u32();
  seq.valid_len = static_cast<int>(r.u32());
  for (std::uint32_t i = 0; i < n; ++i) seq.ids.push_back(static_cast<int>(r.u32()));
  return seq;
}

}  // namespace

std::vector<std::uint8_t> encode_vqa_item(const VqaItem& item) {
  ByteWriter w;
  w.u32(item.id);
  encode_scene(w, item.scene);
  encode_tokens(w, item.question);
  w.u32(static_cast<std::uint32_t>(item.answer_id));
  w.u32(static_cast<std::uint32_t>(item.planted_region));
  w.u32(static_cast<std::uint32_t>(item.keyword_pos));
  return w.take();
}

VqaItem decode_vqa_item(const std::vector<std::uint8_t>& payload) {
  ByteReader r(payload);
  VqaItem item;
  item.id = r.u32();
  item.scene = decode_scene(r);
  item.question = decode_tokens(r);
  item.answer_id = static_cast<int>(r.u32());
  item.planted_region = static_cast<int>(r.u32());
  item.keyword_pos = static_cast<int>(r.u32());
  if (!r.exhausted()) throw IoError("malformed record: trailing bytes in vqa item");
  return item;
}

std::vector<std::uint8_t> encode_matching_item(const MatchingItem& item) {
  ByteWriter w;
  w.u32(item.id);
  encode_scene(w, item.scene);
  encode_tokens(w, item.caption);
  return w.take();
}

MatchingItem decode_matching_item(const std::vector<std::uint8_t>& payload) {
  ByteReader r(payload);
  MatchingItem item;
  item.id = r.u32();
  item.scene = decode_scene(r);
  item.caption = decode_tokens(r);
  if (!r.exhausted()) throw IoError("malformed record: trailing bytes in matching item");
  return item;
}

namespace {

json vocab_to_json(const ConceptVocabulary& vocab) {
  json concepts = json::array();
  for (const Concept& c : vocab.concepts)
    concepts.push_back({{"name", c.name},
                        {"token_id", c.token_id},
                        {"prototype", c.prototype}});
  json attributes = json::array();
  for (const AttributeValue& a : vocab.attributes)
    attributes.push_back({{"name", a.name},
                          {"token_id", a.token_id},
                          {"offset", a.offset}});
  return {{"concepts", concepts},
          {"attributes", attributes},
          {"question_tokens",
           {{"what", vocab.tok_what},
            {"slot", vocab.tok_slot},
            {"is", vocab.tok_is},
            {"the", vocab.tok_the}}},
          {"min_prototype_separation", vocab.min_prototype_separation}};
}

ConceptVocabulary vocab_from_json(const json& j, std::vector<std::string> tokens) {
  ConceptVocabulary vocab;
  vocab.tokens = std::move(tokens);
  for (const auto& c : j.at("concepts")) {
    Concept entry;
    entry.name = c.at("name").get<std::string>();
    entry.token_id = c.at("token_id").get<int>();
    entry.prototype = c.at("prototype").get<std::vector<double>>();
    vocab.concepts.push_back(std::move(entry));
  }
  for (const auto& a : j.at("attributes")) {
    AttributeValue attr;
    attr.name = a.at("name").get<std::string>();
    attr.token_id = a.at("token_id").get<int>();
    attr.offset = a.at("offset").get<std::vector<double>>();
    vocab.attributes.push_back(std::move(attr));
  }
  const auto& q = j.at("question_tokens");
  vocab.tok_what = q.at("what").get<int>();
  vocab.tok_slot = q.at("slot").get<int>();
  vocab.tok_is = q.at("is").get<int>();
  vocab.tok_the = q.at("the").get<int>();
  vocab.min_prototype_separation = j.at("min_prototype_separation").get<double>();
  return vocab;
}

json config_to_json(const GenConfig& cfg) {
  return {{"n_concepts", cfg.n_concepts},
          {"n_attributes", cfg.n_attributes},
          {"region_dim", cfg.region_dim},
          {"attribute_subspace", cfg.attribute_subspace},
          {"regions_per_scene", cfg.regions_per_scene},
          {"train_items", cfg.train_items},
          {"val_items", cfg.val_items},
          {"test_items", cfg.test_items},
          {"noise_rel", cfg.noise_rel},
          {"min_caption_concepts", cfg.min_caption_concepts},
          {"max_caption_concepts", cfg.max_caption_concepts},
          {"seed", cfg.seed}};
}

GenConfig config_from_json(const json& j) {
  GenConfig cfg;
  cfg.n_concepts = j.at("n_concepts").get<int>();
  cfg.n_attributes = j.at("n_attributes").get<int>();
  cfg.region_dim = j.at("region_dim").get<int>();
  cfg.attribute_subspace = j.at("attribute_subspace").get<int>();
  cfg.regions_per_scene = j.at("regions_per_scene").get<int>();
  cfg.train_items = j.at("train_items").get<int>();
  cfg.val_items = j.at("val_items").get<int>();
  cfg.test_items = j.at("test_items").get<int>();
  cfg.noise_rel = j.at("noise_rel").get<double>();
  cfg.min_caption_concepts = j.at("min_caption_concepts").get<int>();
  cfg.max_caption_concepts = j.at("max_caption_concepts").get<int>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

void write_manifest(const std::string& dir, const std::string& task,
                    const GenConfig& cfg, const ConceptVocabulary& vocab,
                    double sigma, std::size_t train_n, std::size_t val_n,
                    std::size_t test_n) {
  json manifest = {
      {"version", kManifestVersion},
      {"task", task},
      {"seed", cfg.seed},
      {"dims",
       {{"region_dim", cfg.region_dim},
        {"attribute_subspace", cfg.attribute_subspace},
        {"regions_per_scene", cfg.regions_per_scene}}},
      {"counts",
       {{"train", train_n},
        {"val", val_n},
        {"test", test_n},
        {"concepts", vocab.concepts.size()},
        {"attributes", vocab.attributes.size()},
        {"vocab", vocab.tokens.size()}}},
      {"noise_sigma", sigma},
      {"config", config_to_json(cfg)},
      {"vocabulary", vocab_to_json(vocab)}};
  std::ofstream out(dir + "/manifest.json", std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write manifest in " + dir);
  out << manifest.dump(2) << "\n";
  if (!out) throw IoError("failed writing manifest in " + dir);
}

json read_manifest(const std::string& dir) {
  std::ifstream in(dir + "/manifest.json", std::ios::binary);
  if (!in) throw IoError("cannot read dataset manifest in " + dir);
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw IoError("malformed dataset manifest in " + dir + ": " + e.what());
  }
  if (manifest.at("version").get<int>() != kManifestVersion)
    throw IoError("dataset version mismatch in " + dir + ": got " +
                  std::to_string(manifest.at("version").get<int>()) + ", expected " +
                  std::to_string(kManifestVersion));
  return manifest;
}

template <typename Item>
void write_split(const std::string& path, const std::vector<Item>& items,
                 std::vector<std::uint8_t> (*encode)(const Item&)) {
  std::vector<std::vector<std::uint8_t>> records;
  records.reserve(items.size());
  for (const Item& item : items) records.push_back(encode(item));
  write_container(path, records);
}

template <typename Item>
std::vector<Item> read_split(const std::string& path,
                             Item (*decode)(const std::vector<std::uint8_t>&)) {
  std::vector<Item> items;
  for (const auto& rec : read_container(path)) items.push_back(decode(rec));
  return items;
}

}  // namespace

void write_dataset(const VqaDataset& ds, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_split(dir + "/train.bin", ds.train, &encode_vqa_item);
  write_split(dir + "/val.bin", ds.val, &encode_vqa_item);
  write_split(dir + "/test.bin", ds.test, &encode_vqa_item);
  write_vocab_file(dir + "/vocab.txt", ds.vocab.tokens);
  write_manifest(dir, "vqa", ds.cfg, ds.vocab, ds.sigma, ds.train.size(),
                 ds.val.size(), ds.test.size());
}

void write_dataset(const MatchingDataset& ds, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_split(dir + "/train.bin", ds.train, &encode_matching_item);
  write_split(dir + "/val.bin", ds.val, &encode_matching_item);
  write_split(dir + "/test.bin", ds.test, &encode_matching_item);
  write_vocab_file(dir + "/vocab.txt", ds.vocab.tokens);
  write_manifest(dir, "match", ds.cfg, ds.vocab, ds.sigma, ds.train.size(),
                 ds.val.size(), ds.test.size());
}

std::string dataset_task(const std::string& dir) {
  return read_manifest(dir).at("task").get<std::string>();
}

VqaDataset read_vqa_dataset(const std::string& dir) {
  json manifest = read_manifest(dir);
  if (manifest.at("task").get<std::string>() != "vqa")
    throw IoError("dataset in " + dir + " is not a vqa dataset");
  VqaDataset ds;
  ds.cfg = config_from_json(manifest.at("config"));
  ds.vocab = vocab_from_json(manifest.at("vocabulary"),
                             read_vocab_file(dir + "/vocab.txt"));
  ds.sigma = manifest.at("noise_sigma").get<double>();
  ds.train = read_split(dir + "/train.bin", &decode_vqa_item);
  ds.val = read_split(dir + "/val.bin", &decode_vqa_item);
  ds.test = read_split(dir + "/test.bin", &decode_vqa_item);
  return ds;
}

MatchingDataset read_matching_dataset(const std::string& dir) {
  json manifest = read_manifest(dir);
  if (manifest.at("task").get<std::string>() != "match")
    throw IoError("dataset in " + dir + " is not a matching dataset");
  MatchingDataset ds;
  ds.cfg = config_from_json(manifest.at("config"));
  ds.vocab = vocab_from_json(manifest.at("vocabulary"),
                             read_vocab_file(dir + "/vocab.txt"));
  ds.sigma = manifest.at("noise_sigma").get<double>();
  ds.train = read_split(dir + "/train.bin", &decode_matching_item);
  ds.val = read_split(dir + "/val.bin", &decode_matching_item);
  ds.test = read_split(dir + "/test.bin", &decode_matching_item);
  return ds;
}

int nearest_prototype_answer(const VqaItem& item, const ConceptVocabulary& vocab) {
  if (item.keyword_pos < 0 ||
      item.keyword_pos >= static_cast<int>(item.question.ids.size()))
    throw ValueError("nearest_prototype_answer: keyword position out of range");
  int keyword = item.question.ids[item.keyword_pos];
  int concept_id = -1;
  for (std::size_t c = 0; c < vocab.concepts.size(); ++c)
    if (vocab.concepts[c].token_id == keyword) {
      concept_id = static_cast<int>(c);
      break;
    }
  if (concept_id < 0)
    throw ValueError("nearest_prototype_answer: question keyword is not a concept");

  const auto& proto = vocab.concepts[concept_id].prototype;
  const RegionSet& regions = item.scene.regions;
  std::size_t best_region = 0;
  double best_dist = HUGE_VAL;
  for (std::size_t n = 0; n < regions.count; ++n) {
    const double* r = regions.row_ptr(n);
    double acc = 0.0;
    for (std::size_t j = 0; j < regions.dim; ++j) {
      double d = r[j] - proto[j];
      acc += d * d;
    }
    if (acc < best_dist) {
      best_dist = acc;
      best_region = n;
    }
  }

  const double* r = regions.row_ptr(best_region);
  int best_attr = 0;
  double best_attr_dist = HUGE_VAL;
  for (std::size_t a = 0; a < vocab.attributes.size(); ++a) {
    const auto& offset = vocab.attributes[a].offset;
    double acc = 0.0;
    for (std::size_t j = 0; j < regions.dim; ++j) {
      double d = (r[j] - proto[j]) - offset[j];
      acc += d * d;
    }
    if (acc < best_attr_dist) {
      best_attr_dist = acc;
      best_attr = static_cast<int>(a);
    }
  }
  return best_attr;
}

}  // namespace dan
