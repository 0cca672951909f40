#ifndef DAN_SYNTH_DATA_HPP_
#define DAN_SYNTH_DATA_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "dan/attention.hpp"
#include "dan/rng.hpp"
#include "dan/text_encoder.hpp"

namespace dan {

// A named visual concept: a prototype feature vector plus the token that
// names it. Prototypes are unit vectors in the leading coordinates of the
// region space; attribute offsets live in the trailing coordinates, so a
// region's concept and attribute are independently decodable.
struct Concept {
  std::string name;
  int token_id = 0;
  std::vector<double> prototype;  // [region_dim]
};

struct AttributeValue {
  std::string name;
  int token_id = 0;
  std::vector<double> offset;  // [region_dim]
};

struct ConceptVocabulary {
  std::vector<Concept> concepts;
  std::vector<AttributeValue> attributes;
  std::vector<std::string> tokens;  // id = index; id 0 is "<pad>"
  int tok_what = 0, tok_slot = 0, tok_is = 0, tok_the = 0;
  double min_prototype_separation = 0.0;
};

struct GenConfig {
  int n_concepts = 26;
  int n_attributes = 6;
  int region_dim = 32;
  int attribute_subspace = 8;  // trailing coordinates reserved for attributes
  int regions_per_scene = 8;
  int train_items = 5000;
  int val_items = 500;
  int test_items = 500;
  // Per-coordinate Gaussian noise, as a fraction of the minimum prototype
  // separation.
  double noise_rel = 0.05;
  // Matching task: number of concepts a caption mentions.
  int min_caption_concepts = 3;
  int max_caption_concepts = 5;
  std::uint64_t seed = 42;
};

void validate_gen_config(const GenConfig& cfg);

struct PlantedRegion {
  int region_index = 0;
  int concept_id = 0;
  int attribute_id = 0;
};

struct SyntheticScene {
  RegionSet regions;
  std::vector<PlantedRegion> planted;  // exactly one region per planted concept
};

struct VqaItem {
  std::uint32_t id = 0;
  SyntheticScene scene;
  TokenSequence question;  // "what <slot> is the <concept>"
  int answer_id = 0;       // attribute value index in [0, n_attributes)
  int planted_region = 0;  // region the question is about
  int keyword_pos = 0;     // question position of the concept word
};

struct MatchingItem {
  std::uint32_t id = 0;
  SyntheticScene scene;
  TokenSequence caption;  // "<attr> <concept>" pairs for the mentioned concepts
};

struct VqaDataset {
  GenConfig cfg;
  ConceptVocabulary vocab;
  double sigma = 0.0;  // absolute per-coordinate noise
  std::vector<VqaItem> train, val, test;
};

struct MatchingDataset {
  GenConfig cfg;
  ConceptVocabulary vocab;
  double sigma = 0.0;
  std::vector<MatchingItem> train, val, test;
};

ConceptVocabulary make_concept_vocabulary(const GenConfig& cfg, Rng& rng);

// Deterministic given (cfg, cfg.seed). Splits are disjoint by scene identity
// (concept/attribute assignment), and every question is answerable from the
// planted region's attribute.
VqaDataset gen_vqa_dataset(const GenConfig& cfg);

// Each scene gets one positive caption naming all of its planted concepts;
// concept sets are unique across the whole dataset so positives are uniquely
// best. Throws ValueError when the combination space is too small.
MatchingDataset gen_matching_dataset(const GenConfig& cfg);

// Scene identity hash used for split hygiene (ignores noise realization).
std::uint64_t scene_identity(const SyntheticScene& scene);

// Directory layout: train.bin / val.bin / test.bin (record containers),
// manifest.json, vocab.txt.
void write_dataset(const VqaDataset& ds, const std::string& dir);
void write_dataset(const MatchingDataset& ds, const std::string& dir);
std::string dataset_task(const std::string& dir);  // "vqa" or "match"
VqaDataset read_vqa_dataset(const std::string& dir);
MatchingDataset read_matching_dataset(const std::string& dir);

// Record codecs (exposed for the embedding export, which shares the
// container format).
std::vector<std::uint8_t> encode_vqa_item(const VqaItem& item);
VqaItem decode_vqa_item(const std::vector<std::uint8_t>& payload);
std::vector<std::uint8_t> encode_matching_item(const MatchingItem& item);
MatchingItem decode_matching_item(const std::vector<std::uint8_t>& payload);

// Brute-force nearest-prototype reader: locates the questioned concept's
// region by prototype distance and decodes its attribute by offset distance.
// Learns nothing; used as the solvability oracle.
int nearest_prototype_answer(const VqaItem& item, const ConceptVocabulary& vocab);

}  // namespace dan

#endif  // DAN_SYNTH_DATA_HPP_
