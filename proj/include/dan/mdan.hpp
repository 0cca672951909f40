#ifndef DAN_MDAN_HPP_
#define DAN_MDAN_HPP_

#include <vector>

#include "dan/model.hpp"
#include "dan/rdan.hpp"

namespace dan {

struct MDanModel {
  ModelConfig cfg;
  TextEncoderParams encoder;
  Var p0, p0_b;
  std::vector<VisualStepParams> visual;
  std::vector<TextualStepParams> textual;
};

MDanModel bind_mdan(const ParamStore& store, const ModelConfig& cfg);

// Separate accumulators for the two attention streams.
struct DualMemories {
  Var m_v;
  Var m_u;
  int step = 0;
};

struct MDanStepOut {
  DualMemories memories;
  Var step_sim;  // s(k) = v(k) . u(k)
  AttentionResult visual;
  AttentionResult textual;
};

// Visual attention conditioned on m_v only, textual on m_u only; additive
// memory updates; returns the step similarity.
MDanStepOut mdan_step(Tape& tape, const DualMemories& mem, const Var& regions,
                      const EncodedText& text, const VisualStepParams& vis,
                      const TextualStepParams& txt, const DropoutPlan& dropout = {});

struct MDanSimilarityOut {
  Var total;                  // S = sum_{k=0..K} s(k)
  std::vector<Var> step_sims; // K+1 entries, s(0) first
  AttentionTrace trace;
};

// Paired rollout over both modalities (the training-time network).
MDanSimilarityOut mdan_similarity(Tape& tape, const RegionSet& regions,
                                  const TokenSequence& text, const MDanModel& model,
                                  const DropoutPlan& dropout = {});

enum class Modality { image, text };

// Concatenated context vectors of one modality: [(K+1) * d].
struct JointEmbedding {
  Modality modality;
  Var z;
};

// Single-modality pipelines. embed_image never touches text input or
// parameters, and embed_text never touches regions; inner products between
// the two embeddings reproduce mdan_similarity.
JointEmbedding embed_image(Tape& tape, const RegionSet& regions, const MDanModel& model);
JointEmbedding embed_text(Tape& tape, const TokenSequence& text, const MDanModel& model);

struct Quadruplet {
  const RegionSet* pos_image = nullptr;
  const TokenSequence* pos_text = nullptr;
  const RegionSet* neg_image = nullptr;
  const TokenSequence* neg_text = nullptr;
};

// Bidirectional max-margin ranking loss:
//   sum over quadruplets of max(0, m - S(v,u) + S(v-,u))
//                         + max(0, m - S(v,u) + S(v,u-)).
// Pipelines are computed once per distinct image/sentence in the batch.
Var ranking_loss(Tape& tape, const std::vector<Quadruplet>& batch,
                 const MDanModel& model, double margin,
                 const DropoutPlan& dropout = {});

struct MatchingPair {
  const RegionSet* image = nullptr;
  const TokenSequence* text = nullptr;
};

// For each positive pair, draws a negative image and a negative sentence
// uniformly from the other batch items. Requires batch size >= 2.
std::vector<Quadruplet> sample_negatives(const std::vector<MatchingPair>& batch,
                                         Rng& rng);

}  // namespace dan

#endif  // DAN_MDAN_HPP_
