#ifndef DAN_RDAN_HPP_
#define DAN_RDAN_HPP_

#include <map>
#include <vector>

#include "dan/attention.hpp"
#include "dan/model.hpp"

namespace dan {

// Per-step attention weights kept for visualization: one row per step and
// modality.
struct AttentionTrace {
  std::vector<std::vector<double>> visual;
  std::vector<std::vector<double>> textual;
};

struct RDanModel {
  ModelConfig cfg;
  TextEncoderParams encoder;
  Var p0, p0_b;
  std::vector<VisualStepParams> visual;    // steps 1..K at index 0..K-1
  std::vector<TextualStepParams> textual;
  Var ans_w, ans_b;
};

RDanModel bind_rdan(const ParamStore& store, const ModelConfig& cfg);

// m(0) = v(0) * u(0), the elementwise product of the global context vectors.
Var init_joint_memory(Tape& tape, const Var& v0, const Var& u0);

struct RDanStepOut {
  Var memory;
  AttentionResult visual;
  AttentionResult textual;
};

// Both attentions conditioned on the same joint memory, then
// m(k) = m(k-1) + v(k) * u(k).
RDanStepOut rdan_step(Tape& tape, const Var& memory, const Var& regions,
                      const EncodedText& text, const VisualStepParams& vis,
                      const TextualStepParams& txt, const DropoutPlan& dropout = {},
                      int step = 0);

struct RDanForwardOut {
  Var logits;  // W_ans m(K) + b
  Var probs;   // softmax(logits)
  AttentionTrace trace;
};

RDanForwardOut rdan_forward(Tape& tape, const RegionSet& regions,
                            const TokenSequence& question, const RDanModel& model,
                            const DropoutPlan& dropout = {});

// -log softmax(logits)[target], computed in fused form.
Var cross_entropy_loss(Tape& tape, const Var& logits, int target);

// Smallest index attaining the maximum probability.
int predict_answer(const Var& probs);
// Argmax restricted to a candidate id set (multiple-choice readout).
int predict_answer_restricted(const Var& probs, const std::vector<int>& candidates);

// min(count(predicted)/3, 1). Synthetic data uses a single gold answer with
// an implied count of 3, which degenerates to exact match.
double vqa_accuracy(int predicted, const std::map<int, int>& human_label_counts);

}  // namespace dan

#endif  // DAN_RDAN_HPP_
