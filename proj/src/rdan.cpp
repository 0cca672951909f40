#include "dan/rdan.hpp"

#include <algorithm>

#include "dan/error.hpp"

namespace dan {

RDanModel bind_rdan(const ParamStore& store, const ModelConfig& cfg) {
  if (cfg.kind != ModelKind::rdan)
    throw ValueError("bind_rdan: config kind is not rdan");
  std::string prefix = param_prefix(cfg.kind);
  RDanModel m;
  m.cfg = cfg;
  m.encoder = bind_text_encoder_params(store, prefix);
  m.p0 = store.get(prefix + "vis/0/P");
  m.p0_b = store.get(prefix + "vis/0/Pb");
  for (int k = 1; k <= cfg.attention_steps; ++k) {
    m.visual.push_back(bind_visual_step(store, prefix, k));
    m.textual.push_back(bind_textual_step(store, prefix, k));
  }
  m.ans_w = store.get(prefix + "ans/W");
  m.ans_b = store.get(prefix + "ans/b");
  return m;
}

Var init_joint_memory(Tape& tape, const Var& v0, const Var& u0) {
  return mul_elem(tape, v0, u0);
}

RDanStepOut rdan_step(Tape& tape, const Var& memory, const Var& regions,
                      const EncodedText& text, const VisualStepParams& vis,
                      const TextualStepParams& txt, const DropoutPlan& dropout,
                      int step) {
  RDanStepOut out;
  out.visual = visual_attend(tape, regions, memory, vis, dropout, step);
  out.textual = textual_attend(tape, text, memory, txt, dropout, step);
  out.memory = add(tape, memory, mul_elem(tape, out.visual.context, out.textual.context));
  return out;
}

RDanForwardOut rdan_forward(Tape& tape, const RegionSet& regions,
                            const TokenSequence& question, const RDanModel& model,
                            const DropoutPlan& dropout) {
  Var region_mat = region_var(regions);
  EncodedText text = encode_bidirectional(tape, question, model.encoder);
  Var v0 = global_visual_context(tape, region_mat, model.p0, model.p0_b);
  Var u0 = global_textual_context(tape, text);
  Var memory = init_joint_memory(tape, v0, u0);

  RDanForwardOut out;
  for (int k = 1; k <= model.cfg.attention_steps; ++k) {
    RDanStepOut step = rdan_step(tape, memory, region_mat, text,
                                 model.visual[k - 1], model.textual[k - 1],
                                 dropout, k);
    memory = step.memory;
    out.trace.visual.push_back(step.visual.weights->values);
    out.trace.textual.push_back(step.textual.weights->values);
  }

  out.logits = affine(tape, memory, model.ans_w, model.ans_b);
  std::vector<std::uint8_t> all(out.logits->numel(), 1);
  out.probs = softmax_masked(tape, out.logits, all);
  return out;
}

Var cross_entropy_loss(Tape& tape, const Var& logits, int target) {
  return cross_entropy_from_logits(tape, logits, target);
}

int predict_answer(const Var& probs) {
  if (probs->numel() == 0) throw ValueError("predict_answer: empty distribution");
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs->numel(); ++i)
    if (probs->values[i] > probs->values[best]) best = i;
  return static_cast<int>(best);
}

int predict_answer_restricted(const Var& probs, const std::vector<int>& candidates) {
  if (candidates.empty())
    throw ValueError("predict_answer_restricted: empty candidate set");
  int best = -1;
  for (int c : candidates) {
    if (c < 0 || static_cast<std::size_t>(c) >= probs->numel())
      throw ValueError("predict_answer_restricted: candidate id " +
                       std::to_string(c) + " out of range");
    if (best < 0 || probs->values[c] > probs->values[best] ||
        (probs->values[c] == probs->values[best] && c < best))
      best = c;
  }
  return best;
}

double vqa_accuracy(int predicted, const std::map<int, int>& human_label_counts) {
  auto it = human_label_counts.find(predicted);
  int count = it == human_label_counts.end() ? 0 : it->second;
  if (count < 0) throw ValueError("vqa_accuracy: negative label count");
  return std::min(static_cast<double>(count) / 3.0, 1.0);
}

}  // namespace dan
