#include "dan/mdan.hpp"

#include <unordered_map>

#include "dan/error.hpp"

namespace dan {

MDanModel bind_mdan(const ParamStore& store, const ModelConfig& cfg) {
  if (cfg.kind != ModelKind::mdan)
    throw ValueError("bind_mdan: config kind is not mdan");
  std::string prefix = param_prefix(cfg.kind);
  MDanModel m;
  m.cfg = cfg;
  m.encoder = bind_text_encoder_params(store, prefix);
  m.p0 = store.get(prefix + "vis/0/P");
  m.p0_b = store.get(prefix + "vis/0/Pb");
  for (int k = 1; k <= cfg.attention_steps; ++k) {
    m.visual.push_back(bind_visual_step(store, prefix, k));
    m.textual.push_back(bind_textual_step(store, prefix, k));
  }
  return m;
}

MDanStepOut mdan_step(Tape& tape, const DualMemories& mem, const Var& regions,
                      const EncodedText& text, const VisualStepParams& vis,
                      const TextualStepParams& txt, const DropoutPlan& dropout) {
  int k = mem.step + 1;
  MDanStepOut out;
  out.visual = visual_attend(tape, regions, mem.m_v, vis, dropout, k);
  out.textual = textual_attend(tape, text, mem.m_u, txt, dropout, k);
  out.memories.m_v = add(tape, mem.m_v, out.visual.context);
  out.memories.m_u = add(tape, mem.m_u, out.textual.context);
  out.memories.step = k;
  out.step_sim = dot(tape, out.visual.context, out.textual.context);
  return out;
}

MDanSimilarityOut mdan_similarity(Tape& tape, const RegionSet& regions,
                                  const TokenSequence& text, const MDanModel& model,
                                  const DropoutPlan& dropout) {
  Var region_mat = region_var(regions);
  EncodedText encoded = encode_bidirectional(tape, text, model.encoder);
  DualMemories mem;
  mem.m_v = global_visual_context(tape, region_mat, model.p0, model.p0_b);
  mem.m_u = global_textual_context(tape, encoded);
  mem.step = 0;

  MDanSimilarityOut out;
  out.step_sims.push_back(dot(tape, mem.m_v, mem.m_u));
  Var total = out.step_sims[0];
  for (int k = 1; k <= model.cfg.attention_steps; ++k) {
    MDanStepOut step = mdan_step(tape, mem, region_mat, encoded,
                                 model.visual[k - 1], model.textual[k - 1], dropout);
    mem = step.memories;
    out.step_sims.push_back(step.step_sim);
    total = add(tape, total, step.step_sim);
    out.trace.visual.push_back(step.visual.weights->values);
    out.trace.textual.push_back(step.textual.weights->values);
  }
  out.total = total;
  return out;
}

namespace {

std::vector<Var> visual_contexts(Tape& tape, const RegionSet& regions,
                                 const MDanModel& model, const DropoutPlan& dropout) {
  Var region_mat = region_var(regions);
  std::vector<Var> contexts;
  Var memory = global_visual_context(tape, region_mat, model.p0, model.p0_b);
  contexts.push_back(memory);
  for (int k = 1; k <= model.cfg.attention_steps; ++k) {
    AttentionResult att =
        visual_attend(tape, region_mat, memory, model.visual[k - 1], dropout, k);
    contexts.push_back(att.context);
    memory = add(tape, memory, att.context);
  }
  return contexts;
}

std::vector<Var> textual_contexts(Tape& tape, const TokenSequence& text,
                                  const MDanModel& model, const DropoutPlan& dropout) {
  EncodedText encoded = encode_bidirectional(tape, text, model.encoder);
  std::vector<Var> contexts;
  Var memory = global_textual_context(tape, encoded);
  contexts.push_back(memory);
  for (int k = 1; k <= model.cfg.attention_steps; ++k) {
    AttentionResult att =
        textual_attend(tape, encoded, memory, model.textual[k - 1], dropout, k);
    contexts.push_back(att.context);
    memory = add(tape, memory, att.context);
  }
  return contexts;
}

}  // namespace

JointEmbedding embed_image(Tape& tape, const RegionSet& regions,
                           const MDanModel& model) {
  std::vector<Var> contexts = visual_contexts(tape, regions, model, {});
  return {Modality::image, concat(tape, contexts)};
}

JointEmbedding embed_text(Tape& tape, const TokenSequence& text,
                          const MDanModel& model) {
  std::vector<Var> contexts = textual_contexts(tape, text, model, {});
  return {Modality::text, concat(tape, contexts)};
}

Var ranking_loss(Tape& tape, const std::vector<Quadruplet>& batch,
                 const MDanModel& model, double margin, const DropoutPlan& dropout) {
  if (batch.empty()) throw ValueError("ranking_loss: empty batch");
  if (margin < 0.0) throw ValueError("ranking_loss: margin must be >= 0");

  // Each distinct image/sentence is embedded once per batch; hinge terms
  // share the cached context vectors.
  std::unordered_map<const void*, std::vector<Var>> image_cache, text_cache;
  auto image_ctx = [&](const RegionSet* r) -> const std::vector<Var>& {
    auto it = image_cache.find(r);
    if (it == image_cache.end())
      it = image_cache.emplace(r, visual_contexts(tape, *r, model, dropout)).first;
    return it->second;
  };
  auto text_ctx = [&](const TokenSequence* t) -> const std::vector<Var>& {
    auto it = text_cache.find(t);
    if (it == text_cache.end())
      it = text_cache.emplace(t, textual_contexts(tape, *t, model, dropout)).first;
    return it->second;
  };
  auto similarity = [&](const std::vector<Var>& v, const std::vector<Var>& u) {
    Var s = dot(tape, v[0], u[0]);
    for (std::size_t k = 1; k < v.size(); ++k)
      s = add(tape, s, dot(tape, v[k], u[k]));
    return s;
  };

  Var margin_c = make_scalar(margin);
  Var loss;
  for (const Quadruplet& q : batch) {
    if (!q.pos_image || !q.pos_text || !q.neg_image || !q.neg_text)
      throw ValueError("ranking_loss: quadruplet with null member");
    const auto& v_pos = image_ctx(q.pos_image);
    const auto& u_pos = text_ctx(q.pos_text);
    Var s_pos = similarity(v_pos, u_pos);
    Var s_neg_image = similarity(image_ctx(q.neg_image), u_pos);
    Var s_neg_text = similarity(v_pos, text_ctx(q.neg_text));
    Var neg_pos = scale(tape, s_pos, -1.0);
    Var term_img = relu(tape, add(tape, add(tape, margin_c, neg_pos), s_neg_image));
    Var term_txt = relu(tape, add(tape, add(tape, margin_c, neg_pos), s_neg_text));
    Var pair_loss = add(tape, term_img, term_txt);
    loss = loss ? add(tape, loss, pair_loss) : pair_loss;
  }
  return loss;
}

std::vector<Quadruplet> sample_negatives(const std::vector<MatchingPair>& batch,
                                         Rng& rng) {
  if (batch.size() < 2)
    throw ValueError("sample_negatives: batch size must be >= 2, got " +
                     std::to_string(batch.size()));
  std::vector<Quadruplet> out;
  out.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    std::size_t j = static_cast<std::size_t>(rng.bounded(batch.size() - 1));
    if (j >= i) ++j;
    std::size_t k = static_cast<std::size_t>(rng.bounded(batch.size() - 1));
    if (k >= i) ++k;
    out.push_back({batch[i].image, batch[i].text, batch[j].image, batch[k].text});
  }
  return out;
}

}  // namespace dan
