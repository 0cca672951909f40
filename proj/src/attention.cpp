#include "dan/attention.hpp"

#include "dan/error.hpp"

namespace dan {

Var region_var(const RegionSet& regions) {
  if (regions.count == 0) throw ValueError("region set is empty");
  if (regions.features.size() != regions.count * regions.dim)
    throw ShapeError("region set: " + std::to_string(regions.features.size()) +
                     " values for [" + std::to_string(regions.count) + " x " +
                     std::to_string(regions.dim) + "]");
  return make_tensor({regions.count, regions.dim}, regions.features);
}

Var apply_dropout(Tape& tape, const Var& x, const DropoutPlan& plan) {
  if (!plan.active()) return x;
  // Inverted dropout: surviving units scaled by 1/(1-rate) so evaluation
  // needs no rescaling.
  double keep = 1.0 - plan.rate;
  std::vector<double> mask(x->numel());
  for (double& m : mask)
    m = plan.rng->uniform() < plan.rate ? 0.0 : 1.0 / keep;
  return mul_elem(tape, x, make_tensor(x->shape, std::move(mask)));
}

namespace {

// Shared two-branch gated scoring: score_i = Wh (tanh(W item_i + b) * mem_gate) + b.
Var gated_scores(Tape& tape, const std::vector<Var>& items, const Var& memory,
                 const Var& w, const Var& w_b, const Var& wm, const Var& wm_b,
                 const Var& wh, const Var& wh_b, const DropoutPlan& dropout,
                 const std::vector<std::uint8_t>& mask) {
  Var mem_gate = tanh_elem(tape, affine(tape, memory, wm, wm_b));
  std::vector<Var> scores;
  scores.reserve(items.size());
  Var masked_zero;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!mask[i]) {
      if (!masked_zero) masked_zero = make_zeros({1});
      scores.push_back(masked_zero);
      continue;
    }
    Var hidden = mul_elem(tape, tanh_elem(tape, affine(tape, items[i], w, w_b)),
                          mem_gate);
    hidden = apply_dropout(tape, hidden, dropout);
    scores.push_back(affine(tape, hidden, wh, wh_b));
  }
  return concat(tape, scores);
}

}  // namespace

AttentionResult visual_attend(Tape& tape, const Var& regions, const Var& memory,
                              const VisualStepParams& params,
                              const DropoutPlan& dropout, int step) {
  if (regions->shape.size() != 2 || regions->rows() == 0)
    throw ValueError("visual_attend: need a non-empty [N x D_v] region matrix, got " +
                     shape_str(regions->shape));
  std::size_t n = regions->rows();
  std::vector<Var> items;
  items.reserve(n);
  for (std::size_t i = 0; i < n; ++i) items.push_back(row(tape, regions, i));
  std::vector<std::uint8_t> mask(n, 1);
  Var scores = gated_scores(tape, items, memory, params.w, params.w_b, params.wm,
                            params.wm_b, params.wh, params.wh_b, dropout, mask);
  AttentionResult out;
  out.step = step;
  out.weights = softmax_masked(tape, scores, mask);
  Var averaged = weighted_sum(tape, out.weights, regions);
  out.context = tanh_elem(tape, affine(tape, averaged, params.p, params.p_b));
  return out;
}

AttentionResult textual_attend(Tape& tape, const EncodedText& text, const Var& memory,
                               const TextualStepParams& params,
                               const DropoutPlan& dropout, int step) {
  if (text.valid_len < 1) throw ValueError("textual_attend: empty text");
  std::size_t total = text.tokens.size();
  std::vector<std::uint8_t> mask(total, 0);
  for (std::size_t t = 0; t < static_cast<std::size_t>(text.valid_len); ++t)
    mask[t] = 1;
  Var scores = gated_scores(tape, text.tokens, memory, params.w, params.w_b,
                            params.wm, params.wm_b, params.wh, params.wh_b,
                            dropout, mask);
  AttentionResult out;
  out.step = step;
  out.weights = softmax_masked(tape, scores, mask);
  // No projection after the weighted average: token features already live in
  // the shared hidden space.
  out.context = weighted_sum(tape, out.weights, text.rows);
  return out;
}

Var global_visual_context(Tape& tape, const Var& regions, const Var& p0,
                          const Var& p0_b) {
  if (regions->shape.size() != 2 || regions->rows() == 0)
    throw ValueError("global_visual_context: need a non-empty region matrix");
  std::size_t n = regions->rows();
  Var uniform = make_tensor({n}, std::vector<double>(n, 1.0 / static_cast<double>(n)));
  Var mean = weighted_sum(tape, uniform, regions);
  return tanh_elem(tape, affine(tape, mean, p0, p0_b));
}

Var global_textual_context(Tape& tape, const EncodedText& text) {
  if (text.valid_len < 1) throw ValueError("global_textual_context: empty text");
  std::size_t total = text.tokens.size();
  std::vector<double> weights(total, 0.0);
  for (std::size_t t = 0; t < static_cast<std::size_t>(text.valid_len); ++t)
    weights[t] = 1.0 / static_cast<double>(text.valid_len);
  return weighted_sum(tape, make_tensor({total}, std::move(weights)), text.rows);
}

void init_attention_params(ParamStore& store, const std::string& prefix, int steps,
                           int hidden_dim, int region_dim, Rng& rng) {
  std::size_t d = static_cast<std::size_t>(hidden_dim);
  std::size_t dv = static_cast<std::size_t>(region_dim);
  store.create_xavier(prefix + "vis/0/P", d, dv, rng);
  store.create_zeros(prefix + "vis/0/Pb", {d});
  for (int k = 1; k <= steps; ++k) {
    std::string vb = prefix + "vis/" + std::to_string(k) + "/";
    store.create_xavier(vb + "W", d, dv, rng);
    store.create_zeros(vb + "Wb", {d});
    store.create_xavier(vb + "Wm", d, d, rng);
    store.create_zeros(vb + "Wmb", {d});
    store.create_xavier(vb + "Wh", 1, d, rng);
    store.create_zeros(vb + "Whb", {1});
    store.create_xavier(vb + "P", d, dv, rng);
    store.create_zeros(vb + "Pb", {d});
    std::string tb = prefix + "txt/" + std::to_string(k) + "/";
    store.create_xavier(tb + "W", d, d, rng);
    store.create_zeros(tb + "Wb", {d});
    store.create_xavier(tb + "Wm", d, d, rng);
    store.create_zeros(tb + "Wmb", {d});
    store.create_xavier(tb + "Wh", 1, d, rng);
    store.create_zeros(tb + "Whb", {1});
  }
}

VisualStepParams bind_visual_step(const ParamStore& store, const std::string& prefix,
                                  int step) {
  std::string b = prefix + "vis/" + std::to_string(step) + "/";
  return {store.get(b + "W"),  store.get(b + "Wb"), store.get(b + "Wm"),
          store.get(b + "Wmb"), store.get(b + "Wh"), store.get(b + "Whb"),
          store.get(b + "P"),  store.get(b + "Pb")};
}

TextualStepParams bind_textual_step(const ParamStore& store, const std::string& prefix,
                                    int step) {
  std::string b = prefix + "txt/" + std::to_string(step) + "/";
  return {store.get(b + "W"),  store.get(b + "Wb"), store.get(b + "Wm"),
          store.get(b + "Wmb"), store.get(b + "Wh"), store.get(b + "Whb")};
}

}  // namespace dan
