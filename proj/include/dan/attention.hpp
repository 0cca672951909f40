#ifndef DAN_ATTENTION_HPP_
#define DAN_ATTENTION_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "dan/param_store.hpp"
#include "dan/rng.hpp"
#include "dan/tensor.hpp"
#include "dan/text_encoder.hpp"

namespace dan {

// Unordered set of region feature vectors, row-major [count x dim].
struct RegionSet {
  std::size_t count = 0;
  std::size_t dim = 0;
  std::vector<double> features;

  const double* row_ptr(std::size_t i) const { return features.data() + i * dim; }
};

Var region_var(const RegionSet& regions);

// One attention step's parameters for the visual branch. w maps region
// features into the hidden space, wm maps the memory, wh scores each item,
// and p projects the attended feature average into the context space.
struct VisualStepParams {
  Var w, w_b;    // [d x D_v], [d]
  Var wm, wm_b;  // [d x d], [d]
  Var wh, wh_b;  // [1 x d], [1]
  Var p, p_b;    // [d x D_v], [d]
};

struct TextualStepParams {
  Var w, w_b;    // [d x d], [d]
  Var wm, wm_b;  // [d x d], [d]
  Var wh, wh_b;  // [1 x d], [1]
};

// Dropout on the gated hidden vectors, active only while training.
struct DropoutPlan {
  double rate = 0.0;
  bool training = false;
  Rng* rng = nullptr;

  bool active() const { return training && rate > 0.0 && rng != nullptr; }
};

Var apply_dropout(Tape& tape, const Var& x, const DropoutPlan& plan);

struct AttentionResult {
  Var weights;  // probability simplex over items; masked entries exactly 0
  Var context;
  int step = 0;
};

// Two-branch gated scoring over regions followed by softmax and a projected,
// squashed weighted average:
//   h_n = tanh(W v_n + b) * tanh(Wm m + b), alpha = softmax(Wh h_n + b),
//   context = tanh(P sum_n alpha_n v_n + b).
AttentionResult visual_attend(Tape& tape, const Var& regions, const Var& memory,
                              const VisualStepParams& params,
                              const DropoutPlan& dropout = {}, int step = 0);

// Same scoring scheme over encoded tokens, but the context is the plain
// weighted average (no extra projection). Padded positions are masked out.
AttentionResult textual_attend(Tape& tape, const EncodedText& text, const Var& memory,
                               const TextualStepParams& params,
                               const DropoutPlan& dropout = {}, int step = 0);

// tanh(P0 * mean(region rows) + b)
Var global_visual_context(Tape& tape, const Var& regions, const Var& p0, const Var& p0_b);

// Mean of the valid token vectors only.
Var global_textual_context(Tape& tape, const EncodedText& text);

// Parameter wiring. Visual step 0 holds only the global projection P0;
// steps 1..K hold the full attention parameter block.
void init_attention_params(ParamStore& store, const std::string& prefix, int steps,
                           int hidden_dim, int region_dim, Rng& rng);
VisualStepParams bind_visual_step(const ParamStore& store, const std::string& prefix,
                                  int step);
TextualStepParams bind_textual_step(const ParamStore& store, const std::string& prefix,
                                    int step);

}  // namespace dan

#endif  // DAN_ATTENTION_HPP_
