#ifndef DAN_MODEL_HPP_
#define DAN_MODEL_HPP_

#include <string>
#include <vector>

#include "dan/attention.hpp"
#include "dan/param_store.hpp"
#include "dan/text_encoder.hpp"

namespace dan {

enum class ModelKind { rdan, mdan };

std::string model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(const std::string& name);

struct ModelConfig {
  ModelKind kind = ModelKind::rdan;
  int attention_steps = 2;  // K
  int hidden_dim = 512;     // d
  int region_dim = 512;     // D_v
  int answer_count = 2000;  // C, classification head size (rdan only)
  int vocab_size = 0;
  int max_tokens = 32;
  double dropout_rate = 0.5;
};

void validate_model_config(const ModelConfig& cfg);

// Checkpoint name prefix for the kind: "rdan/" or "mdan/".
std::string param_prefix(ModelKind kind);

// Creates every parameter of the model in the store, deterministically from
// the rng stream.
void init_model_params(ParamStore& store, const ModelConfig& cfg, Rng& rng);

}  // namespace dan

#endif  // DAN_MODEL_HPP_
