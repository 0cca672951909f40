#include "dan/model.hpp"

#include "dan/error.hpp"

namespace dan {

std::string model_kind_name(ModelKind kind) {
  return kind == ModelKind::rdan ? "rdan" : "mdan";
}

ModelKind model_kind_from_name(const std::string& name) {
  if (name == "rdan") return ModelKind::rdan;
  if (name == "mdan") return ModelKind::mdan;
  throw ValueError("unknown model kind '" + name + "' (expected rdan or mdan)");
}

void validate_model_config(const ModelConfig& cfg) {
  // The matching variant degenerates cleanly to K = 0 (global contexts only);
  // the reasoning variant needs at least one dual-attention step.
  int min_steps = cfg.kind == ModelKind::rdan ? 1 : 0;
  if (cfg.attention_steps < min_steps)
    throw ValueError("model config: attention steps must be >= " +
                     std::to_string(min_steps));
  if (cfg.hidden_dim < 1 || cfg.region_dim < 1)
    throw ValueError("model config: dimensions must be >= 1");
  if (cfg.vocab_size < 2) throw ValueError("model config: vocab size must be >= 2");
  if (cfg.kind == ModelKind::rdan && cfg.answer_count < 1)
    throw ValueError("model config: answer count must be >= 1");
  if (cfg.max_tokens < 1) throw ValueError("model config: max tokens must be >= 1");
  if (cfg.dropout_rate < 0.0 || cfg.dropout_rate >= 1.0)
    throw ValueError("model config: dropout rate must be in [0, 1)");
}

std::string param_prefix(ModelKind kind) { return model_kind_name(kind) + "/"; }

void init_model_params(ParamStore& store, const ModelConfig& cfg, Rng& rng) {
  validate_model_config(cfg);
  std::string prefix = param_prefix(cfg.kind);
  init_text_encoder_params(store, prefix, cfg.hidden_dim, cfg.vocab_size, rng);
  init_attention_params(store, prefix, cfg.attention_steps, cfg.hidden_dim,
                        cfg.region_dim, rng);
  if (cfg.kind == ModelKind::rdan) {
    store.create_xavier(prefix + "ans/W", static_cast<std::size_t>(cfg.answer_count),
                        static_cast<std::size_t>(cfg.hidden_dim), rng);
    store.create_zeros(prefix + "ans/b", {static_cast<std::size_t>(cfg.answer_count)});
  }
}

}  // namespace dan
