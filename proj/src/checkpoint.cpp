#include "dan/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "dan/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace dan {

using nlohmann::json;

void validate_optimizer_config(const OptimizerConfig& cfg) {
  if (cfg.learning_rate < 0 || cfg.momentum < 0 || cfg.weight_decay < 0 ||
      cfg.dropout_rate < 0)
    throw ValueError("optimizer config: rates must be >= 0");
  if (cfg.dropout_rate >= 1.0)
    throw ValueError("optimizer config: dropout rate must be < 1");
  if (cfg.clip_threshold <= 0)
    throw ValueError("optimizer config: clip threshold must be > 0");
  if (cfg.epochs < 0) throw ValueError("optimizer config: negative epoch count");
  if (cfg.lr_drop_epoch > cfg.epochs)
    throw ValueError("optimizer config: lr drop epoch exceeds epoch count");
  if (cfg.lr_drop_factor <= 0)
    throw ValueError("optimizer config: lr drop factor must be > 0");
  if (cfg.batch_size < 1) throw ValueError("optimizer config: batch size must be >= 1");
  if (cfg.margin < 0) throw ValueError("optimizer config: margin must be >= 0");
}

namespace {

json model_config_to_json(const ModelConfig& cfg) {
  return {{"kind", model_kind_name(cfg.kind)},
          {"attention_steps", cfg.attention_steps},
          {"hidden_dim", cfg.hidden_dim},
          {"region_dim", cfg.region_dim},
          {"answer_count", cfg.answer_count},
          {"vocab_size", cfg.vocab_size},
          {"max_tokens", cfg.max_tokens},
          {"dropout_rate", cfg.dropout_rate}};
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig cfg;
  cfg.kind = model_kind_from_name(j.at("kind").get<std::string>());
  cfg.attention_steps = j.at("attention_steps").get<int>();
  cfg.hidden_dim = j.at("hidden_dim").get<int>();
  cfg.region_dim = j.at("region_dim").get<int>();
  cfg.answer_count = j.at("answer_count").get<int>();
  cfg.vocab_size = j.at("vocab_size").get<int>();
  cfg.max_tokens = j.at("max_tokens").get<int>();
  cfg.dropout_rate = j.at("dropout_rate").get<double>();
  return cfg;
}

json optimizer_config_to_json(const OptimizerConfig& cfg) {
  return {{"learning_rate", cfg.learning_rate},
          {"momentum", cfg.momentum},
          {"weight_decay", cfg.weight_decay},
          {"clip_threshold", cfg.clip_threshold},
          {"dropout_rate", cfg.dropout_rate},
          {"epochs", cfg.epochs},
          {"lr_drop_epoch", cfg.lr_drop_epoch},
          {"lr_drop_factor", cfg.lr_drop_factor},
          {"batch_size", cfg.batch_size},
          {"margin", cfg.margin},
          {"seed", cfg.seed}};
}

OptimizerConfig optimizer_config_from_json(const json& j) {
  OptimizerConfig cfg;
  cfg.learning_rate = j.at("learning_rate").get<double>();
  cfg.momentum = j.at("momentum").get<double>();
  cfg.weight_decay = j.at("weight_decay").get<double>();
  cfg.clip_threshold = j.at("clip_threshold").get<double>();
  cfg.dropout_rate = j.at("dropout_rate").get<double>();
  cfg.epochs = j.at("epochs").get<int>();
  cfg.lr_drop_epoch = j.at("lr_drop_epoch").get<int>();
  cfg.lr_drop_factor = j.at("lr_drop_factor").get<double>();
  cfg.batch_size = j.at("batch_size").get<int>();
  cfg.margin = j.at("margin").get<double>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt,
                     const ParamStore& params) {
  json dir_params = json::array();
  json dir_velocity = json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, p] : params.entries()) {
    dir_params.push_back(
        {{"name", name}, {"shape", p->shape}, {"offset", offset}, {"count", p->numel()}});
    offset += p->numel() * 8;
  }
  for (const auto& [name, p] : params.entries()) {
    dir_velocity.push_back(
        {{"name", name}, {"offset", offset}, {"count", p->numel()}});
    offset += p->numel() * 8;
  }

  json manifest = {{"version", ckpt.version},
                   {"model", model_config_to_json(ckpt.model)},
                   {"optimizer", optimizer_config_to_json(ckpt.optimizer)},
                   {"state",
                    {{"epoch", ckpt.state.epoch},
                     {"rng_state", ckpt.state.rng_state},
                     {"best_metric", ckpt.state.best_metric},
                     {"best_epoch", ckpt.state.best_epoch}}},
                   {"tensors", dir_params},
                   {"velocities", dir_velocity},
                   {"payload_bytes", offset}};
  std::string text = manifest.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  std::uint32_t len = static_cast<std::uint32_t>(text.size());
  char len_bytes[4];
  for (int i = 0; i < 4; ++i) len_bytes[i] = static_cast<char>(len >> (8 * i));
  out.write(len_bytes, 4);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [name, p] : params.entries())
    out.write(reinterpret_cast<const char*>(p->values.data()),
              static_cast<std::streamsize>(p->numel() * 8));
  for (const auto& [name, p] : params.entries()) {
    const auto& vel = params.velocity(name);
    out.write(reinterpret_cast<const char*>(vel.data()),
              static_cast<std::streamsize>(vel.size() * 8));
  }
  if (!out) throw IoError("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path, ParamStore& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw IoError("bad magic in " + path + " (not a DANCKPT1 checkpoint)");
  char len_bytes[4];
  in.read(len_bytes, 4);
  if (!in) throw IoError("truncated checkpoint manifest in " + path);
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i)
    len |= static_cast<std::uint32_t>(static_cast<unsigned char>(len_bytes[i])) << (8 * i);
  std::string text(len, '\0');
  in.read(text.data(), len);
  if (!in) throw IoError("truncated checkpoint manifest in " + path);

  json manifest;
  try {
    manifest = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError("malformed checkpoint manifest in " + path + ": " + e.what());
  }

  Checkpoint ckpt;
  ckpt.version = manifest.at("version").get<int>();
  if (ckpt.version != 1)
    throw IoError("checkpoint version mismatch in " + path + ": got " +
                  std::to_string(ckpt.version));
  ckpt.model = model_config_from_json(manifest.at("model"));
  ckpt.optimizer = optimizer_config_from_json(manifest.at("optimizer"));
  const auto& state = manifest.at("state");
  ckpt.state.epoch = state.at("epoch").get<int>();
  ckpt.state.rng_state = state.at("rng_state").get<std::string>();
  ckpt.state.best_metric = state.at("best_metric").get<double>();
  ckpt.state.best_epoch = state.at("best_epoch").get<int>();

  std::streampos payload_start = in.tellg();
  for (const auto& entry : manifest.at("tensors")) {
    std::string name = entry.at("name").get<std::string>();
    Shape shape = entry.at("shape").get<Shape>();
    std::uint64_t offset = entry.at("offset").get<std::uint64_t>();
    std::size_t count = entry.at("count").get<std::size_t>();
    std::vector<double> values(count);
    in.seekg(payload_start + static_cast<std::streamoff>(offset));
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(count * 8));
    if (!in) throw IoError("truncated tensor payload '" + name + "' in " + path);
    params.create(name, shape, std::move(values));
  }
  for (const auto& entry : manifest.at("velocities")) {
    std::string name = entry.at("name").get<std::string>();
    std::uint64_t offset = entry.at("offset").get<std::uint64_t>();
    std::size_t count = entry.at("count").get<std::size_t>();
    std::vector<double>& vel = params.velocity(name);
    if (vel.size() != count)
      throw IoError("velocity size mismatch for '" + name + "' in " + path);
    in.seekg(payload_start + static_cast<std::streamoff>(offset));
    in.read(reinterpret_cast<char*>(vel.data()),
            static_cast<std::streamsize>(count * 8));
    if (!in) throw IoError("truncated velocity payload '" + name + "' in " + path);
  }
  return ckpt;
}

}  // namespace dan
