#ifndef DAN_CHECKPOINT_HPP_
#define DAN_CHECKPOINT_HPP_

#include <string>

#include "dan/model.hpp"
#include "dan/param_store.hpp"

namespace dan {

struct OptimizerConfig {
  double learning_rate = 0.1;
  double momentum = 0.9;
  double weight_decay = 0.0005;
  double clip_threshold = 0.1;
  double dropout_rate = 0.5;
  int epochs = 60;
  int lr_drop_epoch = 30;     // first epoch index trained at the dropped rate
  double lr_drop_factor = 10.0;
  int batch_size = 128;
  double margin = 100.0;      // ranking loss margin (mdan)
  std::uint64_t seed = 42;
};

void validate_optimizer_config(const OptimizerConfig& cfg);

// Checkpointable training progress. Restoring it mid-run continues training
// bit-for-bit as if the run had never stopped.
struct TrainState {
  int epoch = 0;  // epochs completed so far
  std::string rng_state;
  double best_metric = -1.0;
  int best_epoch = -1;
};

// File layout: magic "DANCKPT1", u32 manifest length, JSON manifest (model
// and optimizer config, training state, tensor directory), then raw
// little-endian float64 payloads at the directory offsets.
inline constexpr char kCheckpointMagic[8] = {'D', 'A', 'N', 'C', 'K', 'P', 'T', '1'};

struct Checkpoint {
  int version = 1;
  ModelConfig model;
  OptimizerConfig optimizer;
  TrainState state;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt,
                     const ParamStore& params);
// Rebuilds the parameter store (values and velocities) from the file.
Checkpoint load_checkpoint(const std::string& path, ParamStore& params);

}  // namespace dan

#endif  // DAN_CHECKPOINT_HPP_
