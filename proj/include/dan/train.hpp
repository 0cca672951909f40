#ifndef DAN_TRAIN_HPP_
#define DAN_TRAIN_HPP_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dan/checkpoint.hpp"
#include "dan/mdan.hpp"
#include "dan/rdan.hpp"
#include "dan/synth_data.hpp"

namespace dan {

// Global L2-norm clipping over every parameter gradient in the store.
// Returns the pre-clip norm; gradients are rescaled in place when it
// exceeds the threshold.
double clip_gradients(ParamStore& params, double threshold);

// velocity = momentum * velocity + grad + weight_decay * param
// param   -= learning_rate * velocity
void sgd_step(ParamStore& params, double learning_rate, double momentum,
              double weight_decay);

struct LogRecord {
  int epoch = 0;
  std::string split;  // "train" or "val"
  std::optional<double> loss;
  std::optional<double> metric;
};

using TrainLog = std::vector<LogRecord>;

void write_train_log(const std::string& path, const TrainLog& log);

// Called after each epoch with the current training state; is_best marks a
// new best validation metric, is_last the final epoch.
using CheckpointSink =
    std::function<void(const TrainState& state, bool is_best, bool is_last)>;

struct TrainResult {
  TrainLog log;
  TrainState state;
};

// Epoch loop: seeded shuffling, per-batch forward/backward/clip/step, the
// learning-rate drop at lr_drop_epoch, per-epoch validation, and best
// checkpoint retention. Non-finite loss aborts with DivergenceError naming
// the batch. Resuming from `start` continues the run bitwise.
TrainResult train_rdan(ParamStore& params, const ModelConfig& model_cfg,
                       const VqaDataset& data, const OptimizerConfig& cfg,
                       const TrainState& start = {},
                       const CheckpointSink& sink = nullptr);

TrainResult train_mdan(ParamStore& params, const ModelConfig& model_cfg,
                       const MatchingDataset& data, const OptimizerConfig& cfg,
                       const TrainState& start = {},
                       const CheckpointSink& sink = nullptr);

}  // namespace dan

#endif  // DAN_TRAIN_HPP_
