#include "dan/train.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "dan/error.hpp"
#include "dan/eval.hpp"

namespace dan {

double clip_gradients(ParamStore& params, double threshold) {
  if (threshold <= 0) throw ValueError("clip_gradients: threshold must be > 0");
  double sq = 0.0;
  for (const auto& [name, p] : params.entries())
    for (double g : p->grad) sq += g * g;
  double norm = std::sqrt(sq);
  if (norm > threshold) {
    double factor = threshold / norm;
    for (const auto& [name, p] : params.entries())
      for (double& g : p->grad) g *= factor;
  }
  return norm;
}

void sgd_step(ParamStore& params, double learning_rate, double momentum,
              double weight_decay) {
  for (const auto& [name, p] : params.entries()) {
    std::vector<double>& vel = params.velocity(name);
    for (std::size_t i = 0; i < p->numel(); ++i) {
      vel[i] = momentum * vel[i] + p->grad[i] + weight_decay * p->values[i];
      p->values[i] -= learning_rate * vel[i];
    }
  }
}

void write_train_log(const std::string& path, const TrainLog& log) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write training log: " + path);
  for (const LogRecord& rec : log) {
    nlohmann::json j = {{"epoch", rec.epoch},
                        {"split", rec.split},
                        {"loss", rec.loss ? nlohmann::json(*rec.loss) : nlohmann::json()},
                        {"metric", rec.metric ? nlohmann::json(*rec.metric) : nlohmann::json()}};
    out << j.dump() << "\n";
  }
  if (!out) throw IoError("failed writing training log: " + path);
}

namespace {

double lr_at_epoch(const OptimizerConfig& cfg, int epoch) {
  return epoch >= cfg.lr_drop_epoch ? cfg.learning_rate / cfg.lr_drop_factor
                                    : cfg.learning_rate;
}

// Shared epoch loop. batch_loss builds the batch loss graph on the tape and
// returns it; validate computes the epoch's validation metric without
// consuming trainer RNG.
TrainResult run_training(ParamStore& params, const OptimizerConfig& cfg,
                         std::size_t n_items, std::size_t min_batch, Rng& rng,
                         const std::function<Var(Tape&, const std::vector<std::size_t>&,
                                                 Rng&)>& batch_loss,
                         const std::function<double()>& validate,
                         const TrainState& start, const CheckpointSink& sink) {
  validate_optimizer_config(cfg);
  if (n_items == 0) throw ValueError("train: empty dataset");
  if (n_items < min_batch)
    throw ValueError("train: dataset smaller than the minimum usable batch (" +
                     std::to_string(min_batch) + ")");

  // Batch boundaries: fixed-size chunks, with a short tail merged into the
  // previous batch when it cannot stand alone (in-batch negatives need >= 2).
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  for (std::size_t begin = 0; begin < n_items;
       begin += static_cast<std::size_t>(cfg.batch_size)) {
    std::size_t end = std::min(begin + static_cast<std::size_t>(cfg.batch_size), n_items);
    ranges.emplace_back(begin, end);
  }
  if (ranges.size() > 1 && ranges.back().second - ranges.back().first < min_batch) {
    ranges[ranges.size() - 2].second = ranges.back().second;
    ranges.pop_back();
  }

  TrainResult result;
  result.state = start;
  if (!start.rng_state.empty()) rng.set_state(start.rng_state);

  for (int epoch = start.epoch; epoch < cfg.epochs; ++epoch) {
    double lr = lr_at_epoch(cfg, epoch);
    std::vector<std::size_t> order(n_items);
    for (std::size_t i = 0; i < n_items; ++i) order[i] = i;
    rng.shuffle(order);

    double loss_sum = 0.0;
    std::size_t n_batches = 0;
    for (const auto& [begin, end] : ranges) {
      std::vector<std::size_t> batch(order.begin() + begin, order.begin() + end);
      params.zero_grads();
      Tape tape;
      Var loss = batch_loss(tape, batch, rng);
      double loss_value = loss->scalar();
      if (!std::isfinite(loss_value))
        throw DivergenceError("non-finite loss in epoch " + std::to_string(epoch) +
                              ", batch " + std::to_string(n_batches) +
                              " (shuffled items " + std::to_string(begin) + ".." +
                              std::to_string(end - 1) + ")");
      tape.backward(loss);
      clip_gradients(params, cfg.clip_threshold);
      sgd_step(params, lr, cfg.momentum, cfg.weight_decay);
      loss_sum += loss_value;
      ++n_batches;
    }

    double metric = validate();
    result.log.push_back({epoch, "train", loss_sum / static_cast<double>(n_batches),
                          std::nullopt});
    result.log.push_back({epoch, "val", std::nullopt, metric});

    result.state.epoch = epoch + 1;
    result.state.rng_state = rng.state();
    bool is_best = metric > result.state.best_metric;
    if (is_best) {
      result.state.best_metric = metric;
      result.state.best_epoch = epoch;
    }
    if (sink) sink(result.state, is_best, epoch + 1 == cfg.epochs);
  }

  if (result.state.rng_state.empty()) result.state.rng_state = rng.state();
  return result;
}

}  // namespace

TrainResult train_rdan(ParamStore& params, const ModelConfig& model_cfg,
                       const VqaDataset& data, const OptimizerConfig& cfg,
                       const TrainState& start, const CheckpointSink& sink) {
  RDanModel model = bind_rdan(params, model_cfg);
  Rng rng(mix_seed(cfg.seed, 100));

  auto batch_loss = [&](Tape& tape, const std::vector<std::size_t>& batch,
                        Rng& batch_rng) {
    DropoutPlan dropout{cfg.dropout_rate, true, &batch_rng};
    Var total;
    for (std::size_t idx : batch) {
      const VqaItem& item = data.train[idx];
      RDanForwardOut out =
          rdan_forward(tape, item.scene.regions, item.question, model, dropout);
      Var item_loss = cross_entropy_loss(tape, out.logits, item.answer_id);
      total = total ? add(tape, total, item_loss) : item_loss;
    }
    return scale(tape, total, 1.0 / static_cast<double>(batch.size()));
  };
  auto validate = [&]() {
    return data.val.empty() ? 0.0 : evaluate_vqa(model, data.val);
  };
  return run_training(params, cfg, data.train.size(), 1, rng, batch_loss, validate,
                      start, sink);
}

TrainResult train_mdan(ParamStore& params, const ModelConfig& model_cfg,
                       const MatchingDataset& data, const OptimizerConfig& cfg,
                       const TrainState& start, const CheckpointSink& sink) {
  MDanModel model = bind_mdan(params, model_cfg);
  Rng rng(mix_seed(cfg.seed, 200));

  auto batch_loss = [&](Tape& tape, const std::vector<std::size_t>& batch,
                        Rng& batch_rng) {
    std::vector<MatchingPair> pairs;
    pairs.reserve(batch.size());
    for (std::size_t idx : batch)
      pairs.push_back({&data.train[idx].scene.regions, &data.train[idx].caption});
    std::vector<Quadruplet> quads = sample_negatives(pairs, batch_rng);
    DropoutPlan dropout{cfg.dropout_rate, true, &batch_rng};
    Var total = ranking_loss(tape, quads, model, cfg.margin, dropout);
    return scale(tape, total, 1.0 / static_cast<double>(batch.size()));
  };
  auto validate = [&]() {
    if (data.val.empty()) return 0.0;
    RetrievalEval eval =
        evaluate_retrieval(model, data.val, Direction::image_to_text, {1});
    return eval.metrics.recall_at.at(1);
  };
  return run_training(params, cfg, data.train.size(), 2, rng, batch_loss, validate,
                      start, sink);
}

}  // namespace dan
