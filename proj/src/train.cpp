#include "gpcc/train.hpp"

#include "gpcc/error.hpp"
#include "gpcc/random.hpp"

#include <chrono>
#include <numeric>

namespace gpcc
{

void TrainOptions::validate() const
{
  if (epochs < 0) {
    throw ConfigError("epochs", "must be non-negative");
  }
  if (batch_size < 1) {
    throw ConfigError("batch_size", "must be at least 1");
  }
  adam.validate();
}

std::vector<EpochStats> train_model(
  GpccModel & model, std::span<const InstanceFeatures> features, const TrainOptions & options)
{
  options.validate();
  if (features.empty()) {
    throw Error("train: dataset is empty");
  }
  for (const auto & f : features) {
    if (!f.normalized.future_truth) {
      throw Error("train: instance '" + f.normalized.target_id + "' has no ground-truth future");
    }
  }

  Rng rng(options.seed);
  std::vector<std::size_t> order(features.size());
  auto params = model.parameters().all();
  model.parameters().zero_grad();

  std::vector<EpochStats> history;
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);

    double total = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += options.batch_size) {
      const std::size_t end = std::min(order.size(), begin + options.batch_size);
      std::vector<const InstanceFeatures *> chunk;
      chunk.reserve(end - begin);
      for (std::size_t i = begin; i < end; ++i) {
        chunk.push_back(&features[order[i]]);
      }
      const PreparedBatch batch = assemble_batch(chunk, model.config());
      nn::Tape tape;
      const nn::Var loss = model.loss(tape, batch);
      total += loss.value()[0] * static_cast<double>(chunk.size());
      tape.backward(loss);
      nn::adam_step(params, options.adam);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = total / static_cast<double>(features.size());
    stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    history.push_back(stats);
    if (options.on_epoch) {
      options.on_epoch(stats, model);
    }
  }
  return history;
}

TrainResult train(std::span<const PredictionInstance> dataset, const GpccConfig & cfg, const TrainOptions & options)
{
  options.validate();
  if (dataset.empty()) {
    throw Error("train: dataset is empty");
  }
  const auto features = extract_features(dataset, cfg);
  GpccModel model(cfg, options.seed);
  auto history = train_model(model, features, options);
  return TrainResult{std::move(model), std::move(history)};
}

}  // namespace gpcc
