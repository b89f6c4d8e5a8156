#ifndef GPCC__TRAIN_HPP_
#define GPCC__TRAIN_HPP_

#include "gpcc/model.hpp"
#include "gpcc/nn/optim.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace gpcc
{

struct EpochStats
{
  int epoch{0};
  /// Instance-weighted mean of the minibatch losses seen during the epoch.
  double train_loss{0.0};
  double seconds{0.0};
};

struct TrainOptions
{
  int epochs{200};
  std::size_t batch_size{1000};
  std::uint64_t seed{1};
  nn::AdamConfig adam{};
  /// Called after each epoch with the stats and the model as it stands.
  std::function<void(const EpochStats &, const GpccModel &)> on_epoch;

  void validate() const;
};

struct TrainResult
{
  GpccModel model;
  std::vector<EpochStats> history;
};

/// Minibatch Adam on the mean best-of-K loss. Every instance needs a ground-truth future.
/// Deterministic for a fixed seed when run on one thread.
TrainResult train(std::span<const PredictionInstance> dataset, const GpccConfig & cfg, const TrainOptions & options);

/// Continues training an existing model.
std::vector<EpochStats> train_model(
  GpccModel & model, std::span<const InstanceFeatures> features, const TrainOptions & options);

}  // namespace gpcc

#endif  // GPCC__TRAIN_HPP_
