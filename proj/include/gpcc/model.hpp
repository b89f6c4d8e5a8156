#ifndef GPCC__MODEL_HPP_
#define GPCC__MODEL_HPP_

#include "gpcc/conception.hpp"
#include "gpcc/grouping.hpp"
#include "gpcc/nn/layers.hpp"
#include "gpcc/nn/parameter.hpp"
#include "gpcc/nn/tape.hpp"
#include "gpcc/scene.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gpcc
{

struct ModelConfig
{
  int d{32};
  int d_model{128};
  int encoder_layers{2};
  int decoder_layers{2};
  int heads{4};
  int ffn_hidden{256};
  int k_gen{20};
  bool disable_group{false};
  bool disable_conception{false};

  void validate() const;
};

/// Everything that determines the model's shapes and its social inputs.
struct GpccConfig
{
  WindowConfig window{};
  GroupConfig group{};
  ConceptionConfig conception{};
  ModelConfig model{};

  void validate() const;

  /// Grouping as applied by the model: off when either flag disables it.
  GroupConfig effective_group() const;
  ConceptionConfig effective_conception() const;
};

/// Ablation variants: v0 full, v1 no conception, v2 no group, v3 neither.
enum class Variant { V0 = 0, V1 = 1, V2 = 2, V3 = 3 };

GpccConfig apply_variant(GpccConfig cfg, Variant v);
std::string_view to_string(Variant v);

/// Per-step least-squares line through the observed positions, evaluated at the future steps.
Track linear_fit_extrapolate(std::span<const Vec2> observed, const WindowConfig & cfg);

/// Non-learned inputs of one instance, in the normalized frame.
struct InstanceFeatures
{
  PredictionInstance normalized;
  GroupSet groups;
  ConceptionVector conception;
  /// Member tracks sorted by coordinates, so their order never depends on neighbor order.
  std::vector<Track> member_tracks;
  Track linear_fit;
};

InstanceFeatures extract_features(const PredictionInstance & inst, const GpccConfig & cfg);
/// OpenMP over instances; output order matches input order.
std::vector<InstanceFeatures> extract_features(std::span<const PredictionInstance> insts, const GpccConfig & cfg);

namespace reference
{
/// Serial loop; kept to check the parallel version.
std::vector<InstanceFeatures> extract_features(std::span<const PredictionInstance> insts, const GpccConfig & cfg);
}  // namespace reference

/// Network inputs for a batch of instances, stacked along a leading batch dimension.
struct PreparedBatch
{
  std::size_t size{0};
  std::vector<const InstanceFeatures *> features;
  nn::Tensor observed;        // [B, n_p, 2]
  nn::Tensor member_pairs;    // [M, n_p, 4]: target xy then member xy per step
  std::vector<std::size_t> member_owner;
  nn::Tensor conception;      // [B, 7]
  nn::Tensor linear_fit;      // [B, 2 n_f]
  std::optional<nn::Tensor> truth;  // [B, 2 n_f], when every instance has a future
};

PreparedBatch assemble_batch(std::span<const InstanceFeatures * const> features, const GpccConfig & cfg);

/// Per-instance learned features.
struct FeatureBundle
{
  nn::Tensor f_self;   // [n_p, d]
  nn::Tensor f_group;  // [n_p, d]
  nn::Tensor f_con;    // [n_p, 2d]
  nn::Tensor fused;    // [n_p, d_model]
};

struct PredictionSet
{
  std::string target_id;
  /// k_gen candidates in scene coordinates.
  std::vector<Track> trajectories;
  Track linear_fit;
  FeatureBundle feature_bundle;
};

class GpccModel
{
public:
  /// Fresh model with weights drawn from `seed`.
  GpccModel(GpccConfig cfg, std::uint64_t seed);

  GpccModel(GpccModel &&) noexcept = default;
  GpccModel & operator=(GpccModel &&) noexcept = default;

  const GpccConfig & config() const noexcept { return cfg_; }
  nn::ParameterStore & parameters() noexcept { return store_; }
  const nn::ParameterStore & parameters() const noexcept { return store_; }

  struct Graph
  {
    nn::Var f_self;
    nn::Var f_group;
    nn::Var f_con;
    nn::Var fused;
    /// [B, k_gen, 2 n_f], normalized frame.
    nn::Var candidates;
  };

  /// Records the forward pass. Throws NumericError naming the first stage with a
  /// non-finite value.
  Graph build(nn::Tape & tape, const PreparedBatch & batch) const;

  /// Mean over the batch of the best-of-K L2 loss. The batch must carry ground truth.
  nn::Var loss(nn::Tape & tape, const PreparedBatch & batch) const;

  std::vector<PredictionSet> predict(std::span<const PredictionInstance> instances) const;
  std::vector<PredictionSet> predict(std::span<const InstanceFeatures> features) const;
  PredictionSet forward(const PredictionInstance & inst) const;

  /// Fusion weight [4d, d_model]; rows ordered (conception, self, group).
  const nn::Tensor & fuse_weight() const;
  /// First conception embedding layer weight [7, 2d].
  const nn::Tensor & conception_input_weight() const;

  std::string config_text() const;
  std::uint64_t config_hash() const;

  void save(const std::filesystem::path & path) const;
  /// Rebuilds the model from a checkpoint. With `expected`, the checkpoint's config hash
  /// must match that configuration.
  static GpccModel load(const std::filesystem::path & path, const std::optional<GpccConfig> & expected = {});

  /// Deep copy of configuration and parameters.
  GpccModel clone() const;

private:
  GpccConfig cfg_;
  nn::ParameterStore store_;
  nn::TwoLayerEmbedding self_embedding_;
  nn::TwoLayerEmbedding group_embedding_;
  nn::TwoLayerEmbedding conception_embedding_;
  nn::Linear fusion_;
  struct Block
  {
    nn::MultiHeadAttention attention;
    nn::LayerNorm attention_norm;
    nn::FeedForward feed_forward;
    nn::LayerNorm feed_forward_norm;
  };
  std::vector<Block> encoder_;
  std::vector<Block> decoder_;
  nn::Linear value_projection_;
  nn::Linear generator_;
  nn::Tensor positions_;
};

std::string config_to_text(const GpccConfig & cfg);
GpccConfig config_from_text(const std::string & text);
std::uint64_t config_hash(const GpccConfig & cfg);

}  // namespace gpcc

#endif  // GPCC__MODEL_HPP_
