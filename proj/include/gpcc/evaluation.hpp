#ifndef GPCC__EVALUATION_HPP_
#define GPCC__EVALUATION_HPP_

#include "gpcc/model.hpp"
#include "gpcc/train.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gpcc
{

/// Best-of-K mean per-step displacement. Throws ShapeError on mismatched lengths.
double min_ade(std::span<const Vec2> truth, std::span<const Track> candidates);
/// Best-of-K final-step displacement, minimized independently of min_ade.
double min_fde(std::span<const Vec2> truth, std::span<const Track> candidates);

struct MetricReport
{
  double min_ade{0.0};
  double min_fde{0.0};
  std::vector<double> per_instance_ade;
  std::vector<double> per_instance_fde;
  int k{0};

  std::size_t count() const noexcept { return per_instance_ade.size(); }
};

/// Arithmetic means over instances; every instance needs a ground-truth future.
MetricReport evaluate(const GpccModel & model, std::span<const PredictionInstance> instances, std::size_t batch_size = 256);

struct ContributionReport
{
  double r_self{1.0};
  double r_group{0.0};
  double r_con{0.0};
  /// All three energies were zero; the report is (1, 0, 0).
  bool degenerate{false};
};

/// Energy of each block through the fusion layer: the Frobenius norm of the block times the
/// slice of fusion weight rows that multiplies it. Blocks follow the (con, self, group) concat.
struct BlockEnergies
{
  double self{0.0};
  double group{0.0};
  double con{0.0};
};

BlockEnergies block_energies(const FeatureBundle & bundle, const nn::Tensor & fuse_weight);
ContributionReport contribution_ratios(const BlockEnergies & energies);
ContributionReport contribution_ratios(const FeatureBundle & bundle, const nn::Tensor & fuse_weight);

struct AttentionReport
{
  double right{0.0};
  double left{0.0};
  double rear{0.0};

  /// True when every partition energy was zero (for example with conception disabled).
  bool all_zero() const noexcept { return right == 0.0 && left == 0.0 && rear == 0.0; }
  friend bool operator==(const AttentionReport &, const AttentionReport &) = default;
};

/// Per-partition norm of sum_s r_s * W[s, :] over the partition's slots (right 0-2,
/// left 3-5, rear 6), normalized to sum to 1. `weight` is the first conception layer [7, width].
AttentionReport partition_attention(const std::array<double, 7> & r_con, const nn::Tensor & weight);

/// Everything the analysis and serving paths report for one instance.
struct InstanceAnalysis
{
  PredictionSet prediction;
  GroupSet groups;
  ConceptionVector conception;
  PartitionAssignment partitions;
  AttentionReport attention;
  ContributionReport contributions;
};

InstanceAnalysis analyze_instance(const GpccModel & model, const PredictionInstance & inst);
std::vector<InstanceAnalysis> analyze_instances(const GpccModel & model, std::span<const PredictionInstance> insts);

enum class EditRole { Neighbor, GroupMember };

EditRole parse_edit_role(std::string_view s);
std::string_view to_string(EditRole r);

/// A hypothetical agent added to an instance. The track covers the observed window, in the
/// same coordinates as the instance.
struct Edit
{
  std::string agent_id;
  Track track;
  EditRole role{EditRole::Neighbor};
};

/// Checks an edit against the instance and the grouping threshold; throws ShapeError for a
/// wrong track length, Error for an id clash, and KernelViolation when the track's long-term
/// distance contradicts the declared role.
void validate_edit(const PredictionInstance & inst, const Edit & edit, const GpccConfig & cfg);

/// Instance with the edits appended as neighbors (after validation).
PredictionInstance apply_edits(const PredictionInstance & inst, std::span<const Edit> edits, const GpccConfig & cfg);

struct InterventionResult
{
  InstanceAnalysis before;
  InstanceAnalysis after;
};

InterventionResult run_intervention(const GpccModel & model, const PredictionInstance & inst, std::span<const Edit> edits);

/// Constant-velocity track of `n` points starting at `start`.
Track constant_velocity_track(const Vec2 & start, const Vec2 & velocity, std::size_t n);

struct AblationRow
{
  Variant variant{Variant::V0};
  MetricReport metrics;
  std::vector<EpochStats> history;
};

/// Trains and evaluates v0..v3 from the same seed on the same split.
std::vector<AblationRow> run_ablation(
  std::span<const PredictionInstance> train_set, std::span<const PredictionInstance> test_set,
  const GpccConfig & base, const TrainOptions & options);

struct SweepRow
{
  double value{0.0};
  MetricReport metrics;
};

/// Retrains per field-of-view angle (degrees) and evaluates on the test split.
std::vector<SweepRow> sweep_fov(
  std::span<const PredictionInstance> train_set, std::span<const PredictionInstance> test_set,
  const GpccConfig & base, std::span<const double> angles, const TrainOptions & options);

/// Retrains per grouping threshold and evaluates on the test split.
std::vector<SweepRow> sweep_dm(
  std::span<const PredictionInstance> train_set, std::span<const PredictionInstance> test_set,
  const GpccConfig & base, std::span<const double> thresholds, const TrainOptions & options);

/// Follower instances from two-agent group-turn scenes: the leader turns inside the observed
/// window, the follower makes the same turn at the start of its future.
std::vector<PredictionInstance> group_turn_instances(
  std::size_t n_scenes, std::uint64_t first_seed, const WindowConfig & window);

/// Instances from constant-velocity scenes, truncated to exactly `count`.
std::vector<PredictionInstance> constant_velocity_instances(
  std::size_t count, std::uint64_t first_seed, const WindowConfig & window, int agents_per_scene = 5);

}  // namespace gpcc

#endif  // GPCC__EVALUATION_HPP_
