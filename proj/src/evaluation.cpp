#include "gpcc/evaluation.hpp"

#include "gpcc/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gpcc
{

namespace
{

void check_candidates(std::span<const Vec2> truth, std::span<const Track> candidates, const char * what)
{
  if (truth.empty()) {
    throw ShapeError(std::string(what) + ": empty ground truth");
  }
  if (candidates.empty()) {
    throw ShapeError(std::string(what) + ": no candidates");
  }
  for (const Track & c : candidates) {
    if (c.size() != truth.size()) {
      throw ShapeError(
        std::string(what) + ": candidate has " + std::to_string(c.size()) + " steps, truth has " +
        std::to_string(truth.size()));
    }
  }
}

}  // namespace

double min_ade(std::span<const Vec2> truth, std::span<const Track> candidates)
{
  check_candidates(truth, candidates, "min_ade");
  double best = std::numeric_limits<double>::infinity();
  for (const Track & c : candidates) {
    double sum = 0.0;
    for (std::size_t t = 0; t < truth.size(); ++t) {
      sum += distance(truth[t], c[t]);
    }
    best = std::min(best, sum / static_cast<double>(truth.size()));
  }
  return best;
}

double min_fde(std::span<const Vec2> truth, std::span<const Track> candidates)
{
  check_candidates(truth, candidates, "min_fde");
  double best = std::numeric_limits<double>::infinity();
  for (const Track & c : candidates) {
    best = std::min(best, distance(truth.back(), c.back()));
  }
  return best;
}

MetricReport evaluate(const GpccModel & model, std::span<const PredictionInstance> instances, std::size_t batch_size)
{
  if (batch_size == 0) {
    throw ConfigError("batch_size", "must be at least 1");
  }
  MetricReport report;
  report.k = model.config().model.k_gen;
  for (const auto & inst : instances) {
    if (!inst.future_truth) {
      throw Error("evaluate: instance '" + inst.target_id + "' has no ground-truth future");
    }
  }
  for (std::size_t begin = 0; begin < instances.size(); begin += batch_size) {
    const auto chunk = instances.subspan(begin, std::min(batch_size, instances.size() - begin));
    const auto preds = model.predict(chunk);
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      const Track & truth = *chunk[i].future_truth;
      report.per_instance_ade.push_back(min_ade(truth, preds[i].trajectories));
      report.per_instance_fde.push_back(min_fde(truth, preds[i].trajectories));
    }
  }
  if (!report.per_instance_ade.empty()) {
    double ade = 0.0;
    double fde = 0.0;
    for (std::size_t i = 0; i < report.count(); ++i) {
      ade += report.per_instance_ade[i];
      fde += report.per_instance_fde[i];
    }
    report.min_ade = ade / static_cast<double>(report.count());
    report.min_fde = fde / static_cast<double>(report.count());
  }
  return report;
}

namespace
{

// || block [rows, width] * weight[row0 : row0 + width, :] ||_F
double projected_norm(const nn::Tensor & block, const nn::Tensor & weight, std::size_t row0)
{
  const std::size_t rows = block.rows();
  const std::size_t width = block.cols();
  const std::size_t out = weight.cols();
  if (row0 + width > weight.rows()) {
    throw ShapeError("fusion weight has too few rows for the feature blocks");
  }
  double sq = 0.0;
  std::vector<double> acc(out);
  for (std::size_t r = 0; r < rows; ++r) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t c = 0; c < width; ++c) {
      const double v = block[r * width + c];
      const double * w = weight.data() + (row0 + c) * out;
      for (std::size_t o = 0; o < out; ++o) {
        acc[o] += v * w[o];
      }
    }
    for (double a : acc) {
      sq += a * a;
    }
  }
  return std::sqrt(sq);
}

}  // namespace

BlockEnergies block_energies(const FeatureBundle & bundle, const nn::Tensor & fuse_weight)
{
  const std::size_t con_w = bundle.f_con.cols();
  const std::size_t self_w = bundle.f_self.cols();
  const std::size_t group_w = bundle.f_group.cols();
  if (fuse_weight.rank() != 2 || fuse_weight.dim(0) != con_w + self_w + group_w) {
    throw ShapeError(
      "fusion weight " + nn::shape_string(fuse_weight.shape()) + " does not match feature widths");
  }
  BlockEnergies e;
  e.con = projected_norm(bundle.f_con, fuse_weight, 0);
  e.self = projected_norm(bundle.f_self, fuse_weight, con_w);
  e.group = projected_norm(bundle.f_group, fuse_weight, con_w + self_w);
  return e;
}

ContributionReport contribution_ratios(const BlockEnergies & e)
{
  ContributionReport r;
  const double total = e.self + e.group + e.con;
  if (!(total > 0.0) || !std::isfinite(total)) {
    r.degenerate = true;
    return r;
  }
  r.r_self = e.self / total;
  r.r_group = e.group / total;
  r.r_con = e.con / total;
  return r;
}

ContributionReport contribution_ratios(const FeatureBundle & bundle, const nn::Tensor & fuse_weight)
{
  return contribution_ratios(block_energies(bundle, fuse_weight));
}

AttentionReport partition_attention(const std::array<double, 7> & r_con, const nn::Tensor & weight)
{
  if (weight.rank() != 2 || weight.dim(0) != r_con.size()) {
    throw ShapeError("conception weight must have 7 rows, got " + nn::shape_string(weight.shape()));
  }
  const std::size_t width = weight.cols();
  auto energy = [&](std::size_t first, std::size_t last) {
    std::vector<double> acc(width, 0.0);
    for (std::size_t s = first; s < last; ++s) {
      for (std::size_t c = 0; c < width; ++c) {
        acc[c] += r_con[s] * weight[s * width + c];
      }
    }
    double sq = 0.0;
    for (double a : acc) {
      sq += a * a;
    }
    return std::sqrt(sq);
  };
  const double right = energy(0, 3);
  const double left = energy(3, 6);
  const double rear = energy(6, 7);
  const double total = right + left + rear;
  AttentionReport a;
  if (total > 0.0 && std::isfinite(total)) {
    a.right = right / total;
    a.left = left / total;
    a.rear = rear / total;
  }
  return a;
}

std::vector<InstanceAnalysis> analyze_instances(const GpccModel & model, std::span<const PredictionInstance> insts)
{
  const GpccConfig & cfg = model.config();
  const auto features = extract_features(insts, cfg);
  auto preds = model.predict(std::span<const InstanceFeatures>(features));
  const bool conception_on = cfg.effective_conception().enabled;

  std::vector<InstanceAnalysis> out;
  out.reserve(insts.size());
  for (std::size_t i = 0; i < insts.size(); ++i) {
    InstanceAnalysis a;
    a.groups = features[i].groups;
    a.conception = features[i].conception;
    a.partitions = assign_partitions(features[i].normalized, a.groups, cfg.effective_conception());
    if (conception_on) {
      a.attention = partition_attention(a.conception.values, model.conception_input_weight());
    }
    a.contributions = contribution_ratios(preds[i].feature_bundle, model.fuse_weight());
    a.prediction = std::move(preds[i]);
    out.push_back(std::move(a));
  }
  return out;
}

InstanceAnalysis analyze_instance(const GpccModel & model, const PredictionInstance & inst)
{
  return std::move(analyze_instances(model, std::span<const PredictionInstance>(&inst, 1)).front());
}

EditRole parse_edit_role(std::string_view s)
{
  if (s == "neighbor") {
    return EditRole::Neighbor;
  }
  if (s == "group-member") {
    return EditRole::GroupMember;
  }
  throw ConfigError("role", "expected 'neighbor' or 'group-member', got '" + std::string(s) + "'");
}

std::string_view to_string(EditRole r)
{
  return r == EditRole::GroupMember ? "group-member" : "neighbor";
}

void validate_edit(const PredictionInstance & inst, const Edit & edit, const GpccConfig & cfg)
{
  if (edit.track.size() != inst.observed.size()) {
    throw ShapeError(
      "edit '" + edit.agent_id + "' has " + std::to_string(edit.track.size()) +
      " points; the observed window has " + std::to_string(inst.observed.size()));
  }
  for (const Vec2 & p : edit.track) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw ShapeError("edit '" + edit.agent_id + "' has a non-finite position");
    }
  }
  if (edit.agent_id.empty() || edit.agent_id == inst.target_id || inst.find_neighbor(edit.agent_id) != nullptr) {
    throw Error("edit agent id '" + edit.agent_id + "' is empty or already used in this instance");
  }
  const double dist = long_term_distance(inst.observed, edit.track);
  const bool member = dist <= cfg.group.d_m;
  if (edit.role == EditRole::GroupMember && !member) {
    throw KernelViolation(
      "edit '" + edit.agent_id + "' is declared a group member but its long-term distance " + std::to_string(dist) +
      " exceeds the threshold d_m = " + std::to_string(cfg.group.d_m));
  }
  if (edit.role == EditRole::Neighbor && member) {
    throw KernelViolation(
      "edit '" + edit.agent_id + "' is declared an unrelated neighbor but its long-term distance " +
      std::to_string(dist) + " is within the threshold d_m = " + std::to_string(cfg.group.d_m) +
      ", so it would be grouped");
  }
}

PredictionInstance apply_edits(const PredictionInstance & inst, std::span<const Edit> edits, const GpccConfig & cfg)
{
  PredictionInstance out = inst;
  for (const Edit & e : edits) {
    validate_edit(out, e, cfg);
    out.neighbors.push_back({e.agent_id, e.track});
  }
  return out;
}

InterventionResult run_intervention(const GpccModel & model, const PredictionInstance & inst, std::span<const Edit> edits)
{
  const PredictionInstance edited = apply_edits(inst, edits, model.config());
  const PredictionInstance both[] = {inst, edited};
  auto analyses = analyze_instances(model, both);
  return InterventionResult{std::move(analyses[0]), std::move(analyses[1])};
}

Track constant_velocity_track(const Vec2 & start, const Vec2 & velocity, std::size_t n)
{
  Track t;
  t.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    t.push_back(start + static_cast<double>(i) * velocity);
  }
  return t;
}

std::vector<AblationRow> run_ablation(
  std::span<const PredictionInstance> train_set, std::span<const PredictionInstance> test_set,
  const GpccConfig & base, const TrainOptions & options)
{
  if (train_set.empty()) {
    throw Error("run_ablation: training set is empty");
  }
  std::vector<AblationRow> rows;
  for (Variant v : {Variant::V0, Variant::V1, Variant::V2, Variant::V3}) {
    const GpccConfig cfg = apply_variant(base, v);
    TrainResult trained = train(train_set, cfg, options);
    AblationRow row;
    row.variant = v;
    row.metrics = evaluate(trained.model, test_set);
    row.history = std::move(trained.history);
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace
{

template <typename Apply>
std::vector<SweepRow> sweep(
  std::span<const PredictionInstance> train_set, std::span<const PredictionInstance> test_set,
  const GpccConfig & base, std::span<const double> values, const TrainOptions & options, Apply apply)
{
  std::vector<SweepRow> rows;
  for (double v : values) {
    GpccConfig cfg = base;
    apply(cfg, v);
    cfg.validate();
    TrainResult trained = train(train_set, cfg, options);
    rows.push_back(SweepRow{v, evaluate(trained.model, test_set)});
  }
  return rows;
}

}  // namespace

std::vector<SweepRow> sweep_fov(
  std::span<const PredictionInstance> train_set, std::span<const PredictionInstance> test_set,
  const GpccConfig & base, std::span<const double> angles, const TrainOptions & options)
{
  return sweep(train_set, test_set, base, angles, options, [](GpccConfig & c, double v) {
    c.conception.fov_degrees = v;
  });
}

std::vector<SweepRow> sweep_dm(
  std::span<const PredictionInstance> train_set, std::span<const PredictionInstance> test_set,
  const GpccConfig & base, std::span<const double> thresholds, const TrainOptions & options)
{
  return sweep(train_set, test_set, base, thresholds, options, [](GpccConfig & c, double v) { c.group.d_m = v; });
}

std::vector<PredictionInstance> group_turn_instances(
  std::size_t n_scenes, std::uint64_t first_seed, const WindowConfig & window)
{
  std::vector<PredictionInstance> out;
  out.reserve(n_scenes);
  for (std::size_t s = 0; s < n_scenes; ++s) {
    const Scene scene = synth_scene(SynthKind::GroupTurn, 2, window.total(), first_seed + s);
    for (auto & inst : sample_windows(scene, window)) {
      if (inst.target_id == "1" && inst.start_frame == scene.frames.front()) {
        out.push_back(std::move(inst));
      }
    }
  }
  return out;
}

std::vector<PredictionInstance> constant_velocity_instances(
  std::size_t count, std::uint64_t first_seed, const WindowConfig & window, int agents_per_scene)
{
  std::vector<PredictionInstance> out;
  for (std::uint64_t seed = first_seed; out.size() < count; ++seed) {
    const Scene scene = synth_scene(SynthKind::ConstantVelocity, agents_per_scene, window.total(), seed);
    for (auto & inst : sample_windows(scene, window)) {
      if (out.size() < count) {
        out.push_back(std::move(inst));
      }
    }
  }
  return out;
}

}  // namespace gpcc
