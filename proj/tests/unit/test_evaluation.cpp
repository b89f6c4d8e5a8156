#include "gpcc/error.hpp"
#include "gpcc/evaluation.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace gpcc;
using gpcc::testing::fixed_track;

namespace
{

Track offset_track(const Track & t, Vec2 off)
{
  Track out;
  for (const Vec2 & p : t) out.push_back(p + off);
  return out;
}

Track line(std::size_t n)
{
  Track t;
  for (std::size_t i = 0; i < n; ++i) t.push_back({0.3 * static_cast<double>(i), -0.1 * static_cast<double>(i)});
  return t;
}

GpccConfig small_config()
{
  GpccConfig cfg;
  cfg.model.d = 4;
  cfg.model.d_model = 8;
  cfg.model.heads = 2;
  cfg.model.ffn_hidden = 16;
  cfg.model.k_gen = 3;
  return cfg;
}

FeatureBundle bundle_of(double self, double group, double con, std::size_t d = 2)
{
  FeatureBundle b;
  b.f_self = nn::Tensor({1, d}, 0.0);
  b.f_group = nn::Tensor({1, d}, 0.0);
  b.f_con = nn::Tensor({1, 2 * d}, 0.0);
  b.f_self[0] = self;
  b.f_group[0] = group;
  b.f_con[0] = con;
  return b;
}

// Identity-like weight: every input row maps to its own output column.
nn::Tensor identity_weight(std::size_t rows)
{
  nn::Tensor w({rows, rows}, 0.0);
  for (std::size_t i = 0; i < rows; ++i) w[i * rows + i] = 1.0;
  return w;
}

// Target walking +x ending at the origin.
PredictionInstance walking_target()
{
  PredictionInstance inst;
  inst.scene_id = "s";
  inst.target_id = "t";
  inst.observed = constant_velocity_track({-3.5, 0}, {0.5, 0}, 8);
  return inst;
}

}  // namespace

TEST(Metrics, HandExamples)
{
  const Track truth = line(12);
  EXPECT_EQ(min_ade(truth, std::vector<Track>{truth}), 0.0);
  EXPECT_EQ(min_fde(truth, std::vector<Track>{truth}), 0.0);
  EXPECT_NEAR(min_ade(truth, std::vector<Track>{offset_track(truth, {0, 1})}), 1.0, 1e-12);
  EXPECT_NEAR(min_ade(line(5), std::vector<Track>{offset_track(line(5), {0, 1})}), 1.0, 1e-12);
  EXPECT_NEAR(
    min_ade(truth, std::vector<Track>{offset_track(truth, {2, 0}), offset_track(truth, {0, 0.5})}), 0.5, 1e-12);
  Track last = truth;
  last.back() += Vec2{3, 4};
  EXPECT_NEAR(min_fde(truth, std::vector<Track>{last}), 5.0, 1e-12);
}

TEST(Metrics, MinimaAreIndependent)
{
  const Track truth = fixed_track({0, 0}, 4);
  // a: close except the final step; b: far except the final step.
  const Track a{{0, 0}, {0, 0}, {0, 0}, {4, 0}};
  const Track b{{3, 0}, {3, 0}, {3, 0}, {0, 0}};
  const std::vector<Track> cands{a, b};
  EXPECT_NEAR(min_ade(truth, cands), 1.0, 1e-12);
  EXPECT_NEAR(min_fde(truth, cands), 0.0, 1e-12);
}

TEST(Metrics, ShapeErrors)
{
  EXPECT_THROW(min_ade(line(12), std::vector<Track>{line(11)}), ShapeError);
  EXPECT_THROW(min_fde(line(12), std::vector<Track>{}), ShapeError);
}

TEST(Metrics, MatchesBruteForce)
{
  Rng rng(40);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 1 + rng.index(12);
    const std::size_t k = 1 + rng.index(20);
    const Track truth = gpcc::testing::random_track(rng, n);
    std::vector<Track> cands;
    for (std::size_t c = 0; c < k; ++c) cands.push_back(gpcc::testing::random_track(rng, n));
    double best_ade = INFINITY, best_fde = INFINITY;
    for (const Track & c : cands) {
      double s = 0;
      for (std::size_t t = 0; t < n; ++t) s += std::hypot(c[t].x - truth[t].x, c[t].y - truth[t].y);
      best_ade = std::min(best_ade, s / static_cast<double>(n));
      best_fde = std::min(best_fde, std::hypot(c[n - 1].x - truth[n - 1].x, c[n - 1].y - truth[n - 1].y));
    }
    EXPECT_NEAR(min_ade(truth, cands), best_ade, 1e-12);
    EXPECT_NEAR(min_fde(truth, cands), best_fde, 1e-12);
  }
}

TEST(Evaluate, AveragesPerInstance)
{
  const GpccModel model(small_config(), 1);
  Rng rng(41);
  std::vector<PredictionInstance> insts;
  for (int i = 0; i < 7; ++i) insts.push_back(gpcc::testing::random_instance(rng, 8, 12));
  const MetricReport r = evaluate(model, insts, 3);
  ASSERT_EQ(r.count(), 7u);
  EXPECT_EQ(r.k, 3);
  double s = 0;
  for (std::size_t i = 0; i < 7; ++i) {
    const PredictionSet p = model.forward(insts[i]);
    EXPECT_NEAR(r.per_instance_ade[i], min_ade(*insts[i].future_truth, p.trajectories), 1e-12);
    s += r.per_instance_ade[i];
  }
  EXPECT_NEAR(r.min_ade, s / 7, 1e-12);
  insts[2].future_truth.reset();
  EXPECT_THROW(evaluate(model, insts), Error);
}

TEST(Contributions, HandExamples)
{
  const auto only_group = contribution_ratios(BlockEnergies{0, 3, 0});
  EXPECT_EQ(only_group.r_self, 0.0);
  EXPECT_EQ(only_group.r_group, 1.0);
  EXPECT_EQ(only_group.r_con, 0.0);
  const auto equal = contribution_ratios(BlockEnergies{2, 2, 2});
  EXPECT_NEAR(equal.r_self, 1.0 / 3, 1e-15);
  EXPECT_NEAR(equal.r_con, 1.0 / 3, 1e-15);
  const auto mixed = contribution_ratios(BlockEnergies{1, 1, 2});
  EXPECT_DOUBLE_EQ(mixed.r_self, 0.25);
  EXPECT_DOUBLE_EQ(mixed.r_group, 0.25);
  EXPECT_DOUBLE_EQ(mixed.r_con, 0.5);
  const auto zero = contribution_ratios(BlockEnergies{});
  EXPECT_TRUE(zero.degenerate);
  EXPECT_EQ(zero.r_self, 1.0);
  EXPECT_EQ(zero.r_group + zero.r_con, 0.0);
}

TEST(Contributions, EnergiesFollowConcatOrder)
{
  // Rows: con [0, 4), self [4, 6), group [6, 8).
  const nn::Tensor w = identity_weight(8);
  const BlockEnergies e = block_energies(bundle_of(3, 4, 5), w);
  EXPECT_DOUBLE_EQ(e.self, 3);
  EXPECT_DOUBLE_EQ(e.group, 4);
  EXPECT_DOUBLE_EQ(e.con, 5);
  nn::Tensor w2 = w;
  w2[5 * 8 + 5] = 0;  // second self row does not matter: f_self[1] is zero
  w2[4 * 8 + 4] = 2;
  EXPECT_DOUBLE_EQ(block_energies(bundle_of(3, 4, 5), w2).self, 6);
  EXPECT_THROW(block_energies(bundle_of(1, 1, 1), identity_weight(7)), ShapeError);
}

TEST(Contributions, ScaleInvariantAndNormalized)
{
  Rng rng(42);
  for (int i = 0; i < 200; ++i) {
    FeatureBundle b;
    b.f_self = nn::Tensor({8, 4});
    b.f_group = nn::Tensor({8, 4});
    b.f_con = nn::Tensor({8, 8});
    for (auto * t : {&b.f_self, &b.f_group, &b.f_con})
      for (auto & v : t->values()) v = rng.uniform(-1, 1);
    nn::Tensor w({16, 8});
    for (auto & v : w.values()) v = rng.uniform(-1, 1);
    const auto r = contribution_ratios(b, w);
    EXPECT_NEAR(r.r_self + r.r_group + r.r_con, 1.0, 1e-9);
    const double c = rng.uniform(0.01, 100);
    for (auto * t : {&b.f_self, &b.f_group, &b.f_con})
      for (auto & v : t->values()) v *= c;
    const auto s = contribution_ratios(b, w);
    EXPECT_NEAR(s.r_self, r.r_self, 1e-9);
    EXPECT_NEAR(s.r_group, r.r_group, 1e-9);
    EXPECT_NEAR(s.r_con, r.r_con, 1e-9);
  }
}

TEST(Attention, PartitionsAndNormalization)
{
  Rng rng(43);
  nn::Tensor w({7, 6});
  for (auto & v : w.values()) v = rng.uniform(-1, 1);
  const auto rear = partition_attention({0, 0, 0, 0, 0, 0, 2.5}, w);
  EXPECT_EQ(rear.right, 0.0);
  EXPECT_EQ(rear.left, 0.0);
  EXPECT_EQ(rear.rear, 1.0);
  EXPECT_TRUE(partition_attention({}, w).all_zero());
  for (int i = 0; i < 200; ++i) {
    std::array<double, 7> r{};
    for (auto & v : r) v = rng.uniform(0, 3);
    const auto a = partition_attention(r, w);
    EXPECT_NEAR(a.right + a.left + a.rear, 1.0, 1e-9);
  }
  EXPECT_THROW(partition_attention({}, nn::Tensor({6, 6})), ShapeError);
}

TEST(Attention, HandComputedEnergies)
{
  nn::Tensor w({7, 2}, 0.0);
  w[0] = 1;   // right slot 0 -> column 0
  w[3] = 1;   // right slot 1 -> column 1
  w[6] = 2;   // left slot 3 -> column 0
  w[12] = 1;  // rear -> column 0
  // right: |(3, 4)| = 5; left: |(2*2.5, 0)| = 5; rear: 10
  const auto a = partition_attention({3, 4, 0, 2.5, 0, 0, 10}, w);
  EXPECT_DOUBLE_EQ(a.right, 0.25);
  EXPECT_DOUBLE_EQ(a.left, 0.25);
  EXPECT_DOUBLE_EQ(a.rear, 0.5);
}

TEST(Attention, MirroredSceneSwapsSlots)
{
  PredictionInstance inst = walking_target();
  inst.neighbors = {{"a", constant_velocity_track({2, -3}, {0.2, 0.3}, 8)}, {"b", fixed_track({-5, 1}, 8)}};
  const auto mirrored = gpcc::testing::map_instance(inst, [](Vec2 p) { return Vec2{p.x, -p.y}; });
  const auto r = conception_vector(inst, GroupSet{}, ConceptionConfig{});
  const auto m = conception_vector(mirrored, GroupSet{}, ConceptionConfig{});
  for (std::size_t s = 0; s < 3; ++s) {
    EXPECT_NEAR(r.values[s], m.values[s + 3], 1e-12);
    EXPECT_NEAR(r.values[s + 3], m.values[s], 1e-12);
  }
  EXPECT_NEAR(r.values[6], m.values[6], 1e-12);
}

TEST(Analysis, ConceptionOffGivesZeroAttention)
{
  PredictionInstance inst = walking_target();
  inst.future_truth = fixed_track({0, 0}, 12);
  inst.neighbors = {{"n", fixed_track({3, -3}, 8)}};
  const GpccModel off(apply_variant(small_config(), Variant::V1), 2);
  EXPECT_TRUE(analyze_instance(off, inst).attention.all_zero());
  const GpccModel on(small_config(), 2);
  const InstanceAnalysis a = analyze_instance(on, inst);
  EXPECT_DOUBLE_EQ(a.attention.right, 1.0);
  EXPECT_EQ(a.partitions.labels.at("n").partition, Partition::Right);
  EXPECT_NEAR(a.contributions.r_self + a.contributions.r_group + a.contributions.r_con, 1.0, 1e-9);
}

TEST(Intervention, RightNeighborRaisesRightAttention)
{
  PredictionInstance inst = walking_target();
  inst.neighbors = {{"l", fixed_track({2, 4}, 8)}, {"b", fixed_track({-6, 0}, 8)}};
  const GpccModel model(small_config(), 3);
  const Edit e{"new", constant_velocity_track({6, -6}, {-0.3, 0.3}, 8), EditRole::Neighbor};
  const InterventionResult r = run_intervention(model, inst, std::span<const Edit>(&e, 1));
  EXPECT_EQ(r.after.partitions.labels.at("new").partition, Partition::Right);
  EXPECT_GT(r.after.attention.right, r.before.attention.right);
  EXPECT_EQ(r.after.conception.counts[0], 1);
}

TEST(Intervention, GroupMemberLeavesAttentionUnchanged)
{
  PredictionInstance inst = walking_target();
  inst.neighbors = {
    {"m", offset_track(inst.observed, {0, 0.6})}, {"l", fixed_track({2, 4}, 8)}, {"r", fixed_track({3, -2}, 8)}};
  const GpccModel model(small_config(), 4);
  const Edit e{"friend", offset_track(inst.observed, {-0.4, -0.5}), EditRole::GroupMember};
  const InterventionResult r = run_intervention(model, inst, std::span<const Edit>(&e, 1));
  EXPECT_TRUE(r.after.groups.contains("friend"));
  EXPECT_EQ(r.after.attention, r.before.attention);
  EXPECT_EQ(r.after.conception, r.before.conception);
  EXPECT_NEAR(r.after.contributions.r_con, r.before.contributions.r_con, 0.05);
}

TEST(Intervention, KernelViolationsAndBadEdits)
{
  const PredictionInstance inst = walking_target();
  const GpccConfig cfg;
  const Edit far_member{"x", offset_track(inst.observed, {50, 0}), EditRole::GroupMember};
  try {
    validate_edit(inst, far_member, cfg);
    FAIL();
  } catch (const KernelViolation & e) {
    EXPECT_NE(std::string(e.what()).find("d_m"), std::string::npos);
  }
  const Edit close_neighbor{"y", offset_track(inst.observed, {0.5, 0}), EditRole::Neighbor};
  EXPECT_THROW(validate_edit(inst, close_neighbor, cfg), KernelViolation);
  EXPECT_THROW(validate_edit(inst, Edit{"z", fixed_track({9, 9}, 7), EditRole::Neighbor}, cfg), ShapeError);
  EXPECT_THROW(validate_edit(inst, Edit{"t", fixed_track({9, 9}, 8), EditRole::Neighbor}, cfg), Error);
  EXPECT_THROW(validate_edit(inst, Edit{"", fixed_track({9, 9}, 8), EditRole::Neighbor}, cfg), Error);
  Track nan_track = fixed_track({9, 9}, 8);
  nan_track[3].x = std::nan("");
  EXPECT_THROW(validate_edit(inst, Edit{"w", nan_track, EditRole::Neighbor}, cfg), ShapeError);
  EXPECT_NO_THROW(validate_edit(inst, Edit{"v", fixed_track({9, 9}, 8), EditRole::Neighbor}, cfg));
  EXPECT_EQ(parse_edit_role("group-member"), EditRole::GroupMember);
  EXPECT_THROW(parse_edit_role("friend"), ConfigError);
}

TEST(Datasets, GroupTurnFollowers)
{
  const WindowConfig w{8, 12, 1};
  const auto insts = group_turn_instances(5, 10, w);
  ASSERT_EQ(insts.size(), 5u);
  for (const auto & inst : insts) {
    EXPECT_EQ(inst.target_id, "1");
    ASSERT_EQ(inst.neighbors.size(), 1u);
    EXPECT_LE(long_term_distance(inst.observed, inst.neighbors[0].track), GroupConfig{}.d_m);
    EXPECT_TRUE(inst.future_truth.has_value());
  }
  const auto cv = constant_velocity_instances(37, 5, w);
  EXPECT_EQ(cv.size(), 37u);
}

TEST(Ablation, FourRowsAndVariantFlags)
{
  GpccConfig cfg = small_config();
  cfg.model.encoder_layers = 1;
  cfg.model.decoder_layers = 1;
  const auto train_set = group_turn_instances(6, 100, cfg.window);
  const auto test_set = group_turn_instances(4, 200, cfg.window);
  TrainOptions o;
  o.epochs = 2;
  o.batch_size = 3;
  const auto rows = run_ablation(train_set, test_set, cfg, o);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[1].variant, Variant::V1);
  EXPECT_EQ(rows[3].history.size(), 2u);
  const auto again = run_ablation(train_set, test_set, cfg, o);
  EXPECT_EQ(again[0].metrics.min_ade, rows[0].metrics.min_ade);
  EXPECT_THROW(run_ablation({}, test_set, cfg, o), Error);
}

TEST(Sweeps, OneRowPerValue)
{
  GpccConfig cfg = small_config();
  cfg.model.encoder_layers = 1;
  cfg.model.decoder_layers = 1;
  const auto data = group_turn_instances(4, 300, cfg.window);
  TrainOptions o;
  o.epochs = 1;
  o.batch_size = 4;
  const std::vector<double> angles{90, 180, 360};
  const auto rows = sweep_fov(data, data, cfg, angles, o);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[2].value, 360.0);
  const std::vector<double> bad{0.0};
  EXPECT_THROW(sweep_dm(data, data, cfg, bad, o), ConfigError);
}
