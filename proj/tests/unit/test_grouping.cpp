#include "gpcc/error.hpp"
#include "gpcc/grouping.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace gpcc;
using gpcc::testing::fixed_track;

namespace
{

PredictionInstance two_neighbor_instance()
{
  PredictionInstance inst;
  inst.target_id = "t";
  inst.observed = fixed_track({0, 0}, 8);
  inst.neighbors = {{"a", fixed_track({1, 0}, 8)}, {"b", fixed_track({3, 0}, 8)}};
  return inst;
}

}  // namespace

TEST(LongTermDistance, HandSums)
{
  EXPECT_DOUBLE_EQ(long_term_distance(fixed_track({0, 0}, 8), fixed_track({1, 0}, 8)), 8.0);
  EXPECT_DOUBLE_EQ(long_term_distance(fixed_track({0, 0}, 8), fixed_track({3, 0}, 8)), 24.0);
  const Track t{{0, 0}, {1, 1}, {2, 0}};
  EXPECT_EQ(long_term_distance(t, t), 0.0);
}

TEST(LongTermDistance, LengthMismatchThrows)
{
  EXPECT_THROW(long_term_distance(fixed_track({0, 0}, 8), fixed_track({0, 0}, 7)), ShapeError);
}

TEST(Kernel, ThresholdIsInclusive)
{
  const GroupConfig cfg{20.0, true};
  EXPECT_EQ(group_kernel(fixed_track({0, 0}, 8), fixed_track({1, 0}, 8), cfg), 1);
  EXPECT_EQ(group_kernel(fixed_track({0, 0}, 8), fixed_track({3, 0}, 8), cfg), 0);
  // 8 frames at distance 2.5 sum to exactly 20.
  EXPECT_EQ(long_term_distance(fixed_track({0, 0}, 8), fixed_track({2.5, 0}, 8)), 20.0);
  EXPECT_EQ(group_kernel(fixed_track({0, 0}, 8), fixed_track({2.5, 0}, 8), cfg), 1);
  EXPECT_EQ(group_kernel(fixed_track({0, 0}, 8), fixed_track({2.5, 0}, 8), GroupConfig{19.999999, true}), 0);
}

TEST(GroupConfig, DefaultsAndValidation)
{
  EXPECT_DOUBLE_EQ(GroupConfig{}.d_m, 20.0);
  EXPECT_DOUBLE_EQ(GroupConfig::default_threshold(8), 20.0);
  EXPECT_DOUBLE_EQ(GroupConfig::default_threshold(4), 10.0);
  EXPECT_DOUBLE_EQ(GroupConfig::default_threshold(5), 12.5);
  EXPECT_THROW((GroupConfig{0.0, true}.validate()), ConfigError);
  EXPECT_THROW((GroupConfig{-1.0, true}.validate()), ConfigError);
}

TEST(GroupMembers, NoNeighbors)
{
  PredictionInstance inst;
  inst.target_id = "t";
  inst.observed = fixed_track({0, 0}, 8);
  const GroupSet g = group_members(inst, GroupConfig{});
  EXPECT_TRUE(g.member_ids.empty());
  EXPECT_TRUE(g.per_neighbor_distance.empty());
  EXPECT_EQ(g.target_id, "t");
}

TEST(GroupMembers, ConstantOffsets)
{
  const GroupSet g = group_members(two_neighbor_instance(), GroupConfig{20.0, true});
  EXPECT_EQ(g.member_ids, (std::set<std::string>{"a"}));
  EXPECT_DOUBLE_EQ(g.per_neighbor_distance.at("a"), 8.0);
  EXPECT_DOUBLE_EQ(g.per_neighbor_distance.at("b"), 24.0);
}

TEST(GroupMembers, DisabledGivesEmptySet)
{
  const GroupSet g = group_members(two_neighbor_instance(), GroupConfig{20.0, false});
  EXPECT_TRUE(g.member_ids.empty());
  EXPECT_EQ(g.per_neighbor_distance.size(), 2u);
}

TEST(GroupMembers, MatchesBruteForce)
{
  Rng rng(21);
  for (int i = 0; i < 1000; ++i) {
    const PredictionInstance inst = gpcc::testing::random_instance(rng, 8, 12);
    const GroupConfig cfg{rng.uniform(1.0, 40.0), true};
    std::set<std::string> expected;
    for (const auto & nb : inst.neighbors) {
      double sum = 0.0;
      for (std::size_t t = 0; t < 8; ++t) {
        const double dx = nb.track[t].x - inst.observed[t].x;
        const double dy = nb.track[t].y - inst.observed[t].y;
        sum += std::sqrt(dx * dx + dy * dy);
      }
      if (sum <= cfg.d_m) {
        expected.insert(nb.agent_id);
      }
    }
    EXPECT_EQ(group_members(inst, cfg).member_ids, expected);
  }
}

TEST(GroupMembers, InvariantsOfTheSet)
{
  Rng rng(22);
  for (int i = 0; i < 300; ++i) {
    const PredictionInstance inst = gpcc::testing::random_instance(rng, 8, 12);
    const GroupConfig cfg{20.0, true};
    const GroupSet g = group_members(inst, cfg);
    for (const auto & [id, d] : g.per_neighbor_distance) {
      EXPECT_EQ(g.contains(id), d <= cfg.d_m);
      EXPECT_NE(inst.find_neighbor(id), nullptr);
    }
  }
}

TEST(GroupMembers, RigidMotionInvariance)
{
  Rng rng(23);
  for (int i = 0; i < 200; ++i) {
    const PredictionInstance inst = gpcc::testing::random_instance(rng, 8, 12);
    const GroupSet base = group_members(inst, GroupConfig{});
    const RigidTransform tf{rng.uniform(-std::numbers::pi, std::numbers::pi), {rng.uniform(-50, 50), rng.uniform(-50, 50)}};
    const GroupSet moved = group_members(gpcc::testing::map_instance(inst, tf), GroupConfig{});
    EXPECT_EQ(moved.member_ids, base.member_ids);
    for (const auto & [id, d] : base.per_neighbor_distance) {
      EXPECT_NEAR(moved.per_neighbor_distance.at(id), d, 1e-9);
    }
  }
}

TEST(GroupKernel, Symmetric)
{
  Rng rng(24);
  for (int i = 0; i < 500; ++i) {
    const Track a = gpcc::testing::random_track(rng, 8, 2.0);
    const Track b = gpcc::testing::random_track(rng, 8, 2.0);
    const GroupConfig cfg{rng.uniform(1.0, 40.0), true};
    EXPECT_EQ(group_kernel(a, b, cfg), group_kernel(b, a, cfg));
  }
}

TEST(GroupMembers, MonotoneInThreshold)
{
  Rng rng(25);
  for (int i = 0; i < 300; ++i) {
    const PredictionInstance inst = gpcc::testing::random_instance(rng, 8, 12);
    const double lo = rng.uniform(1.0, 30.0);
    const double hi = lo + rng.uniform(0.0, 20.0);
    const auto small = group_members(inst, GroupConfig{lo, true}).member_ids;
    const auto large = group_members(inst, GroupConfig{hi, true}).member_ids;
    EXPECT_TRUE(std::includes(large.begin(), large.end(), small.begin(), small.end()));
  }
}
