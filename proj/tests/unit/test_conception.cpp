#include "gpcc/conception.hpp"
#include "gpcc/error.hpp"
#include "gpcc/grouping.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>

using namespace gpcc;
using gpcc::testing::fixed_track;

namespace
{

constexpr double kPi = std::numbers::pi;

void expect_vectors_near(const ConceptionVector & a, const ConceptionVector & b, double tol)
{
  EXPECT_EQ(a.counts, b.counts);
  for (std::size_t i = 0; i < ConceptionVector::size; ++i) {
    EXPECT_NEAR(a.values[i], b.values[i], tol) << "slot " << i;
  }
}

// Target stationary for a while, then moving along +x, ending at the origin.
Track stationary_then_moving()
{
  return {{-3, 0}, {-3, 0}, {-3, 0}, {-3, 0}, {-3, 0}, {-2, 0}, {-1, 0}, {0, 0}};
}

}  // namespace

TEST(MovingDirection, LastStepAxes)
{
  EXPECT_EQ(moving_direction(Track{{0, 0}, {1, 0}}), 0.0);
  EXPECT_DOUBLE_EQ(moving_direction(Track{{0, 0}, {0, 1}}), kPi / 2);
  EXPECT_DOUBLE_EQ(moving_direction(Track{{0, 0}, {-1, 0}}), kPi);
  EXPECT_DOUBLE_EQ(moving_direction(Track{{0, 0}, {0, -1}}), -kPi / 2);
}

TEST(MovingDirection, StationaryFallbacks)
{
  EXPECT_DOUBLE_EQ(moving_direction(Track{{0, 0}, {0, 1}, {0, 1}, {0, 1}}), kPi / 2);
  EXPECT_EQ(moving_direction(fixed_track({2, 2}, 5)), 0.0);
  EXPECT_FALSE(try_moving_direction(fixed_track({2, 2}, 5)).has_value());
  EXPECT_THROW(moving_direction(Track{{0, 0}}), ShapeError);
}

TEST(AssignPartition, HandExamples)
{
  const ConceptionConfig cfg{180.0, true};
  const auto left = assign_partition({0, 0}, 0.0, {1, 0.5}, cfg);
  EXPECT_EQ(left.partition, Partition::Left);
  EXPECT_NEAR(left.relative_angle, 0.4636476090008061, 1e-15);
  EXPECT_EQ(assign_partition({0, 0}, 0.0, {1, -0.5}, cfg).partition, Partition::Right);
  const auto rear = assign_partition({0, 0}, 0.0, {-1, 0.1}, cfg);
  EXPECT_EQ(rear.partition, Partition::Rear);
  EXPECT_NEAR(std::abs(rear.relative_angle), 3.041924001098631, 1e-12);
}

TEST(AssignPartition, TieBreaksAndEdges)
{
  const ConceptionConfig cfg{180.0, true};
  EXPECT_EQ(assign_partition({0, 0}, 0.0, {2, 0}, cfg).partition, Partition::Right);
  const auto same = assign_partition({1, 1}, 0.3, {1, 1}, cfg);
  EXPECT_EQ(same.partition, Partition::Rear);
  EXPECT_EQ(same.relative_angle, 0.0);
  // Exactly on the FOV edge counts as inside.
  EXPECT_EQ(assign_partition({0, 0}, 0.0, {0, 1}, cfg).partition, Partition::Left);
  EXPECT_EQ(assign_partition({0, 0}, 0.0, {0, -1}, cfg).partition, Partition::Right);
  // A full circle has no rear for distinct positions.
  const ConceptionConfig full{360.0, true};
  EXPECT_EQ(assign_partition({0, 0}, 0.0, {-1, 0}, full).partition, Partition::Left);
  EXPECT_EQ(assign_partition({0, 0}, 0.0, {-1, -1e-9}, full).partition, Partition::Right);
  // Narrow cone.
  const ConceptionConfig narrow{30.0, true};
  EXPECT_EQ(assign_partition({0, 0}, 0.0, {1, 0.5}, narrow).partition, Partition::Rear);
}

TEST(ConceptionConfig, Validation)
{
  EXPECT_NO_THROW((ConceptionConfig{360.0, true}.validate()));
  EXPECT_THROW((ConceptionConfig{0.0, true}.validate()), ConfigError);
  EXPECT_THROW((ConceptionConfig{361.0, true}.validate()), ConfigError);
  EXPECT_NEAR(ConceptionConfig{}.fov_radians(), kPi, 1e-15);
}

TEST(ConceptionVector, NoEligibleNeighbors)
{
  PredictionInstance inst;
  inst.observed = stationary_then_moving();
  const ConceptionVector r = conception_vector(inst, GroupSet{}, ConceptionConfig{});
  EXPECT_EQ(r, ConceptionVector{});
}

TEST(ConceptionVector, StationaryNeighborOnTheRight)
{
  PredictionInstance inst;
  inst.target_id = "t";
  inst.observed = stationary_then_moving();
  inst.neighbors = {{"n", fixed_track({1, -1}, 8)}};
  const ConceptionVector r = conception_vector(inst, GroupSet{}, ConceptionConfig{});
  EXPECT_DOUBLE_EQ(r.values[0], std::sqrt(2.0));
  EXPECT_EQ(r.values[1], 0.0);
  EXPECT_EQ(r.values[2], 0.0);
  for (std::size_t i = 3; i < 7; ++i) {
    EXPECT_EQ(r.values[i], 0.0);
  }
  EXPECT_EQ(r.counts, (std::array<int, 3>{1, 0, 0}));
}

TEST(ConceptionVector, HandComputedMixedPartitions)
{
  PredictionInstance inst;
  inst.target_id = "t";
  inst.observed = {{-1, 0}, {0, 0}};  // heading 0
  // Left neighbor heading north, moved 2; right neighbor heading west (pi), moved 1;
  // rear neighbor at distance 3.
  inst.neighbors = {
    {"l", {{2, 1}, {2, 3}}},
    {"r", {{4, -1}, {3, -1}}},
    {"b", {{-3, 0}, {-3, 0}}},
  };
  const ConceptionVector r = conception_vector(inst, GroupSet{}, ConceptionConfig{});
  EXPECT_DOUBLE_EQ(r.values[0], std::sqrt(10.0));
  EXPECT_DOUBLE_EQ(r.values[1], kPi);
  EXPECT_DOUBLE_EQ(r.values[2], 1.0);
  EXPECT_DOUBLE_EQ(r.values[3], std::sqrt(13.0));
  EXPECT_DOUBLE_EQ(r.values[4], kPi / 2);
  EXPECT_DOUBLE_EQ(r.values[5], 2.0);
  EXPECT_DOUBLE_EQ(r.values[6], 3.0);
  EXPECT_EQ(r.counts, (std::array<int, 3>{1, 1, 1}));
}

TEST(ConceptionVector, DirectionDifferenceWrapsToHalfTurn)
{
  PredictionInstance inst;
  inst.observed = {{0, 0.1}, {0, 0}};  // heading -pi/2 (south)
  // Neighbor heading at +pi - 0.1: raw difference 3pi/2 - 0.1 wraps to pi/2 + 0.1.
  const double h = kPi - 0.1;
  inst.neighbors = {{"n", {{0.5, -1}, {0.5 + std::cos(h), -1 + std::sin(h)}}}};
  const ConceptionVector r = conception_vector(inst, GroupSet{}, ConceptionConfig{});
  const double dir = r.counts[0] == 1 ? r.values[1] : r.values[4];
  EXPECT_NEAR(dir, kPi / 2 + 0.1, 1e-12);
}

TEST(ConceptionVector, DisabledIsZero)
{
  PredictionInstance inst;
  inst.observed = stationary_then_moving();
  inst.neighbors = {{"n", fixed_track({1, -1}, 8)}};
  EXPECT_EQ(conception_vector(inst, GroupSet{}, ConceptionConfig{180.0, false}), ConceptionVector{});
}

TEST(ConceptionVector, GroupMembersAreExcluded)
{
  Rng rng(30);
  for (int i = 0; i < 300; ++i) {
    PredictionInstance inst = gpcc::testing::random_instance(rng, 8, 12);
    const GroupConfig gcfg{};
    const ConceptionVector before = conception_vector(inst, group_members(inst, gcfg), ConceptionConfig{});
    // A companion walking 0.5 units beside the target has kernel value 1.
    Track companion;
    for (const Vec2 & p : inst.observed) {
      companion.push_back(p + Vec2{0.3, 0.4});
    }
    inst.neighbors.push_back({"companion", companion});
    const GroupSet g = group_members(inst, gcfg);
    ASSERT_TRUE(g.contains("companion"));
    EXPECT_EQ(conception_vector(inst, g, ConceptionConfig{}), before);
  }
}

TEST(ConceptionVector, RotatedAndTranslatedHandExample)
{
  PredictionInstance inst;
  inst.observed = stationary_then_moving();
  inst.neighbors = {{"n", fixed_track({1, -1}, 8)}};
  const RigidTransform tf{kPi / 2, {5, 5}};
  const PredictionInstance moved = gpcc::testing::map_instance(inst, tf);
  expect_vectors_near(
    conception_vector(moved, GroupSet{}, ConceptionConfig{}), conception_vector(inst, GroupSet{}, ConceptionConfig{}),
    1e-9);
}

TEST(ConceptionVector, RigidMotionInvariance)
{
  Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    const PredictionInstance inst = gpcc::testing::random_instance(rng, 8, 12);
    const GroupSet g = group_members(inst, GroupConfig{});
    const ConceptionVector base = conception_vector(inst, g, ConceptionConfig{});
    for (int k = 0; k < 10; ++k) {
      const RigidTransform tf{rng.uniform(-kPi, kPi), {rng.uniform(-100, 100), rng.uniform(-100, 100)}};
      const PredictionInstance moved = gpcc::testing::map_instance(inst, tf);
      expect_vectors_near(conception_vector(moved, group_members(moved, GroupConfig{}), ConceptionConfig{}), base, 1e-9);
    }
  }
}

TEST(ConceptionVector, PermutationInvarianceIsExact)
{
  Rng rng(32);
  for (int i = 0; i < 300; ++i) {
    PredictionInstance inst = gpcc::testing::random_instance(rng, 8, 12, 8);
    const ConceptionVector base = conception_vector(inst, group_members(inst, GroupConfig{}), ConceptionConfig{});
    rng.shuffle(inst.neighbors);
    EXPECT_EQ(conception_vector(inst, group_members(inst, GroupConfig{}), ConceptionConfig{}), base);
  }
}

TEST(ConceptionVector, PartitionOracleAndRanges)
{
  Rng rng(33);
  for (int i = 0; i < 500; ++i) {
    const PredictionInstance inst = gpcc::testing::random_instance(rng, 8, 12, 8);
    const ConceptionConfig cfg{rng.uniform(10.0, 360.0), true};
    const GroupSet g = group_members(inst, GroupConfig{});
    const PartitionAssignment parts = assign_partitions(inst, g, cfg);
    const ConceptionVector r = conception_vector(inst, g, cfg);

    // Brute-force labels from the definition.
    const Vec2 d = inst.observed[7] - inst.observed[6];
    const double heading = std::atan2(d.y, d.x);
    std::array<int, 3> counts{};
    std::size_t eligible = 0;
    for (const auto & nb : inst.neighbors) {
      if (g.contains(nb.agent_id)) {
        EXPECT_EQ(parts.labels.count(nb.agent_id), 0u);
        continue;
      }
      ++eligible;
      const Vec2 rel = nb.track.back() - inst.observed.back();
      double phi = std::atan2(rel.y, rel.x) - heading;
      while (phi > kPi) phi -= 2 * kPi;
      while (phi <= -kPi) phi += 2 * kPi;
      Partition expected = Partition::Rear;
      if (std::abs(phi) <= cfg.fov_degrees * kPi / 360.0) {
        expected = phi > 0 ? Partition::Left : Partition::Right;
      }
      EXPECT_EQ(parts.labels.at(nb.agent_id).partition, expected);
      EXPECT_NEAR(parts.labels.at(nb.agent_id).relative_angle, phi, 1e-12);
      ++counts[static_cast<std::size_t>(expected)];
    }
    EXPECT_EQ(r.counts, counts);
    EXPECT_EQ(static_cast<std::size_t>(r.counts[0] + r.counts[1] + r.counts[2]), eligible);
    for (std::size_t s = 0; s < 7; ++s) {
      EXPECT_TRUE(std::isfinite(r.values[s]));
      EXPECT_GE(r.values[s], 0.0);
    }
    EXPECT_LE(r.values[1], kPi);
    EXPECT_LE(r.values[4], kPi);
    for (std::size_t p = 0; p < 2; ++p) {
      if (r.counts[p] == 0) {
        EXPECT_EQ(r.values[3 * p], 0.0);
        EXPECT_EQ(r.values[3 * p + 1], 0.0);
        EXPECT_EQ(r.values[3 * p + 2], 0.0);
      }
    }
    if (r.counts[2] == 0) {
      EXPECT_EQ(r.values[6], 0.0);
    }
  }
}

TEST(ConceptionVector, ShapeMismatchThrows)
{
  PredictionInstance inst;
  inst.observed = fixed_track({0, 0}, 8);
  inst.neighbors = {{"n", fixed_track({1, 1}, 7)}};
  EXPECT_THROW(conception_vector(inst, GroupSet{}, ConceptionConfig{}), ShapeError);
}
