#ifndef GPCC__CONCEPTION_HPP_
#define GPCC__CONCEPTION_HPP_

#include "gpcc/geometry.hpp"
#include "gpcc/grouping.hpp"
#include "gpcc/scene.hpp"

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace gpcc
{

struct ConceptionConfig
{
  double fov_degrees{180.0};
  bool enabled{true};

  void validate() const;
  double fov_radians() const noexcept { return degrees_to_radians(fov_degrees); }
};

enum class Partition { Right = 0, Left = 1, Rear = 2 };

std::string_view to_string(Partition p);

struct PartitionLabel
{
  Partition partition{Partition::Rear};
  /// Neighbor bearing relative to the target heading, in (-pi, pi]. 0 for coincident agents.
  double relative_angle{0.0};
};

/// Per-neighbor partitions of the agents the perception step considered.
struct PartitionAssignment
{
  std::map<std::string, PartitionLabel> labels;
};

/// Layout: dis_right, dir_right, vel_right, dis_left, dir_left, vel_left, dis_rear.
struct ConceptionVector
{
  static constexpr std::size_t size = 7;
  std::array<double, size> values{};
  /// Neighbors per partition, indexed by Partition.
  std::array<int, 3> counts{};

  friend bool operator==(const ConceptionVector &, const ConceptionVector &) = default;
};

/// Direction of the last non-zero step, in (-pi, pi]. 0 when the whole track is stationary.
/// Throws ShapeError for tracks shorter than 2.
double moving_direction(std::span<const Vec2> track);

/// As moving_direction, but empty when the whole track is stationary.
std::optional<double> try_moving_direction(std::span<const Vec2> track);

/// Classifies a neighbor by its bearing from the target relative to the target heading.
PartitionLabel assign_partition(
  const Vec2 & target_pos, double target_heading, const Vec2 & neighbor_pos, const ConceptionConfig & cfg);

/// Partitions of every neighbor that is not a member of `groups`.
PartitionAssignment assign_partitions(
  const PredictionInstance & inst, const GroupSet & groups, const ConceptionConfig & cfg);

/// Averaged distance, relative heading and window displacement per partition, computed
/// over neighbors outside the target's group. The rear partition keeps distance only.
///
/// A neighbor that never moves contributes a relative heading of 0.
ConceptionVector conception_vector(
  const PredictionInstance & inst, const GroupSet & groups, const ConceptionConfig & cfg);

}  // namespace gpcc

#endif  // GPCC__CONCEPTION_HPP_
