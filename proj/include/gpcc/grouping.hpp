#ifndef GPCC__GROUPING_HPP_
#define GPCC__GROUPING_HPP_

#include "gpcc/geometry.hpp"
#include "gpcc/scene.hpp"

#include <map>
#include <set>
#include <span>
#include <string>

namespace gpcc
{

struct GroupConfig
{
  /// Threshold on the summed per-frame distance over the observed window.
  double d_m{20.0};
  bool enabled{true};

  void validate() const;

  /// Default threshold for an observation length: 20 units at 8 frames, scaled linearly.
  static double default_threshold(int n_past) noexcept { return 20.0 * n_past / 8.0; }
};

struct GroupSet
{
  std::string target_id;
  std::set<std::string> member_ids;
  /// Long-term distance of every neighbor, members or not.
  std::map<std::string, double> per_neighbor_distance;

  bool contains(const std::string & id) const { return member_ids.count(id) != 0; }
};

/// Sum over frames of the distance between the two tracks. Throws ShapeError on length mismatch.
double long_term_distance(std::span<const Vec2> target, std::span<const Vec2> neighbor);

/// 1 when the long-term distance is at most `cfg.d_m` (inclusive), else 0.
int group_kernel(std::span<const Vec2> target, std::span<const Vec2> neighbor, const GroupConfig & cfg);

/// Target-centric group. Empty when grouping is disabled; distances are still reported.
GroupSet group_members(const PredictionInstance & inst, const GroupConfig & cfg);

}  // namespace gpcc

#endif  // GPCC__GROUPING_HPP_
