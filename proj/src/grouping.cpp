#include "gpcc/grouping.hpp"

#include "gpcc/error.hpp"

#include <cmath>

namespace gpcc
{

void GroupConfig::validate() const
{
  if (!(d_m > 0.0) || !std::isfinite(d_m)) {
    throw ConfigError("group.d_m", "must be a positive finite number");
  }
}

double long_term_distance(std::span<const Vec2> target, std::span<const Vec2> neighbor)
{
  if (target.size() != neighbor.size()) {
    throw ShapeError(
      "long_term_distance: track lengths differ (" + std::to_string(target.size()) + " vs " +
      std::to_string(neighbor.size()) + ")");
  }
  double sum = 0.0;
  for (std::size_t t = 0; t < target.size(); ++t) {
    sum += distance(neighbor[t], target[t]);
  }
  return sum;
}

int group_kernel(std::span<const Vec2> target, std::span<const Vec2> neighbor, const GroupConfig & cfg)
{
  return long_term_distance(target, neighbor) <= cfg.d_m ? 1 : 0;
}

GroupSet group_members(const PredictionInstance & inst, const GroupConfig & cfg)
{
  GroupSet out;
  out.target_id = inst.target_id;
  for (const auto & n : inst.neighbors) {
    const double dist = long_term_distance(inst.observed, n.track);
    out.per_neighbor_distance[n.agent_id] = dist;
    if (cfg.enabled && dist <= cfg.d_m) {
      out.member_ids.insert(n.agent_id);
    }
  }
  return out;
}

}  // namespace gpcc
