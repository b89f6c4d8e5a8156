#include "gpcc/conception.hpp"

#include "gpcc/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace gpcc
{

void ConceptionConfig::validate() const
{
  if (!(fov_degrees > 0.0) || fov_degrees > 360.0) {
    throw ConfigError("conception.fov_degrees", "must be in (0, 360]");
  }
}

std::string_view to_string(Partition p)
{
  switch (p) {
    case Partition::Right: return "right";
    case Partition::Left: return "left";
    case Partition::Rear: return "rear";
  }
  return "unknown";
}

std::optional<double> try_moving_direction(std::span<const Vec2> track)
{
  if (track.size() < 2) {
    throw ShapeError("moving_direction needs at least 2 positions");
  }
  for (std::size_t t = track.size() - 1; t > 0; --t) {
    const Vec2 step = track[t] - track[t - 1];
    if (step.x != 0.0 || step.y != 0.0) {
      return wrap_angle(std::atan2(step.y, step.x));
    }
  }
  return std::nullopt;
}

double moving_direction(std::span<const Vec2> track) { return try_moving_direction(track).value_or(0.0); }

PartitionLabel assign_partition(
  const Vec2 & target_pos, double target_heading, const Vec2 & neighbor_pos, const ConceptionConfig & cfg)
{
  const Vec2 rel = neighbor_pos - target_pos;
  if (rel.x == 0.0 && rel.y == 0.0) {
    return {Partition::Rear, 0.0};
  }
  const double phi = wrap_angle(std::atan2(rel.y, rel.x) - target_heading);
  if (std::abs(phi) <= 0.5 * cfg.fov_radians()) {
    return {phi > 0.0 ? Partition::Left : Partition::Right, phi};
  }
  return {Partition::Rear, phi};
}

PartitionAssignment assign_partitions(
  const PredictionInstance & inst, const GroupSet & groups, const ConceptionConfig & cfg)
{
  PartitionAssignment out;
  if (inst.observed.empty()) {
    return out;
  }
  const double heading = moving_direction(inst.observed);
  const Vec2 & here = inst.observed.back();
  for (const auto & n : inst.neighbors) {
    if (!groups.contains(n.agent_id) && !n.track.empty()) {
      out.labels[n.agent_id] = assign_partition(here, heading, n.track.back(), cfg);
    }
  }
  return out;
}

namespace
{

struct Contribution
{
  double dis;
  double dir;
  double vel;

  friend bool operator<(const Contribution & a, const Contribution & b)
  {
    if (a.dis != b.dis) return a.dis < b.dis;
    if (a.dir != b.dir) return a.dir < b.dir;
    return a.vel < b.vel;
  }
};

}  // namespace

ConceptionVector conception_vector(
  const PredictionInstance & inst, const GroupSet & groups, const ConceptionConfig & cfg)
{
  ConceptionVector out;
  if (!cfg.enabled) {
    return out;
  }
  const double heading = moving_direction(inst.observed);
  const Vec2 & here = inst.observed.back();

  std::array<std::vector<Contribution>, 3> parts;
  for (const auto & n : inst.neighbors) {
    if (groups.contains(n.agent_id)) {
      continue;
    }
    if (n.track.size() != inst.observed.size()) {
      throw ShapeError("neighbor '" + n.agent_id + "' track length differs from the observation window");
    }
    const auto label = assign_partition(here, heading, n.track.back(), cfg);
    const auto own_heading = try_moving_direction(n.track);
    Contribution c{};
    c.dis = distance(n.track.back(), here);
    c.dir = own_heading ? std::abs(wrap_angle(*own_heading - heading)) : 0.0;
    c.vel = distance(n.track.front(), n.track.back());
    parts[static_cast<std::size_t>(label.partition)].push_back(c);
  }

  // Summation runs in sorted order so the result does not depend on neighbor order.
  for (std::size_t p = 0; p < 3; ++p) {
    auto & v = parts[p];
    out.counts[p] = static_cast<int>(v.size());
    if (v.empty()) {
      continue;
    }
    std::sort(v.begin(), v.end());
    Contribution sum{0.0, 0.0, 0.0};
    for (const auto & c : v) {
      sum.dis += c.dis;
      sum.dir += c.dir;
      sum.vel += c.vel;
    }
    const double n = static_cast<double>(v.size());
    if (p == static_cast<std::size_t>(Partition::Rear)) {
      out.values[6] = sum.dis / n;
    } else {
      out.values[p * 3 + 0] = sum.dis / n;
      out.values[p * 3 + 1] = sum.dir / n;
      out.values[p * 3 + 2] = sum.vel / n;
    }
  }
  return out;
}

}  // namespace gpcc
