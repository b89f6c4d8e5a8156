#ifndef GPCC__SCENE_HPP_
#define GPCC__SCENE_HPP_

#include "gpcc/geometry.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gpcc
{

using FrameId = std::int64_t;

struct TrackPoint
{
  FrameId frame{0};
  Vec2 position{};
};

/// Time-stamped positions of one agent, frame-sorted.
struct AgentTrack
{
  std::string agent_id;
  std::vector<TrackPoint> points;

  /// Position at `frame`, if the agent was recorded there.
  std::optional<Vec2> at(FrameId frame) const;
};

/// One recording: the union of frame ids plus every agent's track.
struct Scene
{
  std::string id;
  std::vector<FrameId> frames;
  std::map<std::string, AgentTrack> tracks;
  double interval_seconds{0.4};

  /// Throws gpcc::Error when an invariant is broken.
  void validate() const;
};

struct WindowConfig
{
  int n_past{8};
  int n_future{12};
  int stride{1};

  void validate() const;
  int total() const noexcept { return n_past + n_future; }
};

struct NeighborTrack
{
  std::string agent_id;
  Track track;
};

/// One target agent's observation window with its co-present neighbors.
struct PredictionInstance
{
  std::string scene_id;
  FrameId start_frame{0};
  std::string target_id;
  Track observed;
  std::vector<NeighborTrack> neighbors;
  std::optional<Track> future_truth;
  /// Translation already added to every position of this instance.
  Vec2 origin_offset{};

  const NeighborTrack * find_neighbor(std::string_view id) const;
};

enum class SceneFormat { FrameTable };

/// Reads the whitespace `frame_id agent_id x y` table. Lines starting with '#' are skipped.
Scene load_scene(
  const std::filesystem::path & path, double interval_seconds = 0.4,
  SceneFormat format = SceneFormat::FrameTable);
Scene parse_scene(std::istream & in, std::string scene_id, double interval_seconds = 0.4);

/// Writes the frame table, ordered by frame then agent, with `precision` significant digits.
void save_scene(const Scene & scene, const std::filesystem::path & path, int precision = 9);
void write_scene(const Scene & scene, std::ostream & out, int precision = 9);

/// Builds a scene from already-grouped tracks; frames become the union of track frames.
Scene make_scene(std::string id, std::vector<AgentTrack> tracks, double interval_seconds = 0.4);

/// All windows where the target is present on `cfg.total()` consecutive scene frames.
/// Output is ordered by agent id, then window start. Instances are not normalized.
std::vector<PredictionInstance> sample_windows(const Scene & scene, const WindowConfig & cfg);

/// Single window for `target_id` starting at scene frame `start_frame`. The future is
/// filled only when the target is present on all future frames. Throws NotFoundError.
PredictionInstance extract_instance(
  const Scene & scene, const std::string & target_id, FrameId start_frame,
  const WindowConfig & cfg);

/// Translates every position so the target's last observed point is the origin.
PredictionInstance normalize_instance(const PredictionInstance & inst);
/// Removes the recorded translation.
PredictionInstance denormalize_instance(const PredictionInstance & inst);

/// Moves trajectories from the instance's normalized frame back into scene coordinates.
Track to_scene_frame(const Track & t, const Vec2 & origin_offset);

enum class SynthKind { ConstantVelocity, GroupPair, Crossing, StationaryCrowd, GroupTurn };

SynthKind parse_synth_kind(std::string_view name);
std::string_view to_string(SynthKind kind);

/// Deterministic synthetic scene. Agent ids are "0".."n_agents-1"; frames are 0..n_frames-1.
///
/// group-pair and group-turn pair agents (2k, 2k+1). In group-turn the leader 2k turns at
/// frame round(0.25 * n_frames) and the follower 2k+1 makes the same turn at frame
/// round(0.4 * n_frames).
Scene synth_scene(
  SynthKind kind, int n_agents, int n_frames, std::uint64_t seed, double interval_seconds = 0.4);

}  // namespace gpcc

#endif  // GPCC__SCENE_HPP_
