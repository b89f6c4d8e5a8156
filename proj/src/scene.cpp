#include "gpcc/scene.hpp"

#include "gpcc/error.hpp"
#include "gpcc/random.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <set>
#include <sstream>

namespace gpcc
{
namespace
{

bool parse_double(std::string_view token, double & out)
{
  const char * first = token.data();
  const char * last = token.data() + token.size();
  if (first != last && *first == '+') {
    ++first;
  }
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && std::isfinite(out);
}

std::vector<std::string_view> split_ws(std::string_view line)
{
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
    }
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
    }
    if (i > start) {
      out.push_back(line.substr(start, i - start));
    }
  }
  return out;
}

// Integral ids are canonicalised so "1", "1.0" and "1.000e+00" name the same agent.
std::string canonical_agent_id(std::string_view token, double value)
{
  if (std::trunc(value) == value && std::abs(value) < 9.0e15) {
    return std::to_string(static_cast<std::int64_t>(value));
  }
  return std::string(token);
}

// Index of each scene frame inside the track's points, or -1 when absent.
std::vector<int> presence_index(const Scene & scene, const AgentTrack & track)
{
  std::vector<int> idx(scene.frames.size(), -1);
  std::size_t f = 0;
  for (std::size_t p = 0; p < track.points.size(); ++p) {
    while (f < scene.frames.size() && scene.frames[f] < track.points[p].frame) {
      ++f;
    }
    if (f < scene.frames.size() && scene.frames[f] == track.points[p].frame) {
      idx[f] = static_cast<int>(p);
    }
  }
  return idx;
}

// prefix[i] = number of present frames among the first i scene frames.
std::vector<int> presence_prefix(const std::vector<int> & idx)
{
  std::vector<int> prefix(idx.size() + 1, 0);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    prefix[i + 1] = prefix[i] + (idx[i] >= 0 ? 1 : 0);
  }
  return prefix;
}

bool present_on(const std::vector<int> & prefix, std::size_t begin, std::size_t count)
{
  return prefix[begin + count] - prefix[begin] == static_cast<int>(count);
}

Track slice(const AgentTrack & track, const std::vector<int> & idx, std::size_t begin, std::size_t count)
{
  Track out;
  out.reserve(count);
  for (std::size_t i = begin; i < begin + count; ++i) {
    out.push_back(track.points[static_cast<std::size_t>(idx[i])].position);
  }
  return out;
}

void translate(Track & t, const Vec2 & by)
{
  for (auto & p : t) {
    p += by;
  }
}

}  // namespace

std::optional<Vec2> AgentTrack::at(FrameId frame) const
{
  const auto it = std::lower_bound(
    points.begin(), points.end(), frame,
    [](const TrackPoint & p, FrameId f) { return p.frame < f; });
  if (it == points.end() || it->frame != frame) {
    return std::nullopt;
  }
  return it->position;
}

void Scene::validate() const
{
  if (tracks.empty()) {
    throw EmptySceneError("scene '" + id + "' has no tracks");
  }
  if (!(interval_seconds > 0.0)) {
    throw Error("scene '" + id + "': interval_seconds must be positive");
  }
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (frames[i] <= frames[i - 1]) {
      throw Error("scene '" + id + "': frame ids are not strictly increasing");
    }
  }
  for (const auto & [aid, track] : tracks) {
    if (aid != track.agent_id) {
      throw Error("scene '" + id + "': track key '" + aid + "' does not match agent id");
    }
    for (std::size_t i = 0; i < track.points.size(); ++i) {
      const auto & p = track.points[i];
      if (i > 0 && p.frame <= track.points[i - 1].frame) {
        throw Error("agent '" + aid + "': frame ids are not strictly increasing");
      }
      if (!std::isfinite(p.position.x) || !std::isfinite(p.position.y)) {
        throw Error("agent '" + aid + "': non-finite position");
      }
      if (!std::binary_search(frames.begin(), frames.end(), p.frame)) {
        throw Error("agent '" + aid + "': frame " + std::to_string(p.frame) + " missing from scene");
      }
    }
  }
}

void WindowConfig::validate() const
{
  if (n_past < 2) {
    throw ConfigError("window.n_past", "must be at least 2");
  }
  if (n_future < 1) {
    throw ConfigError("window.n_future", "must be at least 1");
  }
  if (stride < 1) {
    throw ConfigError("window.stride", "must be at least 1");
  }
}

const NeighborTrack * PredictionInstance::find_neighbor(std::string_view id) const
{
  for (const auto & n : neighbors) {
    if (n.agent_id == id) {
      return &n;
    }
  }
  return nullptr;
}

Scene parse_scene(std::istream & in, std::string scene_id, double interval_seconds)
{
  std::map<std::string, AgentTrack> tracks;
  std::map<std::string, std::size_t> first_line;
  std::set<FrameId> frames;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_ws(line);
    if (fields.empty() || fields.front().front() == '#') {
      continue;
    }
    if (fields.size() != 4) {
      throw ParseError("expected 4 fields 'frame_id agent_id x y', got " + std::to_string(fields.size()), line_no);
    }
    double values[4];
    static constexpr const char * names[4] = {"frame_id", "agent_id", "x", "y"};
    for (int i = 0; i < 4; ++i) {
      if (!parse_double(fields[static_cast<std::size_t>(i)], values[i])) {
        throw ParseError(
          std::string("field ") + names[i] + " is not a number: '" +
            std::string(fields[static_cast<std::size_t>(i)]) + "'",
          line_no);
      }
    }
    if (std::trunc(values[0]) != values[0]) {
      throw ParseError("frame_id must be an integer", line_no);
    }
    const auto frame = static_cast<FrameId>(values[0]);
    const std::string aid = canonical_agent_id(fields[1], values[1]);
    auto & track = tracks[aid];
    track.agent_id = aid;
    track.points.push_back({frame, {values[2], values[3]}});
    first_line.try_emplace(aid, line_no);
    frames.insert(frame);
  }
  if (tracks.empty()) {
    throw EmptySceneError("scene '" + scene_id + "' contains no records");
  }
  for (auto & [aid, track] : tracks) {
    std::stable_sort(track.points.begin(), track.points.end(), [](const auto & a, const auto & b) {
      return a.frame < b.frame;
    });
    for (std::size_t i = 1; i < track.points.size(); ++i) {
      if (track.points[i].frame == track.points[i - 1].frame) {
        throw ParseError(
          "agent " + aid + " has two records for frame " + std::to_string(track.points[i].frame),
          first_line[aid]);
      }
    }
  }
  Scene scene;
  scene.id = std::move(scene_id);
  scene.frames.assign(frames.begin(), frames.end());
  scene.tracks = std::move(tracks);
  scene.interval_seconds = interval_seconds;
  scene.validate();
  return scene;
}

Scene load_scene(const std::filesystem::path & path, double interval_seconds, SceneFormat format)
{
  if (format != SceneFormat::FrameTable) {
    throw Error("unsupported scene format");
  }
  std::ifstream in(path);
  if (!in) {
    throw NotFoundError("cannot open scene file: " + path.string());
  }
  return parse_scene(in, path.stem().string(), interval_seconds);
}

void write_scene(const Scene & scene, std::ostream & out, int precision)
{
  // Row order: frame, then agent id.
  std::vector<std::pair<FrameId, std::pair<const std::string *, Vec2>>> rows;
  for (const auto & [aid, track] : scene.tracks) {
    for (const auto & p : track.points) {
      rows.push_back({p.frame, {&aid, p.position}});
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto & a, const auto & b) {
    return a.first < b.first;
  });
  out << std::setprecision(precision);
  for (const auto & [frame, rest] : rows) {
    out << frame << ' ' << *rest.first << ' ' << rest.second.x << ' ' << rest.second.y << '\n';
  }
}

void save_scene(const Scene & scene, const std::filesystem::path & path, int precision)
{
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot write scene file: " + path.string());
  }
  write_scene(scene, out, precision);
}

Scene make_scene(std::string id, std::vector<AgentTrack> tracks, double interval_seconds)
{
  Scene scene;
  scene.id = std::move(id);
  scene.interval_seconds = interval_seconds;
  std::set<FrameId> frames;
  for (auto & t : tracks) {
    for (const auto & p : t.points) {
      frames.insert(p.frame);
    }
    const std::string key = t.agent_id;
    scene.tracks.emplace(key, std::move(t));
  }
  scene.frames.assign(frames.begin(), frames.end());
  scene.validate();
  return scene;
}

std::vector<PredictionInstance> sample_windows(const Scene & scene, const WindowConfig & cfg)
{
  cfg.validate();
  const std::size_t n_frames = scene.frames.size();
  const auto total = static_cast<std::size_t>(cfg.total());
  const auto n_past = static_cast<std::size_t>(cfg.n_past);
  const auto n_future = static_cast<std::size_t>(cfg.n_future);

  std::vector<const AgentTrack *> agents;
  for (const auto & [aid, track] : scene.tracks) {
    agents.push_back(&track);
  }
  std::vector<std::vector<int>> index(agents.size());
  std::vector<std::vector<int>> prefix(agents.size());
  for (std::size_t a = 0; a < agents.size(); ++a) {
    index[a] = presence_index(scene, *agents[a]);
    prefix[a] = presence_prefix(index[a]);
  }

  std::vector<std::vector<PredictionInstance>> per_agent(agents.size());
  const auto n_agents = static_cast<std::ptrdiff_t>(agents.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t ai = 0; ai < n_agents; ++ai) {
    const auto a = static_cast<std::size_t>(ai);
    for (std::size_t s = 0; s + total <= n_frames; s += static_cast<std::size_t>(cfg.stride)) {
      if (!present_on(prefix[a], s, total)) {
        continue;
      }
      PredictionInstance inst;
      inst.scene_id = scene.id;
      inst.start_frame = scene.frames[s];
      inst.target_id = agents[a]->agent_id;
      inst.observed = slice(*agents[a], index[a], s, n_past);
      inst.future_truth = slice(*agents[a], index[a], s + n_past, n_future);
      for (std::size_t b = 0; b < agents.size(); ++b) {
        if (b != a && present_on(prefix[b], s, n_past)) {
          inst.neighbors.push_back({agents[b]->agent_id, slice(*agents[b], index[b], s, n_past)});
        }
      }
      per_agent[a].push_back(std::move(inst));
    }
  }

  std::vector<PredictionInstance> out;
  for (auto & v : per_agent) {
    std::move(v.begin(), v.end(), std::back_inserter(out));
  }
  return out;
}

PredictionInstance extract_instance(
  const Scene & scene, const std::string & target_id, FrameId start_frame, const WindowConfig & cfg)
{
  cfg.validate();
  const auto target_it = scene.tracks.find(target_id);
  if (target_it == scene.tracks.end()) {
    throw NotFoundError("unknown target '" + target_id + "' in scene '" + scene.id + "'");
  }
  const auto frame_it = std::lower_bound(scene.frames.begin(), scene.frames.end(), start_frame);
  if (frame_it == scene.frames.end() || *frame_it != start_frame) {
    throw NotFoundError("frame " + std::to_string(start_frame) + " not in scene '" + scene.id + "'");
  }
  const auto s = static_cast<std::size_t>(frame_it - scene.frames.begin());
  const auto n_past = static_cast<std::size_t>(cfg.n_past);
  const auto n_future = static_cast<std::size_t>(cfg.n_future);
  if (s + n_past > scene.frames.size()) {
    throw NotFoundError("observation window starting at frame " + std::to_string(start_frame) + " runs past the scene end");
  }
  const auto t_index = presence_index(scene, target_it->second);
  const auto t_prefix = presence_prefix(t_index);
  if (!present_on(t_prefix, s, n_past)) {
    throw NotFoundError(
      "target '" + target_id + "' is not present on all observed frames from " + std::to_string(start_frame));
  }
  PredictionInstance inst;
  inst.scene_id = scene.id;
  inst.start_frame = start_frame;
  inst.target_id = target_id;
  inst.observed = slice(target_it->second, t_index, s, n_past);
  if (s + n_past + n_future <= scene.frames.size() && present_on(t_prefix, s + n_past, n_future)) {
    inst.future_truth = slice(target_it->second, t_index, s + n_past, n_future);
  }
  for (const auto & [aid, track] : scene.tracks) {
    if (aid == target_id) {
      continue;
    }
    const auto idx = presence_index(scene, track);
    if (present_on(presence_prefix(idx), s, n_past)) {
      inst.neighbors.push_back({aid, slice(track, idx, s, n_past)});
    }
  }
  return inst;
}

PredictionInstance normalize_instance(const PredictionInstance & inst)
{
  if (inst.observed.empty()) {
    throw ShapeError("cannot normalize an instance without observations");
  }
  PredictionInstance out = inst;
  const Vec2 shift = -inst.observed.back();
  translate(out.observed, shift);
  for (auto & n : out.neighbors) {
    translate(n.track, shift);
  }
  if (out.future_truth) {
    translate(*out.future_truth, shift);
  }
  out.origin_offset = inst.origin_offset + shift;
  return out;
}

PredictionInstance denormalize_instance(const PredictionInstance & inst)
{
  PredictionInstance out = inst;
  const Vec2 shift = -inst.origin_offset;
  translate(out.observed, shift);
  for (auto & n : out.neighbors) {
    translate(n.track, shift);
  }
  if (out.future_truth) {
    translate(*out.future_truth, shift);
  }
  out.origin_offset = {};
  return out;
}

Track to_scene_frame(const Track & t, const Vec2 & origin_offset)
{
  Track out = t;
  translate(out, -origin_offset);
  return out;
}

SynthKind parse_synth_kind(std::string_view name)
{
  if (name == "constant-velocity") return SynthKind::ConstantVelocity;
  if (name == "group-pair") return SynthKind::GroupPair;
  if (name == "crossing") return SynthKind::Crossing;
  if (name == "stationary-crowd") return SynthKind::StationaryCrowd;
  if (name == "group-turn") return SynthKind::GroupTurn;
  throw ConfigError("synthetic", "unknown synthetic scene kind '" + std::string(name) + "'");
}

std::string_view to_string(SynthKind kind)
{
  switch (kind) {
    case SynthKind::ConstantVelocity: return "constant-velocity";
    case SynthKind::GroupPair: return "group-pair";
    case SynthKind::Crossing: return "crossing";
    case SynthKind::StationaryCrowd: return "stationary-crowd";
    case SynthKind::GroupTurn: return "group-turn";
  }
  return "unknown";
}

namespace
{

Vec2 heading_vector(double heading) { return {std::cos(heading), std::sin(heading)}; }

AgentTrack straight_walker(std::string id, Vec2 start, Vec2 velocity, int n_frames)
{
  AgentTrack t;
  t.agent_id = std::move(id);
  for (int f = 0; f < n_frames; ++f) {
    t.points.push_back({f, start + static_cast<double>(f) * velocity});
  }
  return t;
}

}  // namespace

Scene synth_scene(SynthKind kind, int n_agents, int n_frames, std::uint64_t seed, double interval_seconds)
{
  if (n_agents < 1) {
    throw ConfigError("n_agents", "must be at least 1");
  }
  if (n_frames < 2) {
    throw ConfigError("n_frames", "must be at least 2");
  }
  constexpr double pi = std::numbers::pi;
  Rng rng(seed);
  std::vector<AgentTrack> tracks;
  const auto id = [](int i) { return std::to_string(i); };

  switch (kind) {
    case SynthKind::ConstantVelocity:
      for (int i = 0; i < n_agents; ++i) {
        const Vec2 start{rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)};
        const double heading = rng.uniform(-pi, pi);
        const double speed = rng.uniform(0.3, 0.8);
        tracks.push_back(straight_walker(id(i), start, speed * heading_vector(heading), n_frames));
      }
      break;

    case SynthKind::GroupPair:
    case SynthKind::GroupTurn: {
      const bool turning = kind == SynthKind::GroupTurn;
      const int leader_turn = static_cast<int>(std::lround(0.25 * n_frames));
      const int follower_turn = static_cast<int>(std::lround(0.4 * n_frames));
      for (int p = 0; p + 1 < n_agents; p += 2) {
        const Vec2 center{rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)};
        const double heading = rng.uniform(-pi, pi);
        const double speed = rng.uniform(0.3, 0.8);
        const double lateral = rng.uniform(0.4, 0.8);
        const double side = rng.uniform() < 0.5 ? 1.0 : -1.0;
        const double turn = (rng.uniform() < 0.5 ? 1.0 : -1.0) * rng.uniform(pi / 6.0, pi / 3.0);
        const Vec2 normal{-std::sin(heading), std::cos(heading)};
        const Vec2 starts[2] = {center + (0.5 * lateral * side) * normal, center - (0.5 * lateral * side) * normal};
        const int turn_at[2] = {leader_turn, follower_turn};
        for (int m = 0; m < 2; ++m) {
          AgentTrack t;
          t.agent_id = id(p + m);
          Vec2 pos = starts[m];
          Vec2 walk = pos;
          for (int f = 0; f < n_frames; ++f) {
            if (f > 0) {
              const double h = heading + (turning && f >= turn_at[m] ? turn : 0.0);
              walk += speed * heading_vector(h);
            }
            pos = walk;
            if (!turning) {
              pos += Vec2{rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05)};
            }
            t.points.push_back({f, pos});
          }
          tracks.push_back(std::move(t));
        }
      }
      if (n_agents % 2 == 1) {
        const Vec2 start{rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)};
        const double heading = rng.uniform(-pi, pi);
        tracks.push_back(
          straight_walker(id(n_agents - 1), start, rng.uniform(0.3, 0.8) * heading_vector(heading), n_frames));
      }
      break;
    }

    case SynthKind::Crossing:
      for (int i = 0; i < n_agents; ++i) {
        const bool eastbound = i % 2 == 0;
        const double along = rng.uniform(-12.0, -8.0);
        const double across = rng.uniform(-3.0, 3.0);
        const Vec2 start = eastbound ? Vec2{along, across} : Vec2{across, along};
        const double heading = (eastbound ? 0.0 : pi / 2.0) + rng.uniform(-0.1, 0.1);
        tracks.push_back(
          straight_walker(id(i), start, rng.uniform(0.4, 0.8) * heading_vector(heading), n_frames));
      }
      break;

    case SynthKind::StationaryCrowd:
      for (int i = 0; i < n_agents; ++i) {
        const Vec2 base{rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)};
        AgentTrack t;
        t.agent_id = id(i);
        for (int f = 0; f < n_frames; ++f) {
          t.points.push_back({f, base + Vec2{rng.uniform(-0.02, 0.02), rng.uniform(-0.02, 0.02)}});
        }
        tracks.push_back(std::move(t));
      }
      break;
  }

  std::string scene_id = std::string(to_string(kind)) + "-" + std::to_string(seed);
  return make_scene(std::move(scene_id), std::move(tracks), interval_seconds);
}

}  // namespace gpcc
