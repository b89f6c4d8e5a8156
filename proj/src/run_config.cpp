#include "gpcc/run_config.hpp"

#include "gpcc/config_json.hpp"
#include "gpcc/error.hpp"

#include <fstream>

namespace gpcc
{

using json_field::expect_object;
using json_field::join;
using json_field::read;

Preset parse_preset(std::string_view name)
{
  if (name == "eth-ucy") return Preset::EthUcy;
  if (name == "nba") return Preset::Nba;
  if (name == "nuscenes") return Preset::NuScenes;
  throw ConfigError("preset", "unknown preset '" + std::string(name) + "' (expected eth-ucy, nba or nuscenes)");
}

std::string_view to_string(Preset p)
{
  switch (p) {
    case Preset::EthUcy: return "eth-ucy";
    case Preset::Nba: return "nba";
    case Preset::NuScenes: return "nuscenes";
  }
  return "unknown";
}

PresetValues preset_values(Preset p)
{
  switch (p) {
    case Preset::EthUcy: return {WindowConfig{8, 12, 1}, 0.4};
    case Preset::Nba: return {WindowConfig{5, 10, 1}, 0.4};
    case Preset::NuScenes: return {WindowConfig{4, 12, 1}, 0.5};
  }
  throw ConfigError("preset", "unknown preset");
}

std::string DatasetSource::describe() const
{
  if (path) {
    return path->string();
  }
  if (synthetic) {
    return "synthetic:" + std::string(to_string(synthetic->kind)) + ":seed=" + std::to_string(synthetic->seed);
  }
  return "<empty>";
}

TrainOptions RunConfig::train_options() const
{
  TrainOptions o;
  o.epochs = epochs;
  o.batch_size = batch_size;
  o.seed = seed;
  o.adam = adam;
  return o;
}

namespace
{

std::filesystem::path resolve(const std::filesystem::path & base, const std::string & p)
{
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) {
    return base / path;
  }
  return path;
}

std::vector<DatasetSource> sources_from_json(
  const nlohmann::json & j, const std::string & path, const std::filesystem::path & base_dir)
{
  if (!j.is_array()) {
    throw ConfigError(path, "expected a list of dataset entries");
  }
  std::vector<DatasetSource> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string here = path + "[" + std::to_string(i) + "]";
    const auto & e = j[i];
    DatasetSource src;
    if (e.is_string()) {
      src.path = resolve(base_dir, e.get<std::string>());
    } else if (e.is_object()) {
      expect_object(e, here, {"synthetic", "agents", "frames", "seed", "scenes"});
      if (!e.contains("synthetic") || !e.at("synthetic").is_string()) {
        throw ConfigError(join(here, "synthetic"), "expected the name of a synthetic scene kind");
      }
      SynthSource s;
      try {
        s.kind = parse_synth_kind(e.at("synthetic").get<std::string>());
      } catch (const ConfigError & err) {
        throw ConfigError(join(here, "synthetic"), std::string(err.what()).substr(err.field().size() + 2));
      }
      read(e, here, "agents", s.agents);
      int frames = 0;
      if (e.contains("frames")) {
        read(e, here, "frames", frames);
        s.frames = frames;
        if (frames < 2) {
          throw ConfigError(join(here, "frames"), "must be at least 2");
        }
      }
      read(e, here, "seed", s.seed);
      read(e, here, "scenes", s.scenes);
      if (s.agents < 1) {
        throw ConfigError(join(here, "agents"), "must be at least 1");
      }
      if (s.scenes < 1) {
        throw ConfigError(join(here, "scenes"), "must be at least 1");
      }
      src.synthetic = s;
    } else {
      throw ConfigError(here, "expected a file path or a synthetic-scene object");
    }
    out.push_back(std::move(src));
  }
  return out;
}

}  // namespace

RunConfig run_config_from_json(const nlohmann::json & j, const std::filesystem::path & base_dir)
{
  expect_object(
    j, "",
    {"preset", "interval_seconds", "window", "group", "conception", "model", "datasets", "training", "checkpoint",
     "output_dir"});
  RunConfig cfg;
  std::string preset_name;
  read(j, "", "preset", preset_name);
  if (!preset_name.empty()) {
    cfg.preset = parse_preset(preset_name);
    const PresetValues pv = preset_values(*cfg.preset);
    cfg.gpcc.window = pv.window;
    cfg.interval_seconds = pv.interval_seconds;
  }
  if (j.contains("window")) {
    // Fields missing from the object keep the preset's values.
    nlohmann::json merged = cfg.gpcc.window;
    const auto & w = j.at("window");
    if (!w.is_object()) {
      throw ConfigError("window", "expected an object");
    }
    merged.update(w);
    cfg.gpcc.window = window_config_from_json(merged, "window");
  }
  cfg.gpcc.group.d_m = GroupConfig::default_threshold(cfg.gpcc.window.n_past);
  if (j.contains("group")) {
    nlohmann::json merged = cfg.gpcc.group;
    const auto & g = j.at("group");
    expect_object(g, "group", {"d_m", "enabled"});
    merged.update(g);
    cfg.gpcc.group = group_config_from_json(merged, "group");
  }
  if (j.contains("conception")) {
    cfg.gpcc.conception = conception_config_from_json(j.at("conception"), "conception");
  }
  if (j.contains("model")) {
    cfg.gpcc.model = model_config_from_json(j.at("model"), "model");
  }
  read(j, "", "interval_seconds", cfg.interval_seconds);
  if (!(cfg.interval_seconds > 0.0)) {
    throw ConfigError("interval_seconds", "must be positive");
  }

  if (j.contains("datasets")) {
    const auto & d = j.at("datasets");
    expect_object(d, "datasets", {"train", "test"});
    if (d.contains("train")) {
      cfg.train = sources_from_json(d.at("train"), "datasets.train", base_dir);
    }
    if (d.contains("test")) {
      cfg.test = sources_from_json(d.at("test"), "datasets.test", base_dir);
    }
  }

  if (j.contains("training")) {
    const auto & t = j.at("training");
    expect_object(t, "training", {"epochs", "batch_size", "seed", "adam"});
    read(t, "training", "epochs", cfg.epochs);
    int batch = static_cast<int>(cfg.batch_size);
    read(t, "training", "batch_size", batch);
    if (batch < 1) {
      throw ConfigError("training.batch_size", "must be at least 1");
    }
    cfg.batch_size = static_cast<std::size_t>(batch);
    read(t, "training", "seed", cfg.seed);
    if (t.contains("adam")) {
      cfg.adam = adam_config_from_json(t.at("adam"), "training.adam");
    }
    if (cfg.epochs < 0) {
      throw ConfigError("training.epochs", "must be non-negative");
    }
  }

  std::string text;
  read(j, "", "checkpoint", text);
  if (!text.empty()) {
    cfg.checkpoint = resolve(base_dir, text);
  } else {
    cfg.checkpoint = resolve(base_dir, cfg.checkpoint.string());
  }
  text.clear();
  read(j, "", "output_dir", text);
  cfg.output_dir = resolve(base_dir, text.empty() ? "." : text);
  cfg.gpcc.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw NotFoundError("config file not found: " + path.string());
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error & e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  return run_config_from_json(j, path.parent_path());
}

std::vector<Scene> load_sources(const std::vector<DatasetSource> & sources, const RunConfig & cfg)
{
  std::vector<Scene> scenes;
  for (const auto & src : sources) {
    if (src.path) {
      if (!std::filesystem::exists(*src.path)) {
        throw NotFoundError("dataset not found: " + src.path->string());
      }
      scenes.push_back(load_scene(*src.path, cfg.interval_seconds));
    } else if (src.synthetic) {
      const SynthSource & s = *src.synthetic;
      const int frames = s.frames.value_or(cfg.gpcc.window.total());
      for (int i = 0; i < s.scenes; ++i) {
        scenes.push_back(synth_scene(s.kind, s.agents, frames, s.seed + static_cast<std::uint64_t>(i), cfg.interval_seconds));
      }
    }
  }
  return scenes;
}

std::vector<PredictionInstance> window_scenes(const std::vector<Scene> & scenes, const WindowConfig & window)
{
  std::vector<PredictionInstance> out;
  for (const auto & s : scenes) {
    auto w = sample_windows(s, window);
    out.insert(out.end(), std::make_move_iterator(w.begin()), std::make_move_iterator(w.end()));
  }
  return out;
}

nlohmann::json to_json(const RunConfig & cfg)
{
  nlohmann::json j;
  if (cfg.preset) {
    j["preset"] = std::string(to_string(*cfg.preset));
  }
  j["interval_seconds"] = cfg.interval_seconds;
  j["window"] = cfg.gpcc.window;
  j["group"] = cfg.gpcc.group;
  j["conception"] = cfg.gpcc.conception;
  j["model"] = cfg.gpcc.model;
  auto sources = [](const std::vector<DatasetSource> & list) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto & s : list) {
      if (s.path) {
        a.push_back(s.path->string());
      } else if (s.synthetic) {
        nlohmann::json o = {
          {"synthetic", std::string(to_string(s.synthetic->kind))},
          {"agents", s.synthetic->agents},
          {"seed", s.synthetic->seed},
          {"scenes", s.synthetic->scenes}};
        if (s.synthetic->frames) {
          o["frames"] = *s.synthetic->frames;
        }
        a.push_back(o);
      }
    }
    return a;
  };
  j["datasets"] = {{"train", sources(cfg.train)}, {"test", sources(cfg.test)}};
  j["training"] = {
    {"epochs", cfg.epochs},
    {"batch_size", cfg.batch_size},
    {"seed", cfg.seed},
    {"adam",
     {{"learning_rate", cfg.adam.learning_rate},
      {"beta1", cfg.adam.beta1},
      {"beta2", cfg.adam.beta2},
      {"epsilon", cfg.adam.epsilon}}}};
  j["checkpoint"] = cfg.checkpoint.string();
  j["output_dir"] = cfg.output_dir.string();
  return j;
}

}  // namespace gpcc
