#ifndef GPCC__RUN_CONFIG_HPP_
#define GPCC__RUN_CONFIG_HPP_

#include "gpcc/model.hpp"
#include "gpcc/nn/optim.hpp"
#include "gpcc/scene.hpp"
#include "gpcc/train.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace gpcc
{

enum class Preset { EthUcy, Nba, NuScenes };

Preset parse_preset(std::string_view name);
std::string_view to_string(Preset p);

struct PresetValues
{
  WindowConfig window;
  double interval_seconds;
};

/// eth-ucy: 8/12 at 0.4 s; nba: 5/10 at 0.4 s; nuscenes: 4/12 at 0.5 s.
PresetValues preset_values(Preset p);

struct SynthSource
{
  SynthKind kind{SynthKind::ConstantVelocity};
  int agents{5};
  /// Defaults to the window length.
  std::optional<int> frames;
  std::uint64_t seed{1};
  /// Scenes generated with seeds seed, seed+1, ...
  int scenes{1};
};

/// One dataset entry: a frame-table file or a synthetic generator.
struct DatasetSource
{
  std::optional<std::filesystem::path> path;
  std::optional<SynthSource> synthetic;

  std::string describe() const;
};

struct RunConfig
{
  std::optional<Preset> preset;
  double interval_seconds{0.4};
  GpccConfig gpcc{};
  std::vector<DatasetSource> train;
  std::vector<DatasetSource> test;
  int epochs{200};
  std::size_t batch_size{1000};
  std::uint64_t seed{1};
  nn::AdamConfig adam{};
  std::filesystem::path checkpoint{"gpcc.ckpt"};
  std::filesystem::path output_dir{"."};

  TrainOptions train_options() const;
};

/// Parses a run configuration. Relative paths resolve against `base_dir`. A preset sets the
/// window, the sampling interval and the default grouping threshold; explicit fields override it.
/// Throws ConfigError naming the offending field.
RunConfig run_config_from_json(const nlohmann::json & j, const std::filesystem::path & base_dir = {});

/// Reads a JSON run configuration file. Throws NotFoundError when missing, ConfigError when invalid.
RunConfig load_run_config(const std::filesystem::path & path);

/// Loads or generates the scenes of every source. Throws NotFoundError naming a missing file.
std::vector<Scene> load_sources(const std::vector<DatasetSource> & sources, const RunConfig & cfg);

/// Windows every scene; instance order follows scene order.
std::vector<PredictionInstance> window_scenes(const std::vector<Scene> & scenes, const WindowConfig & window);

nlohmann::json to_json(const RunConfig & cfg);

}  // namespace gpcc

#endif  // GPCC__RUN_CONFIG_HPP_
