// gpcc command-line front end.

#include "gpcc/error.hpp"
#include "gpcc/evaluation.hpp"
#include "gpcc/nn/kernels.hpp"
#include "gpcc/run_config.hpp"
#include "gpcc/service.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace gpcc;

namespace
{

constexpr int kUsageError = 2;

struct Common
{
  std::string config;
  std::string checkpoint;
  int threads{0};
  std::string split{"test"};
};

RunConfig load_config(const Common & c)
{
  RunConfig cfg = load_run_config(c.config);
  if (!c.checkpoint.empty()) {
    cfg.checkpoint = c.checkpoint;
  }
  return cfg;
}

std::vector<PredictionInstance> split_instances(const RunConfig & cfg, const std::string & split)
{
  const auto & sources = split == "train" ? cfg.train : cfg.test;
  if (sources.empty()) {
    throw ConfigError("datasets." + split, "no dataset entries");
  }
  auto inst = window_scenes(load_sources(sources, cfg), cfg.gpcc.window);
  if (inst.empty()) {
    throw Error("datasets." + split + " produced no prediction windows");
  }
  return inst;
}

GpccModel load_model(const RunConfig & cfg)
{
  if (!fs::exists(cfg.checkpoint)) {
    throw NotFoundError("checkpoint not found: " + cfg.checkpoint.string() + " (run 'gpcc train' first)");
  }
  return GpccModel::load(cfg.checkpoint, cfg.gpcc);
}

fs::path output_path(const RunConfig & cfg, const std::string & name)
{
  fs::create_directories(cfg.output_dir);
  return cfg.output_dir / name;
}

void print_metrics_header(std::ostream & out)
{
  out << std::left << std::setw(10) << "split" << std::setw(12) << "instances" << std::setw(6) << "K" << std::setw(14)
      << "min_ade" << "min_fde\n";
}

void print_metrics(std::ostream & out, const std::string & label, const MetricReport & r)
{
  out << std::left << std::setw(10) << label << std::setw(12) << r.count() << std::setw(6) << r.k << std::setw(14)
      << std::setprecision(6) << r.min_ade << r.min_fde << "\n";
}

int cmd_train(const Common & c)
{
  const RunConfig cfg = load_config(c);
  const auto train_set = split_instances(cfg, "train");
  std::cerr << "training on " << train_set.size() << " instances\n";
  TrainOptions options = cfg.train_options();
  std::ofstream log(output_path(cfg, "train_log.csv"));
  log << "epoch,train_loss,seconds\n";
  options.on_epoch = [&](const EpochStats & s, const GpccModel &) {
    log << s.epoch << "," << std::setprecision(10) << s.train_loss << "," << s.seconds << "\n" << std::flush;
    std::cout << "epoch " << s.epoch << " loss " << std::setprecision(6) << s.train_loss << " (" << s.seconds
              << " s)\n" << std::flush;
  };
  const TrainResult result = train(train_set, cfg.gpcc, options);
  if (cfg.checkpoint.has_parent_path()) {
    fs::create_directories(cfg.checkpoint.parent_path());
  }
  result.model.save(cfg.checkpoint);
  std::cout << "checkpoint written to " << cfg.checkpoint.string() << "\n";
  return 0;
}

int cmd_eval(const Common & c)
{
  const RunConfig cfg = load_config(c);
  const GpccModel model = load_model(cfg);
  print_metrics_header(std::cout);
  for (const std::string split : {"train", "test"}) {
    const auto & sources = split == "train" ? cfg.train : cfg.test;
    if (sources.empty()) {
      continue;
    }
    print_metrics(std::cout, split, evaluate(model, split_instances(cfg, split)));
  }
  return 0;
}

int cmd_predict(const Common & c, const std::string & out_name)
{
  const RunConfig cfg = load_config(c);
  const GpccModel model = load_model(cfg);
  const auto instances = split_instances(cfg, c.split);
  const fs::path path = out_name.empty() ? output_path(cfg, "predictions.jsonl") : fs::path(out_name);
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot write " + path.string());
  }
  const auto preds = model.predict(instances);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    nlohmann::json j;
    j["scene_id"] = instances[i].scene_id;
    j["target_id"] = instances[i].target_id;
    j["start_frame"] = instances[i].start_frame;
    j["candidates"] = nlohmann::json::array();
    for (const Track & t : preds[i].trajectories) {
      j["candidates"].push_back(track_to_json(t));
    }
    j["linear_fit"] = track_to_json(preds[i].linear_fit);
    out << j.dump() << "\n";
  }
  std::cout << "wrote " << preds.size() << " predictions to " << path.string() << "\n";
  return 0;
}

int cmd_analyze(const Common & c, const std::string & what)
{
  const RunConfig cfg = load_config(c);
  const auto instances = split_instances(cfg, c.split);
  if (what == "groups") {
    for (const auto & inst : instances) {
      const GroupSet g = group_members(inst, cfg.gpcc.effective_group());
      std::vector<std::pair<double, std::string>> ranked;
      for (const auto & [id, d] : g.per_neighbor_distance) {
        ranked.emplace_back(d, id);
      }
      std::sort(ranked.begin(), ranked.end());
      nlohmann::json j = {
        {"scene_id", inst.scene_id}, {"target_id", inst.target_id}, {"start_frame", inst.start_frame},
        {"d_m", cfg.gpcc.group.d_m}};
      j["neighbors"] = nlohmann::json::array();
      for (const auto & [d, id] : ranked) {
        j["neighbors"].push_back({{"agent_id", id}, {"distance", d}, {"member", g.contains(id)}});
      }
      std::cout << j.dump() << "\n";
    }
    return 0;
  }
  if (what == "conception") {
    for (const auto & inst : instances) {
      const GroupSet g = group_members(inst, cfg.gpcc.effective_group());
      const ConceptionVector r = conception_vector(inst, g, cfg.gpcc.effective_conception());
      nlohmann::json j = {
        {"scene_id", inst.scene_id}, {"target_id", inst.target_id}, {"start_frame", inst.start_frame},
        {"fov_degrees", cfg.gpcc.conception.fov_degrees}, {"values", r.values},
        {"counts", {{"right", r.counts[0]}, {"left", r.counts[1]}, {"rear", r.counts[2]}}}};
      std::cout << j.dump() << "\n";
    }
    return 0;
  }
  if (what == "ratios") {
    const GpccModel model = load_model(cfg);
    const auto analyses = analyze_instances(model, instances);
    std::ofstream csv(output_path(cfg, "ratios.csv"));
    csv << "scene_id,target_id,start_frame,r_self,r_group,r_con,degenerate,att_right,att_left,att_rear\n";
    for (std::size_t i = 0; i < analyses.size(); ++i) {
      const auto & a = analyses[i];
      const auto & inst = instances[i];
      nlohmann::json j = {
        {"scene_id", inst.scene_id}, {"target_id", inst.target_id}, {"start_frame", inst.start_frame},
        {"contributions",
         {{"r_self", a.contributions.r_self}, {"r_group", a.contributions.r_group}, {"r_con", a.contributions.r_con},
          {"degenerate", a.contributions.degenerate}}},
        {"attention", {{"right", a.attention.right}, {"left", a.attention.left}, {"rear", a.attention.rear}}}};
      std::cout << j.dump() << "\n";
      csv << inst.scene_id << "," << inst.target_id << "," << inst.start_frame << "," << std::setprecision(10)
          << a.contributions.r_self << "," << a.contributions.r_group << "," << a.contributions.r_con << ","
          << (a.contributions.degenerate ? 1 : 0) << "," << a.attention.right << "," << a.attention.left << ","
          << a.attention.rear << "\n";
    }
    return 0;
  }
  throw ConfigError("analyze", "unknown report '" + what + "' (expected groups, conception or ratios)");
}

int cmd_ablate(const Common & c)
{
  const RunConfig cfg = load_config(c);
  const auto train_set = split_instances(cfg, "train");
  const auto test_set = split_instances(cfg, "test");
  const auto rows = run_ablation(train_set, test_set, cfg.gpcc, cfg.train_options());
  std::ofstream csv(output_path(cfg, "ablation.csv"));
  csv << "variant,group,conception,min_ade,min_fde\n";
  std::cout << std::left << std::setw(9) << "variant" << std::setw(7) << "group" << std::setw(12) << "conception"
            << std::setw(14) << "min_ade" << "min_fde\n";
  for (const auto & r : rows) {
    const GpccConfig v = apply_variant(cfg.gpcc, r.variant);
    const char * g = v.model.disable_group ? "off" : "on";
    const char * k = v.model.disable_conception ? "off" : "on";
    std::cout << std::left << std::setw(9) << to_string(r.variant) << std::setw(7) << g << std::setw(12) << k
              << std::setw(14) << std::setprecision(6) << r.metrics.min_ade << r.metrics.min_fde << "\n";
    csv << to_string(r.variant) << "," << g << "," << k << "," << std::setprecision(10) << r.metrics.min_ade << ","
        << r.metrics.min_fde << "\n";
  }
  return 0;
}

std::vector<double> parse_values(const std::string & text, const char * field)
{
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) {
        throw std::invalid_argument(item);
      }
    } catch (const std::exception &) {
      throw ConfigError(field, "'" + item + "' is not a number");
    }
  }
  if (out.empty()) {
    throw ConfigError(field, "no values given");
  }
  return out;
}

int cmd_sweep(const Common & c, const std::string & values_text, bool fov)
{
  const RunConfig cfg = load_config(c);
  const auto values = parse_values(values_text, "values");
  const auto train_set = split_instances(cfg, "train");
  const auto test_set = split_instances(cfg, "test");
  const auto rows = fov ? sweep_fov(train_set, test_set, cfg.gpcc, values, cfg.train_options())
                        : sweep_dm(train_set, test_set, cfg.gpcc, values, cfg.train_options());
  const char * name = fov ? "fov_degrees" : "d_m";
  const fs::path path = output_path(cfg, fov ? "sweep_fov.csv" : "sweep_dm.csv");
  std::ofstream csv(path);
  std::ostringstream table;
  table << name << ",min_ade,min_fde\n";
  for (const auto & r : rows) {
    table << std::setprecision(10) << r.value << "," << r.metrics.min_ade << "," << r.metrics.min_fde << "\n";
  }
  csv << table.str();
  std::cout << table.str();
  return 0;
}

int cmd_serve(const Common & c, const std::string & listen)
{
  const RunConfig cfg = load_config(c);
  auto model = std::make_shared<const GpccModel>(load_model(cfg));
  std::vector<Scene> scenes = load_sources(cfg.test, cfg);
  const ListenAddress address = listen.empty() ? listen_address_from_env() : parse_listen_address(listen);
  PredictionService service(model, std::move(scenes));
  run_server(service, address);
  return 0;
}

int cmd_synth(const std::string & kind, int agents, int frames, std::uint64_t seed, const std::string & out)
{
  const Scene scene = synth_scene(parse_synth_kind(kind), agents, frames, seed);
  if (out.empty() || out == "-") {
    write_scene(scene, std::cout);
  } else {
    save_scene(scene, out);
  }
  return 0;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"GPCC trajectory prediction: training, evaluation, analysis and serving"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--threads", common.threads, "OpenMP threads (0 keeps the runtime default)")->check(CLI::NonNegativeNumber);

  auto with_config = [&](CLI::App * sub) {
    sub->add_option("config", common.config, "Run configuration (JSON)")->required();
    sub->add_option("--checkpoint", common.checkpoint, "Overrides the configured checkpoint path");
  };

  auto * train_cmd = app.add_subcommand("train", "Train a model and write a checkpoint and loss log");
  with_config(train_cmd);

  auto * eval_cmd = app.add_subcommand("eval", "Report min_ade / min_fde per split");
  with_config(eval_cmd);

  std::string predict_out;
  auto * predict_cmd = app.add_subcommand("predict", "Write predicted trajectories as JSON lines");
  with_config(predict_cmd);
  predict_cmd->add_option("--split", common.split, "train or test")->check(CLI::IsMember({"train", "test"}));
  predict_cmd->add_option("--out", predict_out, "Output file (default: <output_dir>/predictions.jsonl)");

  std::string report;
  auto * analyze_cmd = app.add_subcommand("analyze", "Group, conception or contribution-ratio reports");
  analyze_cmd->add_option("report", report, "groups, conception or ratios")
    ->required()
    ->check(CLI::IsMember({"groups", "conception", "ratios"}));
  with_config(analyze_cmd);
  analyze_cmd->add_option("--split", common.split, "train or test")->check(CLI::IsMember({"train", "test"}));

  auto * ablate_cmd = app.add_subcommand("ablate", "Train and evaluate variants v0-v3");
  with_config(ablate_cmd);

  std::string fov_values = "90,135,180,270,360";
  auto * fov_cmd = app.add_subcommand("sweep-fov", "Metrics versus field-of-view angle");
  with_config(fov_cmd);
  fov_cmd->add_option("--values", fov_values, "Comma-separated angles in degrees");

  std::string dm_values = "5,10,20,40";
  auto * dm_cmd = app.add_subcommand("sweep-dm", "Metrics versus grouping threshold");
  with_config(dm_cmd);
  dm_cmd->add_option("--values", dm_values, "Comma-separated thresholds");

  std::string listen;
  auto * serve_cmd = app.add_subcommand("serve", "Serve the JSON API over HTTP (scenes from the test split)");
  with_config(serve_cmd);
  serve_cmd->add_option("--listen", listen, "host:port (overrides GPCC_LISTEN_ADDR)");

  std::string kind = "constant-velocity";
  int agents = 5;
  int frames = 20;
  std::uint64_t seed = 1;
  std::string synth_out;
  auto * synth_cmd = app.add_subcommand("synth", "Write a synthetic scene in frame-table format");
  synth_cmd->add_option("--kind", kind, "constant-velocity, group-pair, crossing, stationary-crowd or group-turn");
  synth_cmd->add_option("--agents", agents, "Number of agents");
  synth_cmd->add_option("--frames", frames, "Number of frames");
  synth_cmd->add_option("--seed", seed, "Generator seed");
  synth_cmd->add_option("--out", synth_out, "Output file ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    return app.exit(e);
  }

  try {
    if (common.threads > 0) {
      nn::kernels::set_num_threads(common.threads);
    }
    if (*train_cmd) return cmd_train(common);
    if (*eval_cmd) return cmd_eval(common);
    if (*predict_cmd) return cmd_predict(common, predict_out);
    if (*analyze_cmd) return cmd_analyze(common, report);
    if (*ablate_cmd) return cmd_ablate(common);
    if (*fov_cmd) return cmd_sweep(common, fov_values, true);
    if (*dm_cmd) return cmd_sweep(common, dm_values, false);
    if (*serve_cmd) return cmd_serve(common, listen);
    if (*synth_cmd) return cmd_synth(kind, agents, frames, seed, synth_out);
  } catch (const ConfigError & e) {
    std::cerr << "error: invalid configuration: " << e.what() << "\n";
    return kUsageError;
  } catch (const NotFoundError & e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
