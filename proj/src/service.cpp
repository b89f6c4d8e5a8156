#include "gpcc/service.hpp"

#include "gpcc/error.hpp"

#include <httplib.h>

#include <charconv>
#include <cstdlib>
#include <iostream>

namespace gpcc
{

ServiceResponse error_response(int status, const std::string & message, const std::string & field)
{
  nlohmann::json err = {{"status", status}, {"message", message}};
  if (!field.empty()) {
    err["field"] = field;
  }
  return {status, {{"error", err}}};
}

nlohmann::json track_to_json(const Track & t)
{
  nlohmann::json a = nlohmann::json::array();
  for (const Vec2 & p : t) {
    a.push_back({p.x, p.y});
  }
  return a;
}

nlohmann::json analysis_to_json(const PredictionInstance & inst, const InstanceAnalysis & a)
{
  nlohmann::json j;
  j["scene_id"] = inst.scene_id;
  j["target_id"] = inst.target_id;
  j["start_frame"] = inst.start_frame;
  j["observed"] = track_to_json(inst.observed);
  j["future_truth"] = inst.future_truth ? track_to_json(*inst.future_truth) : nlohmann::json(nullptr);
  nlohmann::json neighbors = nlohmann::json::array();
  for (const auto & nb : inst.neighbors) {
    neighbors.push_back({{"agent_id", nb.agent_id}, {"track", track_to_json(nb.track)}});
  }
  j["neighbors"] = neighbors;

  nlohmann::json candidates = nlohmann::json::array();
  for (const Track & t : a.prediction.trajectories) {
    candidates.push_back(track_to_json(t));
  }
  j["candidates"] = candidates;
  j["linear_fit"] = track_to_json(a.prediction.linear_fit);

  j["group_members"] = nlohmann::json::array();
  for (const auto & id : a.groups.member_ids) {
    j["group_members"].push_back(id);
  }
  j["group_distances"] = nlohmann::json::object();
  for (const auto & [id, d] : a.groups.per_neighbor_distance) {
    j["group_distances"][id] = d;
  }

  nlohmann::json partitions = nlohmann::json::object();
  for (const auto & [id, label] : a.partitions.labels) {
    partitions[id] = {{"partition", std::string(to_string(label.partition))}, {"relative_angle", label.relative_angle}};
  }
  j["conception"] = {
    {"values", a.conception.values},
    {"counts",
     {{"right", a.conception.counts[0]}, {"left", a.conception.counts[1]}, {"rear", a.conception.counts[2]}}},
    {"partitions", partitions}};
  j["attention"] = {
    {"right", a.attention.right},
    {"left", a.attention.left},
    {"rear", a.attention.rear},
    {"disabled", a.attention.all_zero()}};
  j["contributions"] = {
    {"r_self", a.contributions.r_self},
    {"r_group", a.contributions.r_group},
    {"r_con", a.contributions.r_con},
    {"degenerate", a.contributions.degenerate}};
  return j;
}

PredictionService::PredictionService(std::shared_ptr<const GpccModel> model, std::vector<Scene> scenes)
: model_(std::move(model))
{
  if (!model_) {
    throw Error("PredictionService needs a model");
  }
  for (auto & s : scenes) {
    const std::string id = s.id;
    if (!scenes_.emplace(id, std::move(s)).second) {
      throw Error("duplicate scene id '" + id + "'");
    }
  }
}

ServiceResponse PredictionService::health() const
{
  const auto & cfg = model_->config();
  return {200,
          {{"status", "ok"},
           {"scenes", scenes_.size()},
           {"k_gen", cfg.model.k_gen},
           {"n_past", cfg.window.n_past},
           {"n_future", cfg.window.n_future},
           {"d_m", cfg.group.d_m},
           {"fov_degrees", cfg.conception.fov_degrees}}};
}

ServiceResponse PredictionService::scenes() const
{
  nlohmann::json list = nlohmann::json::array();
  for (const auto & [id, s] : scenes_) {
    list.push_back(
      {{"id", id},
       {"agents", s.tracks.size()},
       {"frames", s.frames.size()},
       {"interval_seconds", s.interval_seconds}});
  }
  return {200, {{"scenes", list}}};
}

ServiceResponse PredictionService::instances(const std::string & scene_id) const
{
  const auto it = scenes_.find(scene_id);
  if (it == scenes_.end()) {
    return error_response(404, "unknown scene '" + scene_id + "'", "scene_id");
  }
  nlohmann::json list = nlohmann::json::array();
  for (const auto & inst : sample_windows(it->second, model_->config().window)) {
    list.push_back(
      {{"target_id", inst.target_id}, {"start_frame", inst.start_frame}, {"neighbors", inst.neighbors.size()}});
  }
  return {200, {{"scene_id", scene_id}, {"instances", list}}};
}

namespace
{

// Request-shape failures carry the JSON path of the offending field.
struct BadRequest
{
  std::string field;
  std::string message;
};

const nlohmann::json & require(const nlohmann::json & obj, const char * key, const std::string & path)
{
  if (!obj.contains(key)) {
    throw BadRequest{path.empty() ? key : path + "." + key, "missing required field"};
  }
  return obj.at(key);
}

double number_at(const nlohmann::json & v, const std::string & path)
{
  if (!v.is_number()) {
    throw BadRequest{path, "expected a number"};
  }
  const double d = v.get<double>();
  if (!std::isfinite(d)) {
    throw BadRequest{path, "must be finite"};
  }
  return d;
}

std::string id_at(const nlohmann::json & v, const std::string & path)
{
  if (v.is_string()) {
    return v.get<std::string>();
  }
  if (v.is_number_integer()) {
    return std::to_string(v.get<std::int64_t>());
  }
  throw BadRequest{path, "expected a string id"};
}

Track xy_track(const nlohmann::json & v, const std::string & path)
{
  if (!v.is_array()) {
    throw BadRequest{path, "expected a list of [x, y] pairs"};
  }
  Track t;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string here = path + "[" + std::to_string(i) + "]";
    if (!v[i].is_array() || v[i].size() != 2) {
      throw BadRequest{here, "expected an [x, y] pair"};
    }
    t.push_back({number_at(v[i][0], here + "[0]"), number_at(v[i][1], here + "[1]")});
  }
  return t;
}

Scene inline_scene(const nlohmann::json & tracks, double interval)
{
  if (!tracks.is_array() || tracks.empty()) {
    throw BadRequest{"tracks", "expected a non-empty list of tracks"};
  }
  std::vector<AgentTrack> list;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const std::string here = "tracks[" + std::to_string(i) + "]";
    const auto & t = tracks[i];
    if (!t.is_object()) {
      throw BadRequest{here, "expected an object"};
    }
    AgentTrack at;
    at.agent_id = id_at(require(t, "agent_id", here), here + ".agent_id");
    const auto & pts = require(t, "points", here);
    if (!pts.is_array()) {
      throw BadRequest{here + ".points", "expected a list of [frame, x, y]"};
    }
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const std::string p = here + ".points[" + std::to_string(k) + "]";
      if (!pts[k].is_array() || pts[k].size() != 3 || !pts[k][0].is_number_integer()) {
        throw BadRequest{p, "expected [frame, x, y] with an integer frame"};
      }
      at.points.push_back(
        {pts[k][0].get<FrameId>(), Vec2{number_at(pts[k][1], p + "[1]"), number_at(pts[k][2], p + "[2]")}});
    }
    list.push_back(std::move(at));
  }
  try {
    return make_scene("inline", std::move(list), interval);
  } catch (const Error & e) {
    throw BadRequest{"tracks", e.what()};
  }
}

}  // namespace

ServiceResponse PredictionService::predict(const nlohmann::json & body) const
{
  const GpccConfig & cfg = model_->config();
  try {
    if (!body.is_object()) {
      throw BadRequest{"<root>", "expected a JSON object"};
    }
    for (const auto & item : body.items()) {
      const std::string & k = item.key();
      if (k != "scene_id" && k != "tracks" && k != "target_id" && k != "start_frame" && k != "edits") {
        throw BadRequest{k, "unknown field"};
      }
    }
    Scene inline_storage;
    const Scene * scene = nullptr;
    if (body.contains("tracks")) {
      inline_storage = inline_scene(body.at("tracks"), 0.4);
      scene = &inline_storage;
    } else {
      const std::string id = id_at(require(body, "scene_id", ""), "scene_id");
      const auto it = scenes_.find(id);
      if (it == scenes_.end()) {
        return error_response(404, "unknown scene '" + id + "'", "scene_id");
      }
      scene = &it->second;
    }
    const std::string target = id_at(require(body, "target_id", ""), "target_id");
    const auto & start = require(body, "start_frame", "");
    if (!start.is_number_integer()) {
      throw BadRequest{"start_frame", "expected an integer frame id"};
    }

    std::vector<Edit> edits;
    if (body.contains("edits")) {
      const auto & list = body.at("edits");
      if (!list.is_array()) {
        throw BadRequest{"edits", "expected a list"};
      }
      for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string here = "edits[" + std::to_string(i) + "]";
        const auto & e = list[i];
        if (!e.is_object()) {
          throw BadRequest{here, "expected an object"};
        }
        Edit edit;
        edit.agent_id = id_at(require(e, "agent_id", here), here + ".agent_id");
        const auto & role = require(e, "role", here);
        if (!role.is_string()) {
          throw BadRequest{here + ".role", "expected 'neighbor' or 'group-member'"};
        }
        try {
          edit.role = parse_edit_role(role.get<std::string>());
        } catch (const ConfigError &) {
          throw BadRequest{here + ".role", "expected 'neighbor' or 'group-member'"};
        }
        edit.track = xy_track(require(e, "track", here), here + ".track");
        edits.push_back(std::move(edit));
      }
    }

    PredictionInstance inst;
    try {
      inst = extract_instance(*scene, target, start.get<FrameId>(), cfg.window);
    } catch (const NotFoundError & e) {
      return error_response(404, e.what(), "target_id");
    }

    PredictionInstance edited = inst;
    for (std::size_t i = 0; i < edits.size(); ++i) {
      const std::string here = "edits[" + std::to_string(i) + "]";
      try {
        validate_edit(edited, edits[i], cfg);
      } catch (const KernelViolation & e) {
        return error_response(422, e.what(), here + ".role");
      } catch (const ShapeError & e) {
        throw BadRequest{here + ".track", e.what()};
      } catch (const Error & e) {
        throw BadRequest{here + ".agent_id", e.what()};
      }
      edited.neighbors.push_back({edits[i].agent_id, edits[i].track});
    }

    const InstanceAnalysis analysis = analyze_instance(*model_, edited);
    return {200, analysis_to_json(edited, analysis)};
  } catch (const BadRequest & e) {
    return error_response(400, e.message, e.field);
  } catch (const NumericError & e) {
    return error_response(500, e.what());
  }
}

ServiceResponse PredictionService::predict_text(const std::string & text) const
{
  nlohmann::json body;
  try {
    body = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error & e) {
    return error_response(400, std::string("malformed JSON: ") + e.what(), "<root>");
  }
  return predict(body);
}

ListenAddress parse_listen_address(const std::string & text)
{
  const auto colon = text.rfind(':');
  if (colon == std::string::npos) {
    throw ConfigError("listen", "expected host:port, got '" + text + "'");
  }
  ListenAddress a;
  if (colon > 0) {
    a.host = text.substr(0, colon);
  }
  const std::string port = text.substr(colon + 1);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
  if (ec != std::errc{} || ptr != port.data() + port.size() || value < 0 || value > 65535) {
    throw ConfigError("listen", "invalid port '" + port + "'");
  }
  a.port = value;
  return a;
}

ListenAddress listen_address_from_env()
{
  const char * env = std::getenv("GPCC_LISTEN_ADDR");
  if (env == nullptr || *env == '\0') {
    return ListenAddress{};
  }
  return parse_listen_address(env);
}

struct HttpServer::Impl
{
  httplib::Server server;
};

HttpServer::HttpServer(const PredictionService & service)
: impl_(std::make_unique<Impl>())
{
  httplib::Server & server = impl_->server;
  auto reply = [](httplib::Response & res, const ServiceResponse & r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server.set_default_headers({
    {"Access-Control-Allow-Origin", "*"},
    {"Access-Control-Allow-Headers", "Content-Type"},
    {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
  });
  server.Options(".*", [](const httplib::Request &, httplib::Response & res) { res.status = 204; });
  server.Get("/health", [&service, reply](const httplib::Request &, httplib::Response & res) {
    reply(res, service.health());
  });
  server.Get("/scenes", [&service, reply](const httplib::Request &, httplib::Response & res) {
    reply(res, service.scenes());
  });
  server.Get(R"(/scenes/([^/]+)/instances)", [&service, reply](const httplib::Request & req, httplib::Response & res) {
    reply(res, service.instances(req.matches[1]));
  });
  server.Post("/predict", [&service, reply](const httplib::Request & req, httplib::Response & res) {
    reply(res, service.predict_text(req.body));
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const ListenAddress & address)
{
  httplib::Server & server = impl_->server;
  if (address.port == 0) {
    const int port = server.bind_to_any_port(address.host);
    if (port < 0) {
      throw Error("cannot bind " + address.host);
    }
    return port;
  }
  if (!server.bind_to_port(address.host, address.port)) {
    throw Error("cannot listen on " + address.host + ":" + std::to_string(address.port));
  }
  return address.port;
}

void HttpServer::serve()
{
  impl_->server.listen_after_bind();
}

void HttpServer::stop()
{
  if (impl_) {
    impl_->server.stop();
  }
}

void run_server(const PredictionService & service, const ListenAddress & address)
{
  HttpServer server(service);
  const int port = server.bind(address);
  std::cerr << "listening on " << address.host << ":" << port << std::endl;
  server.serve();
}

}  // namespace gpcc
