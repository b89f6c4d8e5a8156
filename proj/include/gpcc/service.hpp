#ifndef GPCC__SERVICE_HPP_
#define GPCC__SERVICE_HPP_

#include "gpcc/evaluation.hpp"
#include "gpcc/model.hpp"

#include <json.hpp>

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace gpcc
{

struct ServiceResponse
{
  int status{200};
  nlohmann::json body;
};

/// Read-only request handlers over one model snapshot and a fixed scene catalogue.
class PredictionService
{
public:
  PredictionService(std::shared_ptr<const GpccModel> model, std::vector<Scene> scenes);

  ServiceResponse health() const;
  ServiceResponse scenes() const;
  ServiceResponse instances(const std::string & scene_id) const;
  /// Body schema:
  ///   {"scene_id": str | "tracks": [{"agent_id": str, "points": [[frame, x, y], ...]}],
  ///    "target_id": str, "start_frame": int,
  ///    "edits": [{"agent_id": str, "role": "neighbor" | "group-member", "track": [[x, y], ...]}]}
  ServiceResponse predict(const nlohmann::json & body) const;
  /// Parses `text` first; malformed JSON is a 400.
  ServiceResponse predict_text(const std::string & text) const;

  const GpccModel & model() const noexcept { return *model_; }

private:
  std::shared_ptr<const GpccModel> model_;
  std::map<std::string, Scene> scenes_;
};

/// Error body: {"error": {"status": int, "field": str, "message": str}}.
ServiceResponse error_response(int status, const std::string & message, const std::string & field = "");

/// JSON form of an analysis, all coordinates in the instance's scene frame.
nlohmann::json analysis_to_json(const PredictionInstance & inst, const InstanceAnalysis & a);

nlohmann::json track_to_json(const Track & t);

struct ListenAddress
{
  std::string host{"127.0.0.1"};
  int port{8080};
};

/// Parses "host:port" or ":port". Throws ConfigError.
ListenAddress parse_listen_address(const std::string & text);

/// Address from GPCC_LISTEN_ADDR, or the default when unset.
ListenAddress listen_address_from_env();

/// HTTP front end: GET /health, GET /scenes, GET /scenes/{id}/instances, POST /predict.
class HttpServer
{
public:
  explicit HttpServer(const PredictionService & service);
  ~HttpServer();
  HttpServer(const HttpServer &) = delete;
  HttpServer & operator=(const HttpServer &) = delete;

  /// Binds the socket; port 0 picks a free port. Returns the bound port.
  int bind(const ListenAddress & address);
  /// Serves until stop() is called. Requires a successful bind().
  void serve();
  void stop();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Blocks serving GET /health, GET /scenes, GET /scenes/{id}/instances and POST /predict.
void run_server(const PredictionService & service, const ListenAddress & address);

}  // namespace gpcc

#endif  // GPCC__SERVICE_HPP_
