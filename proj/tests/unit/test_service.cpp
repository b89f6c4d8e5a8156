#include "gpcc/error.hpp"
#include "gpcc/service.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>
#include <httplib.h>
#include <json.hpp>

#include <cstdlib>
#include <thread>

using namespace gpcc;
using nlohmann::json;

namespace
{

GpccConfig small_config()
{
  GpccConfig cfg;
  cfg.model.d = 4;
  cfg.model.d_model = 8;
  cfg.model.heads = 2;
  cfg.model.ffn_hidden = 16;
  cfg.model.k_gen = 3;
  cfg.model.encoder_layers = 1;
  cfg.model.decoder_layers = 1;
  return cfg;
}

class ServiceTest : public ::testing::Test
{
protected:
  void SetUp() override
  {
    scene = synth_scene(SynthKind::GroupPair, 4, 24, 5);
    scene.id = "pairs";
    service = std::make_unique<PredictionService>(std::make_shared<const GpccModel>(small_config(), 1), std::vector<Scene>{scene});
  }

  json valid_request() const { return json{{"scene_id", "pairs"}, {"target_id", "0"}, {"start_frame", 2}}; }

  std::string error_field(const ServiceResponse & r) const { return r.body.at("error").value("field", ""); }

  Scene scene;
  std::unique_ptr<PredictionService> service;
};

}  // namespace

TEST_F(ServiceTest, Health)
{
  const ServiceResponse r = service->health();
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body["status"], "ok");
  EXPECT_EQ(r.body["k_gen"], 3);
  EXPECT_EQ(r.body["n_past"], 8);
  EXPECT_EQ(r.body["scenes"], 1);
}

TEST_F(ServiceTest, ScenesAndInstances)
{
  const ServiceResponse s = service->scenes();
  ASSERT_EQ(s.body["scenes"].size(), 1u);
  EXPECT_EQ(s.body["scenes"][0]["id"], "pairs");
  EXPECT_EQ(s.body["scenes"][0]["agents"], 4);
  EXPECT_EQ(s.body["scenes"][0]["frames"], 24);

  const ServiceResponse i = service->instances("pairs");
  EXPECT_EQ(i.status, 200);
  EXPECT_EQ(i.body["instances"].size(), sample_windows(scene, small_config().window).size());
  EXPECT_EQ(i.body["instances"][0]["neighbors"], 3);
  EXPECT_EQ(service->instances("nope").status, 404);
}

TEST_F(ServiceTest, PredictHasEveryField)
{
  const ServiceResponse r = service->predict(valid_request());
  ASSERT_EQ(r.status, 200) << r.body.dump();
  for (const char * key :
       {"candidates", "linear_fit", "group_members", "group_distances", "conception", "attention", "contributions"}) {
    EXPECT_TRUE(r.body.contains(key)) << key;
  }
  EXPECT_EQ(r.body["candidates"].size(), 3u);
  EXPECT_EQ(r.body["candidates"][0].size(), 12u);
  EXPECT_EQ(r.body["candidates"][0][0].size(), 2u);
  EXPECT_EQ(r.body["linear_fit"].size(), 12u);
  EXPECT_EQ(r.body["group_members"], json::array({"1"}));
  EXPECT_EQ(r.body["group_distances"].size(), 3u);
  EXPECT_EQ(r.body["conception"]["values"].size(), 7u);
  EXPECT_TRUE(r.body["conception"]["counts"].contains("rear"));
  const auto & c = r.body["contributions"];
  EXPECT_NEAR(c["r_self"].get<double>() + c["r_group"].get<double>() + c["r_con"].get<double>(), 1.0, 1e-9);
}

TEST_F(ServiceTest, RepeatedRequestsAreByteIdentical)
{
  const std::string body = valid_request().dump();
  EXPECT_EQ(service->predict_text(body).body.dump(), service->predict_text(body).body.dump());
}

TEST_F(ServiceTest, CoordinatesAreInSceneFrame)
{
  const ServiceResponse r = service->predict(valid_request());
  const PredictionInstance inst = extract_instance(scene, "0", 2, small_config().window);
  ASSERT_EQ(r.body["observed"].size(), 8u);
  for (std::size_t t = 0; t < 8; ++t) {
    EXPECT_EQ(r.body["observed"][t][0].get<double>(), inst.observed[t].x);
    EXPECT_EQ(r.body["observed"][t][1].get<double>(), inst.observed[t].y);
  }
  // Re-normalizing the returned linear fit reproduces the internal one.
  const InstanceFeatures f = extract_features(inst, small_config());
  const Vec2 offset = f.normalized.origin_offset;
  for (std::size_t t = 0; t < 12; ++t) {
    const Vec2 p{r.body["linear_fit"][t][0].get<double>(), r.body["linear_fit"][t][1].get<double>()};
    EXPECT_NEAR((p + offset).x, f.linear_fit[t].x, 1e-9);
    EXPECT_NEAR((p + offset).y, f.linear_fit[t].y, 1e-9);
  }
}

TEST_F(ServiceTest, InlineTracks)
{
  json tracks = json::array();
  for (const auto & [id, tr] : scene.tracks) {
    json pts = json::array();
    for (const auto & p : tr.points) pts.push_back({p.frame, p.position.x, p.position.y});
    tracks.push_back({{"agent_id", id}, {"points", pts}});
  }
  const ServiceResponse inline_r = service->predict(json{{"tracks", tracks}, {"target_id", "0"}, {"start_frame", 2}});
  ASSERT_EQ(inline_r.status, 200) << inline_r.body.dump();
  const ServiceResponse named = service->predict(valid_request());
  EXPECT_EQ(inline_r.body["candidates"], named.body["candidates"]);
}

TEST_F(ServiceTest, EditsChangeTheAnalysis)
{
  const PredictionInstance inst = extract_instance(scene, "0", 2, small_config().window);
  json far = json::array();
  for (const Vec2 & p : inst.observed) far.push_back({p.x + 40, p.y - 40});
  json req = valid_request();
  req["edits"] = json::array({{{"agent_id", "ghost"}, {"role", "neighbor"}, {"track", far}}});
  const ServiceResponse r = service->predict(req);
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_TRUE(r.body["group_distances"].contains("ghost"));
  EXPECT_TRUE(r.body["conception"]["partitions"].contains("ghost"));
}

TEST_F(ServiceTest, DistantGroupMemberIs422)
{
  const PredictionInstance inst = extract_instance(scene, "0", 2, small_config().window);
  json track = json::array();
  for (const Vec2 & p : inst.observed) track.push_back({p.x + 50, p.y});
  json req = valid_request();
  req["edits"] = json::array({{{"agent_id", "ghost"}, {"role", "group-member"}, {"track", track}}});
  const ServiceResponse r = service->predict(req);
  EXPECT_EQ(r.status, 422);
  EXPECT_EQ(error_field(r), "edits[0].role");
  EXPECT_NE(r.body["error"]["message"].get<std::string>().find("d_m"), std::string::npos);
}

TEST_F(ServiceTest, NotFoundCases)
{
  json req = valid_request();
  req["scene_id"] = "elsewhere";
  EXPECT_EQ(service->predict(req).status, 404);
  req = valid_request();
  req["target_id"] = "99";
  EXPECT_EQ(service->predict(req).status, 404);
  req = valid_request();
  req["start_frame"] = 500;
  EXPECT_EQ(service->predict(req).status, 404);
}

TEST_F(ServiceTest, BadRequestsNameTheField)
{
  EXPECT_EQ(service->predict_text("{oops").status, 400);
  EXPECT_EQ(service->predict(json::array()).status, 400);

  json req = valid_request();
  req["extra"] = 1;
  auto r = service->predict(req);
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(error_field(r), "extra");

  req = valid_request();
  req.erase("target_id");
  r = service->predict(req);
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(error_field(r), "target_id");

  req = valid_request();
  req["start_frame"] = "two";
  EXPECT_EQ(error_field(service->predict(req)), "start_frame");

  req = valid_request();
  req["edits"] = json::array({{{"agent_id", "g"}, {"role", "stranger"}, {"track", json::array()}}});
  EXPECT_EQ(error_field(service->predict(req)), "edits[0].role");

  req = valid_request();
  req["edits"] = json::array({{{"agent_id", "g"}, {"role", "neighbor"}, {"track", {{1, 2}}}}});
  r = service->predict(req);
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(error_field(r), "edits[0].track");

  req = valid_request();
  req["edits"] = json::array({{{"agent_id", "g"}, {"role", "neighbor"}, {"track", {{1, "x"}}}}});
  EXPECT_EQ(service->predict(req).status, 400);
}

TEST(ListenAddress, Parsing)
{
  const auto a = parse_listen_address("0.0.0.0:9000");
  EXPECT_EQ(a.host, "0.0.0.0");
  EXPECT_EQ(a.port, 9000);
  EXPECT_EQ(parse_listen_address(":81").host, "127.0.0.1");
  EXPECT_THROW(parse_listen_address("localhost"), ConfigError);
  EXPECT_THROW(parse_listen_address("h:99999"), ConfigError);
  EXPECT_THROW(parse_listen_address("h:abc"), ConfigError);
  ::setenv("GPCC_LISTEN_ADDR", "127.0.0.1:7001", 1);
  EXPECT_EQ(listen_address_from_env().port, 7001);
  ::unsetenv("GPCC_LISTEN_ADDR");
  EXPECT_EQ(listen_address_from_env().port, 8080);
}

TEST_F(ServiceTest, HttpEndpoints)
{
  HttpServer server(*service);
  const int port = server.bind(ListenAddress{"127.0.0.1", 0});
  ASSERT_GT(port, 0);
  std::thread th([&] { server.serve(); });

  httplib::Client client("127.0.0.1", port);
  client.set_connection_timeout(5);
  auto health = client.Get("/health");
  for (int i = 0; !health && i < 50; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    health = client.Get("/health");
  }
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  EXPECT_EQ(json::parse(health->body)["status"], "ok");
  EXPECT_EQ(health->get_header_value("Access-Control-Allow-Origin"), "*");

  auto scenes = client.Get("/scenes");
  ASSERT_TRUE(scenes);
  EXPECT_EQ(json::parse(scenes->body)["scenes"][0]["id"], "pairs");

  auto inst = client.Get("/scenes/pairs/instances");
  ASSERT_TRUE(inst);
  EXPECT_EQ(inst->status, 200);
  EXPECT_EQ(client.Get("/scenes/none/instances")->status, 404);

  auto pred = client.Post("/predict", valid_request().dump(), "application/json");
  ASSERT_TRUE(pred);
  EXPECT_EQ(pred->status, 200);
  EXPECT_EQ(pred->body, service->predict(valid_request()).body.dump());

  auto bad = client.Post("/predict", "{", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);

  server.stop();
  th.join();
}
