#include "gpcc/config_json.hpp"

#include "gpcc/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gpcc
{
namespace json_field
{

std::string join(const std::string & path, const std::string & key)
{
  return path.empty() ? key : path + "." + key;
}

void expect_object(const nlohmann::json & j, const std::string & path, std::initializer_list<const char *> allowed)
{
  if (!j.is_object()) {
    throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  }
  for (const auto & item : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char * k) { return item.key() == k; });
    if (!known) {
      throw ConfigError(join(path, item.key()), "unknown field");
    }
  }
}

void read(const nlohmann::json & j, const std::string & path, const char * key, int & out)
{
  if (!j.contains(key)) {
    return;
  }
  const auto & v = j.at(key);
  if (!v.is_number_integer() ||
      v.get<std::int64_t>() < std::numeric_limits<int>::min() ||
      v.get<std::int64_t>() > std::numeric_limits<int>::max()) {
    throw ConfigError(join(path, key), "expected an integer");
  }
  out = v.get<int>();
}

void read(const nlohmann::json & j, const std::string & path, const char * key, double & out)
{
  if (!j.contains(key)) {
    return;
  }
  const auto & v = j.at(key);
  if (!v.is_number()) {
    throw ConfigError(join(path, key), "expected a number");
  }
  out = v.get<double>();
  if (!std::isfinite(out)) {
    throw ConfigError(join(path, key), "must be finite");
  }
}

void read(const nlohmann::json & j, const std::string & path, const char * key, bool & out)
{
  if (!j.contains(key)) {
    return;
  }
  const auto & v = j.at(key);
  if (!v.is_boolean()) {
    throw ConfigError(join(path, key), "expected true or false");
  }
  out = v.get<bool>();
}

void read(const nlohmann::json & j, const std::string & path, const char * key, std::string & out)
{
  if (!j.contains(key)) {
    return;
  }
  const auto & v = j.at(key);
  if (!v.is_string()) {
    throw ConfigError(join(path, key), "expected a string");
  }
  out = v.get<std::string>();
}

void read(const nlohmann::json & j, const std::string & path, const char * key, std::uint64_t & out)
{
  if (!j.contains(key)) {
    return;
  }
  const auto & v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw ConfigError(join(path, key), "expected a non-negative integer");
  }
  out = v.get<std::uint64_t>();
}

}  // namespace json_field

using json_field::expect_object;
using json_field::join;
using json_field::read;

namespace
{

// Re-throws a validate() failure with the full dotted path.
template <typename F>
void validated(const std::string & path, F && f)
{
  try {
    f();
  } catch (const ConfigError & e) {
    const std::string & field = e.field();
    const auto dot = field.find('.');
    const std::string leaf = dot == std::string::npos ? field : field.substr(dot + 1);
    const std::string what = std::string(e.what()).substr(field.size() + 2);
    throw ConfigError(join(path, leaf), what);
  }
}

}  // namespace

WindowConfig window_config_from_json(const nlohmann::json & j, const std::string & path)
{
  expect_object(j, path, {"n_past", "n_future", "stride"});
  WindowConfig c;
  read(j, path, "n_past", c.n_past);
  read(j, path, "n_future", c.n_future);
  read(j, path, "stride", c.stride);
  validated(path, [&] { c.validate(); });
  return c;
}

GroupConfig group_config_from_json(const nlohmann::json & j, const std::string & path)
{
  expect_object(j, path, {"d_m", "enabled"});
  GroupConfig c;
  read(j, path, "d_m", c.d_m);
  read(j, path, "enabled", c.enabled);
  validated(path, [&] { c.validate(); });
  return c;
}

ConceptionConfig conception_config_from_json(const nlohmann::json & j, const std::string & path)
{
  expect_object(j, path, {"fov_degrees", "enabled"});
  ConceptionConfig c;
  read(j, path, "fov_degrees", c.fov_degrees);
  read(j, path, "enabled", c.enabled);
  validated(path, [&] { c.validate(); });
  return c;
}

ModelConfig model_config_from_json(const nlohmann::json & j, const std::string & path)
{
  expect_object(
    j, path,
    {"d", "d_model", "encoder_layers", "decoder_layers", "heads", "ffn_hidden", "k_gen", "disable_group",
     "disable_conception"});
  ModelConfig c;
  read(j, path, "d", c.d);
  read(j, path, "d_model", c.d_model);
  c.ffn_hidden = 2 * c.d_model;
  read(j, path, "encoder_layers", c.encoder_layers);
  read(j, path, "decoder_layers", c.decoder_layers);
  read(j, path, "heads", c.heads);
  read(j, path, "ffn_hidden", c.ffn_hidden);
  read(j, path, "k_gen", c.k_gen);
  read(j, path, "disable_group", c.disable_group);
  read(j, path, "disable_conception", c.disable_conception);
  validated(path, [&] { c.validate(); });
  return c;
}

nn::AdamConfig adam_config_from_json(const nlohmann::json & j, const std::string & path)
{
  expect_object(j, path, {"learning_rate", "beta1", "beta2", "epsilon"});
  nn::AdamConfig c;
  read(j, path, "learning_rate", c.learning_rate);
  read(j, path, "beta1", c.beta1);
  read(j, path, "beta2", c.beta2);
  read(j, path, "epsilon", c.epsilon);
  validated(path, [&] { c.validate(); });
  return c;
}

GpccConfig gpcc_config_from_json(const nlohmann::json & j, const std::string & path)
{
  expect_object(j, path, {"window", "group", "conception", "model"});
  GpccConfig c;
  if (j.contains("window")) {
    c.window = window_config_from_json(j.at("window"), join(path, "window"));
  }
  if (j.contains("group")) {
    c.group = group_config_from_json(j.at("group"), join(path, "group"));
  }
  if (j.contains("conception")) {
    c.conception = conception_config_from_json(j.at("conception"), join(path, "conception"));
  }
  if (j.contains("model")) {
    c.model = model_config_from_json(j.at("model"), join(path, "model"));
  }
  return c;
}

void to_json(nlohmann::json & j, const WindowConfig & c)
{
  j = {{"n_past", c.n_past}, {"n_future", c.n_future}, {"stride", c.stride}};
}

void to_json(nlohmann::json & j, const GroupConfig & c) { j = {{"d_m", c.d_m}, {"enabled", c.enabled}}; }

void to_json(nlohmann::json & j, const ConceptionConfig & c)
{
  j = {{"fov_degrees", c.fov_degrees}, {"enabled", c.enabled}};
}

void to_json(nlohmann::json & j, const ModelConfig & c)
{
  j = {
    {"d", c.d},
    {"d_model", c.d_model},
    {"encoder_layers", c.encoder_layers},
    {"decoder_layers", c.decoder_layers},
    {"heads", c.heads},
    {"ffn_hidden", c.ffn_hidden},
    {"k_gen", c.k_gen},
    {"disable_group", c.disable_group},
    {"disable_conception", c.disable_conception}};
}

void to_json(nlohmann::json & j, const GpccConfig & c)
{
  j = {{"window", c.window}, {"group", c.group}, {"conception", c.conception}, {"model", c.model}};
}

}  // namespace gpcc
