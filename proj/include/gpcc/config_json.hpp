#ifndef GPCC__CONFIG_JSON_HPP_
#define GPCC__CONFIG_JSON_HPP_

#include "gpcc/model.hpp"
#include "gpcc/nn/optim.hpp"

#include <json.hpp>

#include <string>

namespace gpcc
{

// Readers take the dotted path of the object being read so errors can name the exact field.
// Missing fields keep their defaults; unknown fields and wrong types raise ConfigError.

WindowConfig window_config_from_json(const nlohmann::json & j, const std::string & path);
GroupConfig group_config_from_json(const nlohmann::json & j, const std::string & path);
ConceptionConfig conception_config_from_json(const nlohmann::json & j, const std::string & path);
ModelConfig model_config_from_json(const nlohmann::json & j, const std::string & path);
nn::AdamConfig adam_config_from_json(const nlohmann::json & j, const std::string & path);
/// Reads and validates a full model configuration.
GpccConfig gpcc_config_from_json(const nlohmann::json & j, const std::string & path);

void to_json(nlohmann::json & j, const WindowConfig & c);
void to_json(nlohmann::json & j, const GroupConfig & c);
void to_json(nlohmann::json & j, const ConceptionConfig & c);
void to_json(nlohmann::json & j, const ModelConfig & c);
void to_json(nlohmann::json & j, const GpccConfig & c);

namespace json_field
{

std::string join(const std::string & path, const std::string & key);

/// Throws ConfigError when `j` is not an object or has a key outside `allowed`.
void expect_object(const nlohmann::json & j, const std::string & path, std::initializer_list<const char *> allowed);

void read(const nlohmann::json & j, const std::string & path, const char * key, int & out);
void read(const nlohmann::json & j, const std::string & path, const char * key, double & out);
void read(const nlohmann::json & j, const std::string & path, const char * key, bool & out);
void read(const nlohmann::json & j, const std::string & path, const char * key, std::string & out);
void read(const nlohmann::json & j, const std::string & path, const char * key, std::uint64_t & out);

}  // namespace json_field

}  // namespace gpcc

#endif  // GPCC__CONFIG_JSON_HPP_
