#ifndef GPCC__NN__CHECKPOINT_HPP_
#define GPCC__NN__CHECKPOINT_HPP_

#include "gpcc/nn/parameter.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gpcc::nn
{

// Binary layout, little-endian:
//   "GPCCCKPT" | u32 version | u64 config_hash | u64 len | config text
//   u64 parameter count, then per parameter:
//   u64 len | name | u64 rank | u64 dims[rank] | f64 value[] | f64 m[] | f64 v[] | i64 step

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

struct CheckpointData
{
  std::uint32_t version{kCheckpointVersion};
  std::uint64_t config_hash{0};
  std::string config_text;

  struct Entry
  {
    std::string name;
    Shape shape;
    std::vector<double> value;
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    std::int64_t step{0};
  };
  std::vector<Entry> parameters;
};

void write_checkpoint(std::ostream & out, const ParameterStore & store, const std::string & config_text);
void save_checkpoint(
  const std::filesystem::path & path, const ParameterStore & store, const std::string & config_text);

/// Parses and validates a checkpoint. When `expected_config_hash` is set the embedded hash
/// must equal it. Throws CheckpointError.
CheckpointData read_checkpoint(std::istream & in, std::optional<std::uint64_t> expected_config_hash = {});
CheckpointData load_checkpoint(
  const std::filesystem::path & path, std::optional<std::uint64_t> expected_config_hash = {});

/// Copies values and optimizer state into `store`; names and shapes must match exactly.
void restore_parameters(ParameterStore & store, const CheckpointData & data);

/// Hash of every parameter value and optimizer state, for reproducibility checks.
std::uint64_t parameter_digest(const ParameterStore & store);

}  // namespace gpcc::nn

#endif  // GPCC__NN__CHECKPOINT_HPP_
