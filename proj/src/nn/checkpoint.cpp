#include "gpcc/nn/checkpoint.hpp"

#include "gpcc/error.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace gpcc::nn
{
namespace
{

constexpr char kMagic[8] = {'G', 'P', 'C', 'C', 'C', 'K', 'P', 'T'};
// Guards against absurd allocations from a corrupt header.
constexpr std::uint64_t kMaxElements = 1ULL << 32;

template <typename T>
void put(std::ostream & out, T v)
{
  out.write(reinterpret_cast<const char *>(&v), sizeof(T));
}

void put_string(std::ostream & out, const std::string & s)
{
  put<std::uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void put_doubles(std::ostream & out, const Tensor & t)
{
  out.write(reinterpret_cast<const char *>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
}

template <typename T>
T get(std::istream & in)
{
  T v{};
  if (!in.read(reinterpret_cast<char *>(&v), sizeof(T))) {
    throw CheckpointError("checkpoint is truncated");
  }
  return v;
}

std::string get_string(std::istream & in)
{
  const auto n = get<std::uint64_t>(in);
  if (n > kMaxElements) {
    throw CheckpointError("checkpoint string length is implausible");
  }
  std::string s(n, '\0');
  if (n > 0 && !in.read(s.data(), static_cast<std::streamsize>(n))) {
    throw CheckpointError("checkpoint is truncated");
  }
  return s;
}

std::vector<double> get_doubles(std::istream & in, std::size_t n)
{
  std::vector<double> v(n);
  if (n > 0 && !in.read(reinterpret_cast<char *>(v.data()), static_cast<std::streamsize>(n * sizeof(double)))) {
    throw CheckpointError("checkpoint is truncated");
  }
  return v;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed)
{
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_checkpoint(std::ostream & out, const ParameterStore & store, const std::string & config_text)
{
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, fnv1a64(config_text));
  put_string(out, config_text);
  const auto params = store.all();
  put<std::uint64_t>(out, params.size());
  for (const Parameter * p : params) {
    put_string(out, p->name);
    put<std::uint64_t>(out, p->value.rank());
    for (std::size_t d : p->value.shape()) {
      put<std::uint64_t>(out, d);
    }
    put_doubles(out, p->value);
    put_doubles(out, p->first_moment);
    put_doubles(out, p->second_moment);
    put<std::int64_t>(out, p->step);
  }
}

void save_checkpoint(const std::filesystem::path & path, const ParameterStore & store, const std::string & config_text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw CheckpointError("cannot write checkpoint: " + path.string());
  }
  write_checkpoint(out, store, config_text);
  if (!out) {
    throw CheckpointError("failed writing checkpoint: " + path.string());
  }
}

CheckpointData read_checkpoint(std::istream & in, std::optional<std::uint64_t> expected_config_hash)
{
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError("not a checkpoint file (bad magic)");
  }
  CheckpointData data;
  data.version = get<std::uint32_t>(in);
  if (data.version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(data.version));
  }
  data.config_hash = get<std::uint64_t>(in);
  data.config_text = get_string(in);
  if (fnv1a64(data.config_text) != data.config_hash) {
    throw CheckpointError("checkpoint config block does not match its hash");
  }
  if (expected_config_hash && *expected_config_hash != data.config_hash) {
    throw CheckpointError("checkpoint was written for a different configuration (config hash mismatch)");
  }
  const auto count = get<std::uint64_t>(in);
  if (count > kMaxElements) {
    throw CheckpointError("checkpoint parameter count is implausible");
  }
  for (std::uint64_t i = 0; i < count; ++i) {
    CheckpointData::Entry e;
    e.name = get_string(in);
    const auto rank = get<std::uint64_t>(in);
    if (rank > 8) {
      throw CheckpointError("parameter '" + e.name + "' has implausible rank");
    }
    std::uint64_t n = 1;
    for (std::uint64_t r = 0; r < rank; ++r) {
      const auto d = get<std::uint64_t>(in);
      e.shape.push_back(static_cast<std::size_t>(d));
      n *= d;
      if (n > kMaxElements) {
        throw CheckpointError("parameter '" + e.name + "' is implausibly large");
      }
    }
    e.value = get_doubles(in, n);
    e.first_moment = get_doubles(in, n);
    e.second_moment = get_doubles(in, n);
    e.step = get<std::int64_t>(in);
    data.parameters.push_back(std::move(e));
  }
  return data;
}

CheckpointData load_checkpoint(const std::filesystem::path & path, std::optional<std::uint64_t> expected_config_hash)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw NotFoundError("checkpoint not found: " + path.string());
  }
  return read_checkpoint(in, expected_config_hash);
}

void restore_parameters(ParameterStore & store, const CheckpointData & data)
{
  if (data.parameters.size() != store.count()) {
    throw CheckpointError(
      "checkpoint has " + std::to_string(data.parameters.size()) + " parameters, model expects " +
      std::to_string(store.count()));
  }
  for (const auto & e : data.parameters) {
    Parameter * p = store.find(e.name);
    if (p == nullptr) {
      throw CheckpointError("checkpoint parameter '" + e.name + "' is not part of the model");
    }
    if (p->value.shape() != e.shape) {
      throw CheckpointError(
        "parameter '" + e.name + "' has shape " + shape_string(e.shape) + ", model expects " +
        shape_string(p->value.shape()));
    }
    p->value = Tensor(e.shape, e.value);
    p->first_moment = Tensor(e.shape, e.first_moment);
    p->second_moment = Tensor(e.shape, e.second_moment);
    p->grad = Tensor(e.shape);
    p->step = e.step;
  }
}

std::uint64_t parameter_digest(const ParameterStore & store)
{
  std::ostringstream buf;
  write_checkpoint(buf, store, "");
  return fnv1a64(buf.str());
}

}  // namespace gpcc::nn
