#include "gpcc/nn/parameter.hpp"

#include "gpcc/error.hpp"

#include <cmath>

namespace gpcc::nn
{

Parameter & ParameterStore::add(const std::string & name, Shape shape)
{
  if (find(name) != nullptr) {
    throw Error("duplicate parameter name '" + name + "'");
  }
  params_.push_back(std::make_unique<Parameter>(name, std::move(shape)));
  return *params_.back();
}

Parameter * ParameterStore::find(const std::string & name)
{
  for (auto & p : params_) {
    if (p->name == name) {
      return p.get();
    }
  }
  return nullptr;
}

const Parameter * ParameterStore::find(const std::string & name) const
{
  return const_cast<ParameterStore *>(this)->find(name);
}

std::vector<Parameter *> ParameterStore::all()
{
  std::vector<Parameter *> out;
  for (auto & p : params_) {
    out.push_back(p.get());
  }
  return out;
}

std::vector<const Parameter *> ParameterStore::all() const
{
  std::vector<const Parameter *> out;
  for (const auto & p : params_) {
    out.push_back(p.get());
  }
  return out;
}

std::size_t ParameterStore::scalar_count() const noexcept
{
  std::size_t n = 0;
  for (const auto & p : params_) {
    n += p->value.size();
  }
  return n;
}

void ParameterStore::zero_grad()
{
  for (auto & p : params_) {
    p->zero_grad();
  }
}

void init_glorot_uniform(Parameter & p, std::size_t fan_in, std::size_t fan_out, Rng & rng)
{
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto & v : p.value.values()) {
    v = rng.uniform(-limit, limit);
  }
}

}  // namespace gpcc::nn
