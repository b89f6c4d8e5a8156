#ifndef GPCC__NN__PARAMETER_HPP_
#define GPCC__NN__PARAMETER_HPP_

#include "gpcc/nn/tensor.hpp"
#include "gpcc/random.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace gpcc::nn
{

/// Trainable tensor with its gradient and Adam moments.
struct Parameter
{
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor first_moment;
  Tensor second_moment;
  std::int64_t step{0};

  Parameter(std::string n, Shape shape)
  : name(std::move(n)), value(shape), grad(shape), first_moment(shape), second_moment(std::move(shape))
  {
  }

  void zero_grad() { grad.fill(0.0); }
};

/// Owns parameters at stable addresses, in creation order.
class ParameterStore
{
public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore &) = delete;
  ParameterStore & operator=(const ParameterStore &) = delete;
  ParameterStore(ParameterStore &&) noexcept = default;
  ParameterStore & operator=(ParameterStore &&) noexcept = default;

  /// New zero-valued parameter. Throws gpcc::Error on a duplicate name.
  Parameter & add(const std::string & name, Shape shape);

  Parameter * find(const std::string & name);
  const Parameter * find(const std::string & name) const;

  std::vector<Parameter *> all();
  std::vector<const Parameter *> all() const;
  std::size_t count() const noexcept { return params_.size(); }
  std::size_t scalar_count() const noexcept;
  void zero_grad();

private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

/// Uniform in +-sqrt(6 / (fan_in + fan_out)).
void init_glorot_uniform(Parameter & p, std::size_t fan_in, std::size_t fan_out, Rng & rng);

}  // namespace gpcc::nn

#endif  // GPCC__NN__PARAMETER_HPP_
