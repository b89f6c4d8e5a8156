#ifndef GPCC__NN__OPTIM_HPP_
#define GPCC__NN__OPTIM_HPP_

#include "gpcc/nn/parameter.hpp"
#include "gpcc/nn/tape.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>

namespace gpcc::nn
{

struct AdamConfig
{
  double learning_rate{0.0002};
  double beta1{0.9};
  double beta2{0.999};
  double epsilon{1e-8};

  void validate() const;
};

/// Bias-corrected Adam update of every parameter; zeroes gradients afterwards.
void adam_step(std::span<Parameter * const> params, const AdamConfig & cfg);

struct GradCheckOptions
{
  double step{1e-5};
  double tolerance{1e-4};
  /// Coordinates sampled; every coordinate is checked when there are fewer.
  std::size_t samples{100};
  /// Lower bound on the error denominator. Coordinates whose gradient is below this are
  /// compared by absolute error scaled by the floor.
  double denominator_floor{1e-6};
  std::uint64_t seed{0};
};

struct GradCheckReport
{
  double max_relative_error{0.0};
  std::size_t coordinates_checked{0};
  std::string worst_parameter;
  std::size_t worst_index{0};
  double worst_analytic{0.0};
  double worst_numeric{0.0};
  bool passed{false};
};

/// Builds a fresh graph and returns a scalar loss.
using LossBuilder = std::function<Var(Tape &)>;

/// Compares reverse-mode gradients with central differences (f(x+h) - f(x-h)) / 2h on a
/// sample of parameter coordinates. Relative error is |a - n| / max(|a|, |n|, floor).
/// Throws NumericError when the loss is not finite. Parameter values are restored.
GradCheckReport finite_diff_check(
  const LossBuilder & loss, std::span<Parameter * const> params, const GradCheckOptions & options = {});

}  // namespace gpcc::nn

#endif  // GPCC__NN__OPTIM_HPP_
