#include "gpcc/nn/tensor.hpp"

#include "gpcc/error.hpp"

#include <cmath>
#include <functional>
#include <numeric>

namespace gpcc::nn
{

std::size_t shape_size(const Shape & shape) noexcept
{
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape & shape)
{
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    s += (i ? ", " : "") + std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data))
{
  if (data_.size() != shape_size(shape_)) {
    throw ShapeError(
      "tensor data length " + std::to_string(data_.size()) + " does not match shape " + shape_string(shape_));
  }
}

void Tensor::reshape(Shape shape)
{
  if (shape_size(shape) != data_.size()) {
    throw ShapeError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  }
  shape_ = std::move(shape);
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const noexcept
{
  for (double v : data_) {
    if (!std::isfinite(v)) {
      return false;
    }
  }
  return true;
}

void Tensor::accumulate(const Tensor & other)
{
  if (other.size() != size()) {
    throw ShapeError("accumulate: " + shape_string(shape_) + " vs " + shape_string(other.shape_));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    data_[i] += other.data_[i];
  }
}

}  // namespace gpcc::nn
