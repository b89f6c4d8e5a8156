#ifndef GPCC__NN__TENSOR_HPP_
#define GPCC__NN__TENSOR_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace gpcc::nn
{

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape & shape) noexcept;
std::string shape_string(const Shape & shape);

/// Dense row-major array of doubles.
class Tensor
{
public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  const Shape & shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  /// Size of the last dimension.
  std::size_t cols() const noexcept { return shape_.empty() ? 1 : shape_.back(); }
  /// Product of all leading dimensions.
  std::size_t rows() const noexcept { return shape_.empty() ? 1 : data_.size() / shape_.back(); }

  double * data() noexcept { return data_.data(); }
  const double * data() const noexcept { return data_.data(); }
  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  const std::vector<double> & storage() const noexcept { return data_; }

  double & operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  /// Keeps the data, changes the shape. Throws ShapeError when sizes differ.
  void reshape(Shape shape);
  void fill(double v);
  bool all_finite() const noexcept;

  /// Element-wise `this += other`; shapes must have equal size.
  void accumulate(const Tensor & other);

private:
  Shape shape_;
  std::vector<double> data_;
};

}  // namespace gpcc::nn

#endif  // GPCC__NN__TENSOR_HPP_
