#ifndef GPCC__NN__TAPE_HPP_
#define GPCC__NN__TAPE_HPP_

#include "gpcc/nn/parameter.hpp"
#include "gpcc/nn/tensor.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace gpcc::nn
{

class Tape;

/// Handle to a value recorded on a Tape.
struct Var
{
  Tape * tape{nullptr};
  std::size_t id{0};

  const Tensor & value() const;
  const Shape & shape() const;
};

/// Records a forward computation so gradients can be propagated in reverse.
///
/// Parameter leaves alias the parameter storage: backward() accumulates straight into
/// Parameter::grad. A tape is single-use and must not outlive the parameters it references.
class Tape
{
public:
  Tape() = default;
  Tape(const Tape &) = delete;
  Tape & operator=(const Tape &) = delete;

  Var constant(Tensor value);
  Var param(Parameter & p);

  const Tensor & value(const Var & v) const;
  /// Gradient buffer of `v`, allocated as zeros on first access.
  Tensor & grad(const Var & v);
  bool requires_grad(const Var & v) const { return nodes_[v.id].requires_grad; }

  /// Seeds d(loss)/d(loss) = 1 and runs every recorded backward step in reverse order.
  void backward(const Var & loss);

  std::size_t size() const noexcept { return nodes_.size(); }

  /// Backward step of an op: receives the id of its own output node.
  using BackwardFn = std::function<void(std::size_t self)>;

  /// Used by op implementations. `backward` is dropped when no input requires a gradient.
  Var record(Tensor value, bool requires_grad, BackwardFn backward);
  Tensor & grad(std::size_t id) { return grad(Var{this, id}); }

private:
  struct Node
  {
    Tensor value;
    Tensor grad;
    Parameter * param{nullptr};
    bool requires_grad{false};
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
};

// Ops. Shapes use [..., n] for "any leading dims, last dim n".

/// x [..., in] * w [in, out] + b [out]
Var linear(Var x, Var w, Var b);
Var add(Var a, Var b);
inline Var operator+(Var a, Var b) { return add(a, b); }
Var relu(Var x);
Var tanh(Var x);
/// Concatenation along the last dimension; leading shapes must agree.
Var concat_last(std::span<const Var> parts);
Var reshape(Var x, Shape shape);
/// Normalizes over the last dimension, then scales by gain [n] and shifts by shift [n].
Var layer_norm(Var x, Var gain, Var shift, double eps = 1e-5);
/// Scaled dot-product attention per head. q [B, Lq, d], k and v [B, Lk, d].
/// When `weights` is given it receives the softmax weights as [B, heads, Lq, Lk].
Var attention(Var q, Var k, Var v, std::size_t heads, Tensor * weights = nullptr);
/// x [B, C] -> [B, n, C]
Var repeat_rows(Var x, std::size_t n);
/// Mean of the rows of x [M, ...] that share an owner; owners without rows get zeros.
/// Output is [groups, ...].
Var segment_mean(Var x, std::vector<std::size_t> owner, std::size_t groups);
/// Per-instance min over k of the L2 norm of pred[b, k, :] - truth[b, :]. pred [B, K, F].
Var best_of_k_l2(Var pred, const Tensor & truth);
/// Mean of all entries, as a [1] tensor.
Var mean(Var x);
/// Sum of x * w over all entries, as a [1] tensor.
Var weighted_sum(Var x, const Tensor & w);

}  // namespace gpcc::nn

#endif  // GPCC__NN__TAPE_HPP_
