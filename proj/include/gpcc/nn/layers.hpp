#ifndef GPCC__NN__LAYERS_HPP_
#define GPCC__NN__LAYERS_HPP_

#include "gpcc/nn/parameter.hpp"
#include "gpcc/nn/tape.hpp"

#include <string>

namespace gpcc::nn
{

/// Affine map y = x W + b with W [in, out].
struct Linear
{
  Parameter * weight{nullptr};
  Parameter * bias{nullptr};

  static Linear create(ParameterStore & store, const std::string & name, std::size_t in, std::size_t out, Rng & rng);
  Var operator()(Var x) const;
};

/// Two affine layers, ReLU after the first and tanh after the second.
struct TwoLayerEmbedding
{
  Linear hidden;
  Linear output;

  static TwoLayerEmbedding create(
    ParameterStore & store, const std::string & name, std::size_t in, std::size_t width, Rng & rng);
  Var operator()(Var x) const;
};

struct LayerNorm
{
  Parameter * gain{nullptr};
  Parameter * shift{nullptr};

  static LayerNorm create(ParameterStore & store, const std::string & name, std::size_t width);
  Var operator()(Var x) const;
};

/// Input projections, per-head scaled dot-product attention, concatenation and an
/// output projection.
struct MultiHeadAttention
{
  Linear query;
  Linear key;
  Linear value;
  Linear output;
  std::size_t heads{1};

  static MultiHeadAttention create(
    ParameterStore & store, const std::string & name, std::size_t width, std::size_t heads, Rng & rng);
  /// q [B, Lq, d]; k, v [B, Lk, d]. `weights` receives [B, heads, Lq, Lk] when non-null.
  Var operator()(Var q, Var k, Var v, Tensor * weights = nullptr) const;
};

struct FeedForward
{
  Linear up;
  Linear down;

  static FeedForward create(
    ParameterStore & store, const std::string & name, std::size_t width, std::size_t hidden, Rng & rng);
  Var operator()(Var x) const;
};

/// Sinusoidal position code for `length` steps of width `width`.
Tensor sinusoidal_positions(std::size_t length, std::size_t width);

}  // namespace gpcc::nn

#endif  // GPCC__NN__LAYERS_HPP_
