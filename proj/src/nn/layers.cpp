#include "gpcc/nn/layers.hpp"

#include <cmath>

namespace gpcc::nn
{

Linear Linear::create(ParameterStore & store, const std::string & name, std::size_t in, std::size_t out, Rng & rng)
{
  Linear l;
  l.weight = &store.add(name + ".weight", {in, out});
  l.bias = &store.add(name + ".bias", {out});
  init_glorot_uniform(*l.weight, in, out, rng);
  return l;
}

Var Linear::operator()(Var x) const
{
  Tape & t = *x.tape;
  return linear(x, t.param(*weight), t.param(*bias));
}

TwoLayerEmbedding TwoLayerEmbedding::create(
  ParameterStore & store, const std::string & name, std::size_t in, std::size_t width, Rng & rng)
{
  return {Linear::create(store, name + ".0", in, width, rng), Linear::create(store, name + ".1", width, width, rng)};
}

Var TwoLayerEmbedding::operator()(Var x) const { return tanh(output(relu(hidden(x)))); }

LayerNorm LayerNorm::create(ParameterStore & store, const std::string & name, std::size_t width)
{
  LayerNorm ln;
  ln.gain = &store.add(name + ".gain", {width});
  ln.shift = &store.add(name + ".shift", {width});
  ln.gain->value.fill(1.0);
  return ln;
}

Var LayerNorm::operator()(Var x) const
{
  Tape & t = *x.tape;
  return layer_norm(x, t.param(*gain), t.param(*shift));
}

MultiHeadAttention MultiHeadAttention::create(
  ParameterStore & store, const std::string & name, std::size_t width, std::size_t heads, Rng & rng)
{
  MultiHeadAttention m;
  m.query = Linear::create(store, name + ".query", width, width, rng);
  m.key = Linear::create(store, name + ".key", width, width, rng);
  m.value = Linear::create(store, name + ".value", width, width, rng);
  m.output = Linear::create(store, name + ".output", width, width, rng);
  m.heads = heads;
  return m;
}

Var MultiHeadAttention::operator()(Var q, Var k, Var v, Tensor * weights) const
{
  return output(attention(query(q), key(k), value(v), heads, weights));
}

FeedForward FeedForward::create(
  ParameterStore & store, const std::string & name, std::size_t width, std::size_t hidden, Rng & rng)
{
  return {Linear::create(store, name + ".up", width, hidden, rng), Linear::create(store, name + ".down", hidden, width, rng)};
}

Var FeedForward::operator()(Var x) const { return down(relu(up(x))); }

Tensor sinusoidal_positions(std::size_t length, std::size_t width)
{
  Tensor pe(Shape{length, width});
  for (std::size_t pos = 0; pos < length; ++pos) {
    for (std::size_t i = 0; i < width; ++i) {
      const double rate = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / static_cast<double>(width));
      const double angle = static_cast<double>(pos) * rate;
      pe[pos * width + i] = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  }
  return pe;
}

}  // namespace gpcc::nn
