#include "gpcc/nn/tape.hpp"

#include "gpcc/error.hpp"
#include "gpcc/nn/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace gpcc::nn
{

const Tensor & Var::value() const { return tape->value(*this); }
const Shape & Var::shape() const { return tape->value(*this).shape(); }

Var Tape::constant(Tensor value)
{
  nodes_.push_back(Node{std::move(value), {}, nullptr, false, {}});
  return {this, nodes_.size() - 1};
}

Var Tape::param(Parameter & p)
{
  nodes_.push_back(Node{{}, {}, &p, true, {}});
  return {this, nodes_.size() - 1};
}

Var Tape::record(Tensor value, bool requires_grad, BackwardFn backward)
{
  nodes_.push_back(Node{std::move(value), {}, nullptr, requires_grad, requires_grad ? std::move(backward) : nullptr});
  return {this, nodes_.size() - 1};
}

const Tensor & Tape::value(const Var & v) const
{
  const Node & n = nodes_[v.id];
  return n.param != nullptr ? n.param->value : n.value;
}

Tensor & Tape::grad(const Var & v)
{
  Node & n = nodes_[v.id];
  if (n.param != nullptr) {
    return n.param->grad;
  }
  if (n.grad.size() != n.value.size()) {
    n.grad = Tensor(n.value.shape());
  }
  return n.grad;
}

void Tape::backward(const Var & loss)
{
  if (value(loss).size() != 1) {
    throw ShapeError("backward needs a scalar loss, got " + shape_string(value(loss).shape()));
  }
  grad(loss)[0] += 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node & n = nodes_[i];
    // Nodes whose gradient was never touched do not influence the loss.
    if (n.backward && n.grad.size() == n.value.size() && n.value.size() > 0) {
      n.backward(i);
    }
  }
}

namespace
{

void require(bool ok, const std::string & what)
{
  if (!ok) {
    throw ShapeError(what);
  }
}

bool any_requires(std::initializer_list<Var> vs)
{
  return std::any_of(vs.begin(), vs.end(), [](const Var & v) { return v.tape->requires_grad(v); });
}

}  // namespace

Var linear(Var x, Var w, Var b)
{
  Tape & t = *x.tape;
  const Tensor & xv = x.value();
  const Tensor & wv = w.value();
  const Tensor & bv = b.value();
  require(wv.rank() == 2, "linear: weight must be 2-D, got " + shape_string(wv.shape()));
  const std::size_t in = wv.dim(0);
  const std::size_t out = wv.dim(1);
  require(xv.rank() >= 1 && xv.cols() == in,
    "linear: input " + shape_string(xv.shape()) + " does not match weight " + shape_string(wv.shape()));
  require(bv.size() == out, "linear: bias " + shape_string(bv.shape()) + " does not match output width");

  const std::size_t rows = xv.rows();
  Shape shape = xv.shape();
  shape.back() = out;
  Tensor y(shape);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy(bv.data(), bv.data() + out, y.data() + r * out);
  }
  kernels::gemm(xv.data(), wv.data(), y.data(), rows, in, out);

  return t.record(std::move(y), any_requires({x, w, b}), [&t, x, w, b, rows, in, out](std::size_t self) {
    const Tensor & gy = t.grad(self);
    if (t.requires_grad(x)) {
      kernels::gemm_nt(gy.data(), t.value(w).data(), t.grad(x).data(), rows, out, in);
    }
    if (t.requires_grad(w)) {
      kernels::gemm_tn(t.value(x).data(), gy.data(), t.grad(w).data(), rows, in, out);
    }
    if (t.requires_grad(b)) {
      Tensor & gb = t.grad(b);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < out; ++j) {
          gb[j] += gy[r * out + j];
        }
      }
    }
  });
}

Var add(Var a, Var b)
{
  Tape & t = *a.tape;
  const Tensor & av = a.value();
  const Tensor & bv = b.value();
  require(av.shape() == bv.shape(), "add: " + shape_string(av.shape()) + " vs " + shape_string(bv.shape()));
  Tensor y = av;
  y.accumulate(bv);
  return t.record(std::move(y), any_requires({a, b}), [&t, a, b](std::size_t self) {
    const Tensor & g = t.grad(self);
    if (t.requires_grad(a)) {
      t.grad(a).accumulate(g);
    }
    if (t.requires_grad(b)) {
      t.grad(b).accumulate(g);
    }
  });
}

Var relu(Var x)
{
  Tape & t = *x.tape;
  Tensor y = x.value();
  for (auto & v : y.values()) {
    v = v < 0.0 ? 0.0 : v;
  }
  return t.record(std::move(y), any_requires({x}), [&t, x](std::size_t self) {
    const Tensor & g = t.grad(self);
    const Tensor & xv = t.value(x);
    Tensor & gx = t.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (xv[i] > 0.0) {
        gx[i] += g[i];
      }
    }
  });
}

Var tanh(Var x)
{
  Tape & t = *x.tape;
  Tensor y = x.value();
  for (auto & v : y.values()) {
    v = std::tanh(v);
  }
  return t.record(std::move(y), any_requires({x}), [&t, x](std::size_t self) {
    const Tensor & g = t.grad(self);
    const Tensor & yv = t.value(Var{&t, self});
    Tensor & gx = t.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) {
      gx[i] += g[i] * (1.0 - yv[i] * yv[i]);
    }
  });
}

Var concat_last(std::span<const Var> parts)
{
  require(!parts.empty(), "concat_last: no inputs");
  Tape & t = *parts.front().tape;
  const Tensor & first = parts.front().value();
  const std::size_t rows = first.rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  bool needs_grad = false;
  for (const auto & p : parts) {
    const Tensor & v = p.value();
    Shape lead_a(first.shape().begin(), first.shape().end() - 1);
    Shape lead_b(v.shape().begin(), v.shape().end() - 1);
    require(lead_a == lead_b, "concat_last: leading shapes differ: " + shape_string(first.shape()) + " vs " +
                                shape_string(v.shape()));
    widths.push_back(v.cols());
    total += v.cols();
    needs_grad = needs_grad || t.requires_grad(p);
  }
  Shape shape = first.shape();
  shape.back() = total;
  Tensor y(shape);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor & v = parts[k].value();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy(v.data() + r * widths[k], v.data() + (r + 1) * widths[k], y.data() + r * total + offset);
    }
    offset += widths[k];
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return t.record(std::move(y), needs_grad, [&t, inputs, widths, rows, total](std::size_t self) {
    const Tensor & g = t.grad(self);
    std::size_t off = 0;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
      if (t.requires_grad(inputs[k])) {
        Tensor & gk = t.grad(inputs[k]);
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t j = 0; j < widths[k]; ++j) {
            gk[r * widths[k] + j] += g[r * total + off + j];
          }
        }
      }
      off += widths[k];
    }
  });
}

Var reshape(Var x, Shape shape)
{
  Tape & t = *x.tape;
  Tensor y = x.value();
  y.reshape(std::move(shape));
  return t.record(std::move(y), any_requires({x}), [&t, x](std::size_t self) {
    t.grad(x).accumulate(t.grad(self));
  });
}

Var layer_norm(Var x, Var gain, Var shift, double eps)
{
  Tape & t = *x.tape;
  const Tensor & xv = x.value();
  const std::size_t n = xv.cols();
  const std::size_t rows = xv.rows();
  require(gain.value().size() == n && shift.value().size() == n,
    "layer_norm: gain/shift width does not match input " + shape_string(xv.shape()));

  auto normalized = std::make_shared<Tensor>(xv.shape());
  auto inv_std = std::make_shared<std::vector<double>>(rows);
  Tensor y(xv.shape());
  const Tensor & gv = gain.value();
  const Tensor & sv = shift.value();
  for (std::size_t r = 0; r < rows; ++r) {
    const double * xr = xv.data() + r * n;
    double mu = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      mu += xr[j];
    }
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      var += (xr[j] - mu) * (xr[j] - mu);
    }
    var /= static_cast<double>(n);
    const double rs = 1.0 / std::sqrt(var + eps);
    (*inv_std)[r] = rs;
    for (std::size_t j = 0; j < n; ++j) {
      const double h = (xr[j] - mu) * rs;
      (*normalized)[r * n + j] = h;
      y[r * n + j] = h * gv[j] + sv[j];
    }
  }
  return t.record(std::move(y), any_requires({x, gain, shift}),
    [&t, x, gain, shift, normalized, inv_std, rows, n](std::size_t self) {
      const Tensor & g = t.grad(self);
      const Tensor & gv = t.value(gain);
      if (t.requires_grad(gain) || t.requires_grad(shift)) {
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t j = 0; j < n; ++j) {
            if (t.requires_grad(gain)) {
              t.grad(gain)[j] += g[r * n + j] * (*normalized)[r * n + j];
            }
            if (t.requires_grad(shift)) {
              t.grad(shift)[j] += g[r * n + j];
            }
          }
        }
      }
      if (!t.requires_grad(x)) {
        return;
      }
      Tensor & gx = t.grad(x);
      std::vector<double> gh(n);
      for (std::size_t r = 0; r < rows; ++r) {
        double mean_gh = 0.0;
        double mean_gh_h = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          gh[j] = g[r * n + j] * gv[j];
          mean_gh += gh[j];
          mean_gh_h += gh[j] * (*normalized)[r * n + j];
        }
        mean_gh /= static_cast<double>(n);
        mean_gh_h /= static_cast<double>(n);
        const double rs = (*inv_std)[r];
        for (std::size_t j = 0; j < n; ++j) {
          gx[r * n + j] += rs * (gh[j] - mean_gh - (*normalized)[r * n + j] * mean_gh_h);
        }
      }
    });
}

Var attention(Var q, Var k, Var v, std::size_t heads, Tensor * weights)
{
  Tape & t = *q.tape;
  const Tensor & qv = q.value();
  const Tensor & kv = k.value();
  const Tensor & vv = v.value();
  require(qv.rank() == 3 && kv.rank() == 3 && vv.rank() == 3, "attention: inputs must be [B, L, d]");
  const std::size_t batch = qv.dim(0);
  const std::size_t lq = qv.dim(1);
  const std::size_t lk = kv.dim(1);
  const std::size_t d = qv.dim(2);
  require(kv.dim(0) == batch && vv.dim(0) == batch, "attention: batch sizes differ");
  require(kv.dim(2) == d && vv.dim(2) == d, "attention: feature widths differ");
  require(vv.dim(1) == lk, "attention: keys and values have different lengths");
  require(heads > 0 && d % heads == 0,
    "attention: width " + std::to_string(d) + " is not divisible by " + std::to_string(heads) + " heads");
  const std::size_t dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  auto probs = std::make_shared<Tensor>(Shape{batch, heads, lq, lk});
  Tensor y(Shape{batch, lq, d});
  const auto jobs = static_cast<std::ptrdiff_t>(batch * heads);
#pragma omp parallel for schedule(static) if (jobs > 8)
  for (std::ptrdiff_t job = 0; job < jobs; ++job) {
    const std::size_t b = static_cast<std::size_t>(job) / heads;
    const std::size_t h = static_cast<std::size_t>(job) % heads;
    const double * qb = qv.data() + b * lq * d + h * dh;
    const double * kb = kv.data() + b * lk * d + h * dh;
    const double * vb = vv.data() + b * lk * d + h * dh;
    double * a = probs->data() + (b * heads + h) * lq * lk;
    double * yb = y.data() + b * lq * d + h * dh;
    for (std::size_t i = 0; i < lq; ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < lk; ++j) {
        double s = 0.0;
        for (std::size_t c = 0; c < dh; ++c) {
          s += qb[i * d + c] * kb[j * d + c];
        }
        a[i * lk + j] = s * scale;
        mx = std::max(mx, a[i * lk + j]);
      }
      double z = 0.0;
      for (std::size_t j = 0; j < lk; ++j) {
        a[i * lk + j] = std::exp(a[i * lk + j] - mx);
        z += a[i * lk + j];
      }
      for (std::size_t j = 0; j < lk; ++j) {
        a[i * lk + j] /= z;
      }
      for (std::size_t j = 0; j < lk; ++j) {
        const double aij = a[i * lk + j];
        for (std::size_t c = 0; c < dh; ++c) {
          yb[i * d + c] += aij * vb[j * d + c];
        }
      }
    }
  }
  if (weights != nullptr) {
    *weights = *probs;
  }

  return t.record(std::move(y), any_requires({q, k, v}),
    [&t, q, k, v, probs, batch, heads, lq, lk, d, dh, scale](std::size_t self) {
      const Tensor & g = t.grad(self);
      const Tensor & qv = t.value(q);
      const Tensor & kv = t.value(k);
      const Tensor & vv = t.value(v);
      const bool need_q = t.requires_grad(q);
      const bool need_k = t.requires_grad(k);
      const bool need_v = t.requires_grad(v);
      double * gq = need_q ? t.grad(q).data() : nullptr;
      double * gk = need_k ? t.grad(k).data() : nullptr;
      double * gv = need_v ? t.grad(v).data() : nullptr;
      const auto jobs = static_cast<std::ptrdiff_t>(batch * heads);
#pragma omp parallel for schedule(static) if (jobs > 8)
      for (std::ptrdiff_t job = 0; job < jobs; ++job) {
        const std::size_t b = static_cast<std::size_t>(job) / heads;
        const std::size_t h = static_cast<std::size_t>(job) % heads;
        const std::size_t qoff = b * lq * d + h * dh;
        const std::size_t koff = b * lk * d + h * dh;
        const double * a = probs->data() + (b * heads + h) * lq * lk;
        std::vector<double> ds(lk);
        for (std::size_t i = 0; i < lq; ++i) {
          const double * gi = g.data() + qoff + i * d;
          double dot = 0.0;
          for (std::size_t j = 0; j < lk; ++j) {
            double da = 0.0;
            for (std::size_t c = 0; c < dh; ++c) {
              da += gi[c] * vv[koff + j * d + c];
            }
            ds[j] = da;
            dot += da * a[i * lk + j];
          }
          for (std::size_t j = 0; j < lk; ++j) {
            const double aij = a[i * lk + j];
            ds[j] = aij * (ds[j] - dot) * scale;
            if (need_v) {
              for (std::size_t c = 0; c < dh; ++c) {
                gv[koff + j * d + c] += aij * gi[c];
              }
            }
            if (need_q) {
              for (std::size_t c = 0; c < dh; ++c) {
                gq[qoff + i * d + c] += ds[j] * kv[koff + j * d + c];
              }
            }
            if (need_k) {
              for (std::size_t c = 0; c < dh; ++c) {
                gk[koff + j * d + c] += ds[j] * qv[qoff + i * d + c];
              }
            }
          }
        }
      }
    });
}

Var repeat_rows(Var x, std::size_t n)
{
  Tape & t = *x.tape;
  const Tensor & xv = x.value();
  require(xv.rank() == 2, "repeat_rows: input must be [B, C], got " + shape_string(xv.shape()));
  const std::size_t batch = xv.dim(0);
  const std::size_t c = xv.dim(1);
  Tensor y(Shape{batch, n, c});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t i = 0; i < n; ++i) {
      std::copy(xv.data() + b * c, xv.data() + (b + 1) * c, y.data() + (b * n + i) * c);
    }
  }
  return t.record(std::move(y), any_requires({x}), [&t, x, batch, n, c](std::size_t self) {
    const Tensor & g = t.grad(self);
    Tensor & gx = t.grad(x);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
          gx[b * c + j] += g[(b * n + i) * c + j];
        }
      }
    }
  });
}

Var segment_mean(Var x, std::vector<std::size_t> owner, std::size_t groups)
{
  Tape & t = *x.tape;
  const Tensor & xv = x.value();
  require(xv.rank() >= 1 && xv.dim(0) == owner.size(), "segment_mean: one owner per row required");
  const std::size_t width = owner.empty() ? shape_size(Shape(xv.shape().begin() + 1, xv.shape().end()))
                                          : xv.size() / owner.size();
  std::vector<double> count(groups, 0.0);
  for (const auto o : owner) {
    require(o < groups, "segment_mean: owner index out of range");
    count[o] += 1.0;
  }
  Shape shape = xv.shape();
  shape[0] = groups;
  Tensor y(shape);
  for (std::size_t r = 0; r < owner.size(); ++r) {
    for (std::size_t j = 0; j < width; ++j) {
      y[owner[r] * width + j] += xv[r * width + j];
    }
  }
  for (std::size_t gi = 0; gi < groups; ++gi) {
    if (count[gi] > 0.0) {
      for (std::size_t j = 0; j < width; ++j) {
        y[gi * width + j] /= count[gi];
      }
    }
  }
  return t.record(std::move(y), any_requires({x}),
    [&t, x, owner = std::move(owner), count = std::move(count), width](std::size_t self) {
      const Tensor & g = t.grad(self);
      Tensor & gx = t.grad(x);
      for (std::size_t r = 0; r < owner.size(); ++r) {
        const double inv = 1.0 / count[owner[r]];
        for (std::size_t j = 0; j < width; ++j) {
          gx[r * width + j] += g[owner[r] * width + j] * inv;
        }
      }
    });
}

Var best_of_k_l2(Var pred, const Tensor & truth)
{
  Tape & t = *pred.tape;
  const Tensor & pv = pred.value();
  require(pv.rank() == 3, "best_of_k_l2: predictions must be [B, K, F]");
  const std::size_t batch = pv.dim(0);
  const std::size_t k = pv.dim(1);
  const std::size_t f = pv.dim(2);
  require(k > 0, "best_of_k_l2: no candidates");
  require(truth.size() == batch * f,
    "best_of_k_l2: truth " + shape_string(truth.shape()) + " does not match predictions " + shape_string(pv.shape()));
  auto best = std::make_shared<std::vector<std::size_t>>(batch);
  Tensor y(Shape{batch});
  for (std::size_t b = 0; b < batch; ++b) {
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < f; ++j) {
        const double e = pv[(b * k + c) * f + j] - truth[b * f + j];
        s += e * e;
      }
      const double dist = std::sqrt(s);
      if (dist < best_d) {
        best_d = dist;
        (*best)[b] = c;
      }
    }
    y[b] = best_d;
  }
  return t.record(std::move(y), any_requires({pred}), [&t, pred, truth, best, batch, k, f](std::size_t self) {
    const Tensor & g = t.grad(self);
    const Tensor & yv = t.value(Var{&t, self});
    const Tensor & pv = t.value(pred);
    Tensor & gp = t.grad(pred);
    for (std::size_t b = 0; b < batch; ++b) {
      if (yv[b] <= 0.0) {
        continue;
      }
      const std::size_t c = (*best)[b];
      for (std::size_t j = 0; j < f; ++j) {
        const std::size_t idx = (b * k + c) * f + j;
        gp[idx] += g[b] * (pv[idx] - truth[b * f + j]) / yv[b];
      }
    }
  });
}

Var mean(Var x)
{
  Tape & t = *x.tape;
  const Tensor & xv = x.value();
  require(xv.size() > 0, "mean: empty tensor");
  double s = 0.0;
  for (double v : xv.values()) {
    s += v;
  }
  const double n = static_cast<double>(xv.size());
  return t.record(Tensor(Shape{1}, {s / n}), any_requires({x}), [&t, x, n](std::size_t self) {
    const double g = t.grad(self)[0] / n;
    for (auto & v : t.grad(x).values()) {
      v += g;
    }
  });
}

Var weighted_sum(Var x, const Tensor & w)
{
  Tape & t = *x.tape;
  const Tensor & xv = x.value();
  require(w.size() == xv.size(), "weighted_sum: weight size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) {
    s += xv[i] * w[i];
  }
  return t.record(Tensor(Shape{1}, {s}), any_requires({x}), [&t, x, w](std::size_t self) {
    const double g = t.grad(self)[0];
    Tensor & gx = t.grad(x);
    for (std::size_t i = 0; i < gx.size(); ++i) {
      gx[i] += g * w[i];
    }
  });
}

}  // namespace gpcc::nn
