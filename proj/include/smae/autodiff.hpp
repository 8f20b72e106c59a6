#ifndef SMAE_AUTODIFF_HPP
#define SMAE_AUTODIFF_HPP

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "smae/tensor.hpp"

namespace smae {

// Reverse-mode autodiff on a Wengert list. A Tape owns the ordered adjoint
// records of one forward pass; replaying them in reverse accumulates each
// leaf gradient exactly once per use. Tapes are built per step and discarded
// after backward; there is no higher-order differentiation.

template <typename Scalar>
struct TapeNode {
  Tensor<Scalar> value;
  Tensor<Scalar> grad;  // allocated iff requires_grad
  bool requires_grad = false;
};

template <typename Scalar>
class Tape;

template <typename Scalar>
class Var {
 public:
  Var() = default;

  bool defined() const { return node_ != nullptr; }
  const Tensor<Scalar>& value() const { return node_->value; }
  bool requires_grad() const { return node_ && node_->requires_grad; }

  const Tensor<Scalar>& grad() const {
    if (!requires_grad()) {
      throw ContractError("grad() on a var that does not require gradients");
    }
    return node_->grad;
  }

  const std::shared_ptr<TapeNode<Scalar>>& node() const { return node_; }
  Tape<Scalar>* tape() const { return tape_; }

 private:
  friend class Tape<Scalar>;
  Var(std::shared_ptr<TapeNode<Scalar>> node, Tape<Scalar>* tape)
      : node_(std::move(node)), tape_(tape) {}

  std::shared_ptr<TapeNode<Scalar>> node_;
  Tape<Scalar>* tape_ = nullptr;
};

template <typename Scalar>
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<Scalar> leaf(Tensor<Scalar> value, bool requires_grad = false) {
    return make(std::move(value), requires_grad);
  }

  Var<Scalar> constant(Tensor<Scalar> value) { return make(std::move(value), false); }

  // Output node of a primitive op; `requires_grad` is the OR of its inputs'.
  Var<Scalar> output(Tensor<Scalar> value, bool requires_grad) {
    return make(std::move(value), requires_grad);
  }

  // Public so tests can register hand-crafted (including deliberately wrong)
  // adjoints next to the built-in primitives.
  void record(std::function<void()> adjoint) {
    adjoints_.push_back(std::move(adjoint));
  }

  std::size_t num_records() const { return adjoints_.size(); }
  std::size_t num_nodes() const { return num_nodes_; }

  // Seeds d(loss)/d(loss) = 1 and replays all adjoints in reverse order.
  // Calling backward again without clearing grads accumulates on top of the
  // previous pass.
  void backward(const Var<Scalar>& loss) {
    if (!loss.defined() || loss.tape() != this) {
      throw ContractError("backward: loss does not belong to this tape");
    }
    if (loss.value().size() != 1) {
      throw ContractError("backward: loss must be scalar, got dims " +
                          dims_to_string(loss.value().dims()));
    }
    if (!loss.requires_grad()) return;  // nothing reaches a trainable leaf
    loss.node()->grad[0] += Scalar(1);
    for (auto it = adjoints_.rbegin(); it != adjoints_.rend(); ++it) {
      (*it)();
    }
  }

 private:
  Var<Scalar> make(Tensor<Scalar> value, bool requires_grad) {
    auto node = std::make_shared<TapeNode<Scalar>>();
    node->requires_grad = requires_grad;
    if (requires_grad) node->grad = Tensor<Scalar>::zeros(value.dims());
    node->value = std::move(value);
    ++num_nodes_;
    return Var<Scalar>(std::move(node), this);
  }

  std::vector<std::function<void()>> adjoints_;
  std::size_t num_nodes_ = 0;
};

namespace detail {

template <typename Scalar>
Tape<Scalar>& tape_of(const Var<Scalar>& a) {
  if (!a.defined()) throw ContractError("op on undefined var");
  return *a.tape();
}

template <typename Scalar>
Tape<Scalar>& tape_of(const Var<Scalar>& a, const Var<Scalar>& b) {
  Tape<Scalar>& t = tape_of(a);
  if (!b.defined() || b.tape() != &t) {
    throw ContractError("op on vars from different tapes");
  }
  return t;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// elementwise

template <typename Scalar>
Var<Scalar> add(const Var<Scalar>& a, const Var<Scalar>& b) {
  Tape<Scalar>& tape = detail::tape_of(a, b);
  check_same_dims(a.value(), b.value(), "add");
  Tensor<Scalar> out = a.value();
  for (index_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  bool rg = a.requires_grad() || b.requires_grad();
  Var<Scalar> y = tape.output(std::move(out), rg);
  if (rg) {
    tape.record([an = a.node(), bn = b.node(), yn = y.node()] {
      if (an->requires_grad) {
        for (index_t i = 0; i < yn->grad.size(); ++i) an->grad[i] += yn->grad[i];
      }
      if (bn->requires_grad) {
        for (index_t i = 0; i < yn->grad.size(); ++i) bn->grad[i] += yn->grad[i];
      }
    });
  }
  return y;
}

template <typename Scalar>
Var<Scalar> sub(const Var<Scalar>& a, const Var<Scalar>& b) {
  Tape<Scalar>& tape = detail::tape_of(a, b);
  check_same_dims(a.value(), b.value(), "sub");
  Tensor<Scalar> out = a.value();
  for (index_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  bool rg = a.requires_grad() || b.requires_grad();
  Var<Scalar> y = tape.output(std::move(out), rg);
  if (rg) {
    tape.record([an = a.node(), bn = b.node(), yn = y.node()] {
      if (an->requires_grad) {
        for (index_t i = 0; i < yn->grad.size(); ++i) an->grad[i] += yn->grad[i];
      }
      if (bn->requires_grad) {
        for (index_t i = 0; i < yn->grad.size(); ++i) bn->grad[i] -= yn->grad[i];
      }
    });
  }
  return y;
}

// Hadamard product.
template <typename Scalar>
Var<Scalar> mul(const Var<Scalar>& a, const Var<Scalar>& b) {
  Tape<Scalar>& tape = detail::tape_of(a, b);
  check_same_dims(a.value(), b.value(), "mul");
  Tensor<Scalar> out = a.value();
  for (index_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  bool rg = a.requires_grad() || b.requires_grad();
  Var<Scalar> y = tape.output(std::move(out), rg);
  if (rg) {
    tape.record([an = a.node(), bn = b.node(), yn = y.node()] {
      if (an->requires_grad) {
        for (index_t i = 0; i < yn->grad.size(); ++i) {
          an->grad[i] += yn->grad[i] * bn->value[i];
        }
      }
      if (bn->requires_grad) {
        for (index_t i = 0; i < yn->grad.size(); ++i) {
          bn->grad[i] += yn->grad[i] * an->value[i];
        }
      }
    });
  }
  return y;
}

template <typename Scalar>
Var<Scalar> scale(const Var<Scalar>& a, Scalar c) {
  Tape<Scalar>& tape = detail::tape_of(a);
  Tensor<Scalar> out = a.value();
  for (index_t i = 0; i < out.size(); ++i) out[i] *= c;
  Var<Scalar> y = tape.output(std::move(out), a.requires_grad());
  if (a.requires_grad()) {
    tape.record([an = a.node(), yn = y.node(), c] {
      for (index_t i = 0; i < yn->grad.size(); ++i) an->grad[i] += c * yn->grad[i];
    });
  }
  return y;
}

// x + t where t carries data (positional embeddings etc.), not gradients.
template <typename Scalar>
Var<Scalar> add_constant(const Var<Scalar>& a, const Tensor<Scalar>& t) {
  Tape<Scalar>& tape = detail::tape_of(a);
  check_same_dims(a.value(), t, "add_constant");
  Tensor<Scalar> out = a.value();
  for (index_t i = 0; i < out.size(); ++i) out[i] += t[i];
  Var<Scalar> y = tape.output(std::move(out), a.requires_grad());
  if (a.requires_grad()) {
    tape.record([an = a.node(), yn = y.node()] {
      for (index_t i = 0; i < yn->grad.size(); ++i) an->grad[i] += yn->grad[i];
    });
  }
  return y;
}

// Broadcast a length-n vector over the rows of an (m, n) matrix.
template <typename Scalar>
Var<Scalar> add_row_vector(const Var<Scalar>& x, const Var<Scalar>& v) {
  Tape<Scalar>& tape = detail::tape_of(x, v);
  if (x.value().rank() != 2 || v.value().size() != x.value().cols()) {
    throw ShapeError("add_row_vector: dims " + dims_to_string(x.value().dims()) +
                     " vs " + dims_to_string(v.value().dims()));
  }
  const index_t m = x.value().rows(), n = x.value().cols();
  Tensor<Scalar> out = x.value();
  for (index_t r = 0; r < m; ++r) {
    for (index_t c = 0; c < n; ++c) out[r * n + c] += v.value()[c];
  }
  bool rg = x.requires_grad() || v.requires_grad();
  Var<Scalar> y = tape.output(std::move(out), rg);
  if (rg) {
    tape.record([xn = x.node(), vn = v.node(), yn = y.node(), m, n] {
      if (xn->requires_grad) {
        for (index_t i = 0; i < yn->grad.size(); ++i) xn->grad[i] += yn->grad[i];
      }
      if (vn->requires_grad) {
        for (index_t r = 0; r < m; ++r) {
          for (index_t c = 0; c < n; ++c) vn->grad[c] += yn->grad[r * n + c];
        }
      }
    });
  }
  return y;
}

// ---------------------------------------------------------------------------
// matrix products

template <typename Scalar>
Var<Scalar> matmul(const Var<Scalar>& a, const Var<Scalar>& b) {
  Tape<Scalar>& tape = detail::tape_of(a, b);
  const Tensor<Scalar>& av = a.value();
  const Tensor<Scalar>& bv = b.value();
  if (av.rank() != 2 || bv.rank() != 2 || av.cols() != bv.rows()) {
    throw ShapeError("matmul: dims " + dims_to_string(av.dims()) + " vs " +
                     dims_to_string(bv.dims()));
  }
  Tensor<Scalar> out({av.rows(), bv.cols()});
  out.mat().noalias() = av.mat() * bv.mat();
  bool rg = a.requires_grad() || b.requires_grad();
  Var<Scalar> y = tape.output(std::move(out), rg);
  if (rg) {
    tape.record([an = a.node(), bn = b.node(), yn = y.node()] {
      // dA = dC B^T, dB = A^T dC
      if (an->requires_grad) {
        an->grad.mat().noalias() += yn->grad.mat() * bn->value.mat().transpose();
      }
      if (bn->requires_grad) {
        bn->grad.mat().noalias() += an->value.mat().transpose() * yn->grad.mat();
      }
    });
  }
  return y;
}

// a (m, k) x b (n, k) -> a b^T (m, n); keeps attention scores free of an
// explicit transpose node.
template <typename Scalar>
Var<Scalar> matmul_nt(const Var<Scalar>& a, const Var<Scalar>& b) {
  Tape<Scalar>& tape = detail::tape_of(a, b);
  const Tensor<Scalar>& av = a.value();
  const Tensor<Scalar>& bv = b.value();
  if (av.rank() != 2 || bv.rank() != 2 || av.cols() != bv.cols()) {
    throw ShapeError("matmul_nt: dims " + dims_to_string(av.dims()) + " vs " +
                     dims_to_string(bv.dims()));
  }
  Tensor<Scalar> out({av.rows(), bv.rows()});
  out.mat().noalias() = av.mat() * bv.mat().transpose();
  bool rg = a.requires_grad() || b.requires_grad();
  Var<Scalar> y = tape.output(std::move(out), rg);
  if (rg) {
    tape.record([an = a.node(), bn = b.node(), yn = y.node()] {
      if (an->requires_grad) {
        an->grad.mat().noalias() += yn->grad.mat() * bn->value.mat();
      }
      if (bn->requires_grad) {
        bn->grad.mat().noalias() += yn->grad.mat().transpose() * an->value.mat();
      }
    });
  }
  return y;
}

// ---------------------------------------------------------------------------
// normalization and activations

// Per-row zero-mean unit-variance normalization, then gain/bias.
template <typename Scalar>
Var<Scalar> layer_norm(const Var<Scalar>& x, const Var<Scalar>& gain,
                       const Var<Scalar>& bias, Scalar eps) {
  Tape<Scalar>& tape = detail::tape_of(x, gain);
  detail::tape_of(x, bias);
  if (eps <= Scalar(0)) throw ParamError("layer_norm: eps must be > 0");
  const Tensor<Scalar>& xv = x.value();
  if (xv.rank() != 2) {
    throw ShapeError("layer_norm: expected matrix, got " + dims_to_string(xv.dims()));
  }
  const index_t m = xv.rows(), n = xv.cols();
  if (gain.value().size() != n || bias.value().size() != n) {
    throw ShapeError("layer_norm: feature dim " + std::to_string(n) +
                     " vs gain " + dims_to_string(gain.value().dims()) +
                     ", bias " + dims_to_string(bias.value().dims()));
  }

  auto xhat = std::make_shared<Tensor<Scalar>>(std::vector<index_t>{m, n});
  auto inv_std = std::make_shared<std::vector<Scalar>>(static_cast<std::size_t>(m));
  Tensor<Scalar> out({m, n});
  for (index_t r = 0; r < m; ++r) {
    const Scalar* row = xv.data() + r * n;
    Scalar mean = 0;
    for (index_t c = 0; c < n; ++c) mean += row[c];
    mean /= Scalar(n);
    Scalar var = 0;
    for (index_t c = 0; c < n; ++c) {
      Scalar d = row[c] - mean;
      var += d * d;
    }
    var /= Scalar(n);
    Scalar is = Scalar(1) / std::sqrt(var + eps);
    (*inv_std)[static_cast<std::size_t>(r)] = is;
    for (index_t c = 0; c < n; ++c) {
      Scalar h = (row[c] - mean) * is;
      (*xhat)[r * n + c] = h;
      out[r * n + c] = gain.value()[c] * h + bias.value()[c];
    }
  }

  bool rg = x.requires_grad() || gain.requires_grad() || bias.requires_grad();
  Var<Scalar> y = tape.output(std::move(out), rg);
  if (rg) {
    tape.record([xn = x.node(), gn = gain.node(), bn = bias.node(),
                 yn = y.node(), xhat, inv_std, m, n] {
      for (index_t r = 0; r < m; ++r) {
        const Scalar* g = yn->grad.data() + r * n;
        const Scalar* h = xhat->data() + r * n;
        if (gn->requires_grad) {
          for (index_t c = 0; c < n; ++c) gn->grad[c] += g[c] * h[c];
        }
        if (bn->requires_grad) {
          for (index_t c = 0; c < n; ++c) bn->grad[c] += g[c];
        }
        if (xn->requires_grad) {
          Scalar mean_dh = 0, mean_dh_h = 0;
          for (index_t c = 0; c < n; ++c) {
            Scalar dh = g[c] * gn->value[c];
            mean_dh += dh;
            mean_dh_h += dh * h[c];
          }
          mean_dh /= Scalar(n);
          mean_dh_h /= Scalar(n);
          Scalar is = (*inv_std)[static_cast<std::size_t>(r)];
          for (index_t c = 0; c < n; ++c) {
            Scalar dh = g[c] * gn->value[c];
            xn->grad[r * n + c] += is * (dh - mean_dh - h[c] * mean_dh_h);
          }
        }
      }
    });
  }
  return y;
}

// Row-wise softmax with max subtraction.
template <typename Scalar>
Var<Scalar> softmax_rows(const Var<Scalar>& x) {
  Tape<Scalar>& tape = detail::tape_of(x);
  const Tensor<Scalar>& xv = x.value();
  if (xv.rank() != 2) {
    throw ShapeError("softmax_rows: expected matrix, got " + dims_to_string(xv.dims()));
  }
  const index_t m = xv.rows(), n = xv.cols();
  Tensor<Scalar> out({m, n});
  for (index_t r = 0; r < m; ++r) {
    const Scalar* row = xv.data() + r * n;
    Scalar mx = row[0];
    for (index_t c = 1; c < n; ++c) mx = std::max(mx, row[c]);
    Scalar sum = 0;
    for (index_t c = 0; c < n; ++c) {
      Scalar e = std::exp(row[c] - mx);
      out[r * n + c] = e;
      sum += e;
    }
    Scalar inv = Scalar(1) / sum;
    for (index_t c = 0; c < n; ++c) out[r * n + c] *= inv;
  }
  Var<Scalar> y = tape.output(std::move(out), x.requires_grad());
  if (x.requires_grad()) {
    tape.record([xn = x.node(), yn = y.node(), m, n] {
      for (index_t r = 0; r < m; ++r) {
        const Scalar* g = yn->grad.data() + r * n;
        const Scalar* s = yn->value.data() + r * n;
        Scalar dot = 0;
        for (index_t c = 0; c < n; ++c) dot += g[c] * s[c];
        for (index_t c = 0; c < n; ++c) {
          xn->grad[r * n + c] += s[c] * (g[c] - dot);
        }
      }
    });
  }
  return y;
}

// GELU in its exact erf form.
template <typename Scalar>
Var<Scalar> gelu(const Var<Scalar>& x) {
  Tape<Scalar>& tape = detail::tape_of(x);
  constexpr double kInvSqrt2 = 0.70710678118654752440;
  constexpr double kInvSqrt2Pi = 0.39894228040143267794;
  Tensor<Scalar> out = x.value();
  for (index_t i = 0; i < out.size(); ++i) {
    double v = static_cast<double>(out[i]);
    out[i] = static_cast<Scalar>(0.5 * v * (1.0 + std::erf(v * kInvSqrt2)));
  }
  Var<Scalar> y = tape.output(std::move(out), x.requires_grad());
  if (x.requires_grad()) {
    tape.record([xn = x.node(), yn = y.node()] {
      for (index_t i = 0; i < yn->grad.size(); ++i) {
        double v = static_cast<double>(xn->value[i]);
        double d = 0.5 * (1.0 + std::erf(v * kInvSqrt2)) +
                   v * kInvSqrt2Pi * std::exp(-0.5 * v * v);
        xn->grad[i] += yn->grad[i] * static_cast<Scalar>(d);
      }
    });
  }
  return y;
}

// ---------------------------------------------------------------------------
// shuffling rows and columns

template <typename Scalar>
Var<Scalar> slice_rows(const Var<Scalar>& x, index_t r0, index_t count) {
  Tape<Scalar>& tape = detail::tape_of(x);
  const Tensor<Scalar>& xv = x.value();
  if (xv.rank() != 2 || r0 < 0 || count <= 0 || r0 + count > xv.rows()) {
    throw ShapeError("slice_rows: [" + std::to_string(r0) + ", " +
                     std::to_string(r0 + count) + ") of " + dims_to_string(xv.dims()));
  }
  const index_t n = xv.cols();
  Tensor<Scalar> out({count, n});
  std::copy_n(xv.data() + r0 * n, count * n, out.data());
  Var<Scalar> y = tape.output(std::move(out), x.requires_grad());
  if (x.requires_grad()) {
    tape.record([xn = x.node(), yn = y.node(), r0, count, n] {
      for (index_t i = 0; i < count * n; ++i) {
        xn->grad[r0 * n + i] += yn->grad[i];
      }
    });
  }
  return y;
}

template <typename Scalar>
Var<Scalar> slice_cols(const Var<Scalar>& x, index_t c0, index_t count) {
  Tape<Scalar>& tape = detail::tape_of(x);
  const Tensor<Scalar>& xv = x.value();
  if (xv.rank() != 2 || c0 < 0 || count <= 0 || c0 + count > xv.cols()) {
    throw ShapeError("slice_cols: [" + std::to_string(c0) + ", " +
                     std::to_string(c0 + count) + ") of " + dims_to_string(xv.dims()));
  }
  const index_t m = xv.rows(), n = xv.cols();
  Tensor<Scalar> out({m, count});
  for (index_t r = 0; r < m; ++r) {
    std::copy_n(xv.data() + r * n + c0, count, out.data() + r * count);
  }
  Var<Scalar> y = tape.output(std::move(out), x.requires_grad());
  if (x.requires_grad()) {
    tape.record([xn = x.node(), yn = y.node(), c0, count, m, n] {
      for (index_t r = 0; r < m; ++r) {
        for (index_t c = 0; c < count; ++c) {
          xn->grad[r * n + c0 + c] += yn->grad[r * count + c];
        }
      }
    });
  }
  return y;
}

template <typename Scalar>
Var<Scalar> concat_rows(const Var<Scalar>& a, const Var<Scalar>& b) {
  Tape<Scalar>& tape = detail::tape_of(a, b);
  const Tensor<Scalar>& av = a.value();
  const Tensor<Scalar>& bv = b.value();
  if (av.rank() != 2 || bv.rank() != 2 || av.cols() != bv.cols()) {
    throw ShapeError("concat_rows: dims " + dims_to_string(av.dims()) + " vs " +
                     dims_to_string(bv.dims()));
  }
  const index_t n = av.cols();
  Tensor<Scalar> out({av.rows() + bv.rows(), n});
  std::copy_n(av.data(), av.size(), out.data());
  std::copy_n(bv.data(), bv.size(), out.data() + av.size());
  bool rg = a.requires_grad() || b.requires_grad();
  Var<Scalar> y = tape.output(std::move(out), rg);
  if (rg) {
    tape.record([an = a.node(), bn = b.node(), yn = y.node()] {
      const index_t na = an->value.size();
      if (an->requires_grad) {
        for (index_t i = 0; i < na; ++i) an->grad[i] += yn->grad[i];
      }
      if (bn->requires_grad) {
        for (index_t i = 0; i < bn->value.size(); ++i) {
          bn->grad[i] += yn->grad[na + i];
        }
      }
    });
  }
  return y;
}

template <typename Scalar>
Var<Scalar> concat_cols(const std::vector<Var<Scalar>>& parts) {
  if (parts.empty()) throw ContractError("concat_cols: no inputs");
  Tape<Scalar>& tape = detail::tape_of(parts[0]);
  const index_t m = parts[0].value().rows();
  index_t total = 0;
  bool rg = false;
  for (const auto& p : parts) {
    detail::tape_of(parts[0], p);
    if (p.value().rank() != 2 || p.value().rows() != m) {
      throw ShapeError("concat_cols: row mismatch " + dims_to_string(p.value().dims()));
    }
    total += p.value().cols();
    rg = rg || p.requires_grad();
  }
  Tensor<Scalar> out({m, total});
  index_t off = 0;
  for (const auto& p : parts) {
    const index_t w = p.value().cols();
    for (index_t r = 0; r < m; ++r) {
      std::copy_n(p.value().data() + r * w, w, out.data() + r * total + off);
    }
    off += w;
  }
  Var<Scalar> y = tape.output(std::move(out), rg);
  if (rg) {
    std::vector<std::shared_ptr<TapeNode<Scalar>>> nodes;
    nodes.reserve(parts.size());
    for (const auto& p : parts) nodes.push_back(p.node());
    tape.record([nodes, yn = y.node(), m, total] {
      index_t off = 0;
      for (const auto& pn : nodes) {
        const index_t w = pn->value.cols();
        if (pn->requires_grad) {
          for (index_t r = 0; r < m; ++r) {
            for (index_t c = 0; c < w; ++c) {
              pn->grad[r * w + c] += yn->grad[r * total + off + c];
            }
          }
        }
        off += w;
      }
    });
  }
  return y;
}

// out[i] = x[indices[i]]; duplicate indices accumulate in the adjoint.
template <typename Scalar>
Var<Scalar> gather_rows(const Var<Scalar>& x, std::vector<index_t> indices) {
  Tape<Scalar>& tape = detail::tape_of(x);
  const Tensor<Scalar>& xv = x.value();
  if (xv.rank() != 2) {
    throw ShapeError("gather_rows: expected matrix, got " + dims_to_string(xv.dims()));
  }
  if (indices.empty()) throw ContractError("gather_rows: empty index list");
  const index_t m = xv.rows(), n = xv.cols();
  for (index_t idx : indices) {
    if (idx < 0 || idx >= m) {
      throw ContractError("gather_rows: index " + std::to_string(idx) +
                          " out of range [0, " + std::to_string(m) + ")");
    }
  }
  Tensor<Scalar> out({static_cast<index_t>(indices.size()), n});
  for (std::size_t i = 0; i < indices.size(); ++i) {
    std::copy_n(xv.data() + indices[i] * n, n, out.data() + static_cast<index_t>(i) * n);
  }
  Var<Scalar> y = tape.output(std::move(out), x.requires_grad());
  if (x.requires_grad()) {
    tape.record([xn = x.node(), yn = y.node(), indices = std::move(indices), n] {
      for (std::size_t i = 0; i < indices.size(); ++i) {
        for (index_t c = 0; c < n; ++c) {
          xn->grad[indices[i] * n + c] += yn->grad[static_cast<index_t>(i) * n + c];
        }
      }
    });
  }
  return y;
}

// Builds a full length-N sequence: row visible[i] takes latents[i], every
// other row takes the shared fill row (e.g. a learnable mask token).
template <typename Scalar>
Var<Scalar> scatter_rows_fill(const Var<Scalar>& latents, const Var<Scalar>& fill,
                              const std::vector<index_t>& visible, index_t total_rows) {
  Tape<Scalar>& tape = detail::tape_of(latents, fill);
  const Tensor<Scalar>& lv = latents.value();
  if (lv.rank() != 2 || static_cast<index_t>(visible.size()) != lv.rows()) {
    throw ContractError("scatter_rows_fill: " + std::to_string(visible.size()) +
                        " indices vs latents " + dims_to_string(lv.dims()));
  }
  const index_t n = lv.cols();
  if (fill.value().size() != n) {
    throw ShapeError("scatter_rows_fill: fill " + dims_to_string(fill.value().dims()) +
                     " vs width " + std::to_string(n));
  }
  std::vector<char> is_visible(static_cast<std::size_t>(total_rows), 0);
  for (index_t idx : visible) {
    if (idx < 0 || idx >= total_rows) {
      throw ContractError("scatter_rows_fill: index " + std::to_string(idx) +
                          " out of range [0, " + std::to_string(total_rows) + ")");
    }
    is_visible[static_cast<std::size_t>(idx)] = 1;
  }
  Tensor<Scalar> out({total_rows, n});
  for (index_t r = 0; r < total_rows; ++r) {
    std::copy_n(fill.value().data(), n, out.data() + r * n);
  }
  for (std::size_t i = 0; i < visible.size(); ++i) {
    std::copy_n(lv.data() + static_cast<index_t>(i) * n, n, out.data() + visible[i] * n);
  }
  bool rg = latents.requires_grad() || fill.requires_grad();
  Var<Scalar> y = tape.output(std::move(out), rg);
  if (rg) {
    tape.record([ln = latents.node(), fn = fill.node(), yn = y.node(),
                 visible, is_visible = std::move(is_visible), total_rows, n] {
      if (ln->requires_grad) {
        for (std::size_t i = 0; i < visible.size(); ++i) {
          for (index_t c = 0; c < n; ++c) {
            ln->grad[static_cast<index_t>(i) * n + c] += yn->grad[visible[i] * n + c];
          }
        }
      }
      if (fn->requires_grad) {
        for (index_t r = 0; r < total_rows; ++r) {
          if (is_visible[static_cast<std::size_t>(r)]) continue;
          for (index_t c = 0; c < n; ++c) fn->grad[c] += yn->grad[r * n + c];
        }
      }
    });
  }
  return y;
}

// ---------------------------------------------------------------------------
// reductions

template <typename Scalar>
Var<Scalar> sum_all(const Var<Scalar>& x) {
  Tape<Scalar>& tape = detail::tape_of(x);
  Scalar s = 0;
  for (index_t i = 0; i < x.value().size(); ++i) s += x.value()[i];
  Var<Scalar> y = tape.output(Tensor<Scalar>::scalar(s), x.requires_grad());
  if (x.requires_grad()) {
    tape.record([xn = x.node(), yn = y.node()] {
      Scalar g = yn->grad[0];
      for (index_t i = 0; i < xn->grad.size(); ++i) xn->grad[i] += g;
    });
  }
  return y;
}

}  // namespace smae

#endif  // SMAE_AUTODIFF_HPP
