#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "rstcoh/tensor.hpp"

namespace rstcoh {

/// Handle to a value recorded on a Tape.
struct Var {
  std::size_t index = 0;
};

/// Reverse-mode differentiation tape over vector values.
///
/// Every operation appends a node holding its forward value and a closure
/// that propagates the node's gradient to its inputs. Parameter-reading
/// operations (affine, lookup) read the bundle in place and accumulate
/// straight into the bundle's gradient slots, so weight matrices are never
/// copied onto the tape. A tape is single-threaded and bound to one bundle;
/// a tape over a const bundle records forward values only.
class Tape {
 public:
  explicit Tape(ParameterBundle& params) : params_(&params), grads_(&params) {}
  explicit Tape(const ParameterBundle& params) : params_(&params) {}

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  const std::vector<double>& value(Var v) const { return nodes_[v.index].value; }
  std::size_t size(Var v) const { return nodes_[v.index].value.size(); }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  const ParameterBundle& params() const noexcept { return *params_; }

  Var input(std::vector<double> values) {
    return push(std::move(values), false, nullptr);
  }
  Var input(std::span<const double> values) {
    return input(std::vector<double>(values.begin(), values.end()));
  }
  Var zeros(std::size_t n) { return input(std::vector<double>(n, 0.0)); }

  /// out = W x + b, with W of shape [m, n] and b of length m.
  Var affine(ParamId weight, ParamId bias, Var x) {
    const Tensor& w = params_->value(weight);
    const Tensor& b = params_->value(bias);
    const auto& xv = value(x);
    const std::size_t m = w.rows(), n = w.cols();
    if (w.rank() != 2 || n != xv.size() || b.size() != m)
      throw DimensionError("affine: weight '" + params_->name(weight) + "' is " +
                           std::to_string(m) + "x" + std::to_string(n) +
                           ", input has " + std::to_string(xv.size()));
    std::vector<double> out(b.data);
    for (std::size_t r = 0; r < m; ++r) {
      const double* row = &w.data[r * n];
      double acc = 0.0;
      for (std::size_t c = 0; c < n; ++c) acc += row[c] * xv[c];
      out[r] += acc;
    }
    return push(std::move(out), true, [weight, bias, x, m, n](Tape& t, std::size_t self) {
      const auto& g = t.nodes_[self].grad;
      const auto& xv = t.nodes_[x.index].value;
      auto& gw = t.grads_->grad(weight).data;
      auto& gb = t.grads_->grad(bias).data;
      const auto& w = t.params_->value(weight).data;
      const bool want_x = t.nodes_[x.index].requires_grad;
      auto& gx = t.nodes_[x.index].grad;
      for (std::size_t r = 0; r < m; ++r) {
        const double gr = g[r];
        if (gr == 0.0) continue;
        gb[r] += gr;
        double* gw_row = &gw[r * n];
        const double* w_row = &w[r * n];
        for (std::size_t c = 0; c < n; ++c) gw_row[c] += gr * xv[c];
        if (want_x)
          for (std::size_t c = 0; c < n; ++c) gx[c] += gr * w_row[c];
      }
    });
  }

  /// One row of an embedding table.
  Var lookup(ParamId table, std::size_t row) {
    const Tensor& tab = params_->value(table);
    if (tab.rank() != 2 || row >= tab.rows())
      throw DimensionError("lookup: row " + std::to_string(row) +
                           " out of range for '" + params_->name(table) + "'");
    const std::size_t n = tab.cols();
    std::vector<double> out(tab.data.begin() + static_cast<std::ptrdiff_t>(row * n),
                            tab.data.begin() + static_cast<std::ptrdiff_t>((row + 1) * n));
    return push(std::move(out), true, [table, row, n](Tape& t, std::size_t self) {
      const auto& g = t.nodes_[self].grad;
      auto& gt = t.grads_->grad(table).data;
      for (std::size_t c = 0; c < n; ++c) gt[row * n + c] += g[c];
    });
  }

  Var concat(std::initializer_list<Var> parts) {
    return concat(std::span<const Var>(parts.begin(), parts.size()));
  }

  Var concat(std::span<const Var> parts) {
    std::vector<double> out;
    bool rg = false;
    for (Var p : parts) {
      const auto& v = value(p);
      out.insert(out.end(), v.begin(), v.end());
      rg = rg || nodes_[p.index].requires_grad;
    }
    std::vector<Var> inputs(parts.begin(), parts.end());
    return push(std::move(out), rg, [inputs](Tape& t, std::size_t self) {
      const auto& g = t.nodes_[self].grad;
      std::size_t off = 0;
      for (Var p : inputs) {
        auto& node = t.nodes_[p.index];
        const std::size_t len = node.value.size();
        if (node.requires_grad)
          for (std::size_t k = 0; k < len; ++k) node.grad[k] += g[off + k];
        off += len;
      }
    });
  }

  Var slice(Var x, std::size_t offset, std::size_t length) {
    const auto& xv = value(x);
    if (offset + length > xv.size())
      throw DimensionError("slice [" + std::to_string(offset) + ", " +
                           std::to_string(offset + length) + ") of length " +
                           std::to_string(xv.size()));
    std::vector<double> out(xv.begin() + static_cast<std::ptrdiff_t>(offset),
                            xv.begin() + static_cast<std::ptrdiff_t>(offset + length));
    return push(std::move(out), needs_grad(x), [x, offset, length](Tape& t, std::size_t self) {
      const auto& g = t.nodes_[self].grad;
      auto& gx = t.nodes_[x.index].grad;
      for (std::size_t k = 0; k < length; ++k) gx[offset + k] += g[k];
    });
  }

  Var sigmoid(Var x) {
    std::vector<double> out(value(x));
    for (double& v : out) v = 1.0 / (1.0 + std::exp(-v));
    return push(std::move(out), needs_grad(x), [x](Tape& t, std::size_t self) {
      const auto& node = t.nodes_[self];
      auto& gx = t.nodes_[x.index].grad;
      for (std::size_t k = 0; k < gx.size(); ++k) {
        const double s = node.value[k];
        gx[k] += node.grad[k] * s * (1.0 - s);
      }
    });
  }

  Var tanh(Var x) {
    std::vector<double> out(value(x));
    for (double& v : out) v = std::tanh(v);
    return push(std::move(out), needs_grad(x), [x](Tape& t, std::size_t self) {
      const auto& node = t.nodes_[self];
      auto& gx = t.nodes_[x.index].grad;
      for (std::size_t k = 0; k < gx.size(); ++k) {
        const double y = node.value[k];
        gx[k] += node.grad[k] * (1.0 - y * y);
      }
    });
  }

  Var add(Var a, Var b) {
    check_same(a, b, "add");
    std::vector<double> out(value(a));
    const auto& bv = value(b);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += bv[k];
    return push(std::move(out), needs_grad(a) || needs_grad(b), [a, b](Tape& t, std::size_t self) {
      const auto& g = t.nodes_[self].grad;
      for (Var in : {a, b}) {
        auto& node = t.nodes_[in.index];
        if (!node.requires_grad) continue;
        for (std::size_t k = 0; k < g.size(); ++k) node.grad[k] += g[k];
      }
    });
  }

  /// Elementwise product.
  Var mul(Var a, Var b) {
    check_same(a, b, "mul");
    std::vector<double> out(value(a));
    const auto& bv = value(b);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] *= bv[k];
    return push(std::move(out), needs_grad(a) || needs_grad(b), [a, b](Tape& t, std::size_t self) {
      const auto& g = t.nodes_[self].grad;
      auto& na = t.nodes_[a.index];
      auto& nb = t.nodes_[b.index];
      for (std::size_t k = 0; k < g.size(); ++k) {
        if (na.requires_grad) na.grad[k] += g[k] * nb.value[k];
        if (nb.requires_grad) nb.grad[k] += g[k] * na.value[k];
      }
    });
  }

  Var softmax(Var logits) {
    std::vector<double> out(value(logits));
    if (out.empty()) throw DimensionError("softmax of empty vector");
    const double mx = *std::max_element(out.begin(), out.end());
    double z = 0.0;
    for (double& v : out) z += (v = std::exp(v - mx));
    for (double& v : out) v /= z;
    return push(std::move(out), needs_grad(logits), [logits](Tape& t, std::size_t self) {
      const auto& node = t.nodes_[self];
      double dot = 0.0;
      for (std::size_t k = 0; k < node.value.size(); ++k) dot += node.grad[k] * node.value[k];
      auto& gx = t.nodes_[logits.index].grad;
      for (std::size_t k = 0; k < gx.size(); ++k)
        gx[k] += node.value[k] * (node.grad[k] - dot);
    });
  }

  /// -log(max(p[index], floor)) as a scalar node.
  Var negative_log(Var probs, std::size_t index, double floor = 1e-12) {
    const auto& p = value(probs);
    if (index >= p.size()) throw DimensionError("negative_log: class index out of range");
    const double clamped = std::max(p[index], floor);
    return push({-std::log(clamped)}, needs_grad(probs),
                [probs, index, floor](Tape& t, std::size_t self) {
                  const double g = t.nodes_[self].grad[0];
                  auto& node = t.nodes_[probs.index];
                  if (node.value[index] > floor) node.grad[index] += -g / node.value[index];
                });
  }

  /// Zeroes every gradient slot of the bundle, then accumulates d(loss)/d(theta).
  void backward(Var loss) {
    if (size(loss) != 1)
      throw ShapeError("backward: loss has " + std::to_string(size(loss)) +
                       " elements, expected a scalar");
    if (!grads_) throw StateError("backward: tape was recorded over a const parameter bundle");
    grads_->zero_grad();
    for (auto& node : nodes_)
      if (node.requires_grad) node.grad.assign(node.value.size(), 0.0);
    if (!nodes_[loss.index].requires_grad) return;
    nodes_[loss.index].grad[0] = 1.0;
    for (std::size_t i = loss.index + 1; i-- > 0;) {
      auto& node = nodes_[i];
      if (node.requires_grad && node.back) node.back(*this, i);
    }
  }

 private:
  using Backward = std::function<void(Tape&, std::size_t)>;

  struct Node {
    std::vector<double> value;
    std::vector<double> grad;
    bool requires_grad = false;
    Backward back;
  };

  Var push(std::vector<double> value, bool requires_grad, Backward back) {
    nodes_.push_back(Node{std::move(value), {}, requires_grad, std::move(back)});
    return Var{nodes_.size() - 1};
  }

  bool needs_grad(Var v) const { return nodes_[v.index].requires_grad; }

  void check_same(Var a, Var b, const char* op) const {
    if (size(a) != size(b))
      throw DimensionError(std::string(op) + ": operand sizes " + std::to_string(size(a)) +
                           " and " + std::to_string(size(b)));
  }

  const ParameterBundle* params_;
  ParameterBundle* grads_ = nullptr;
  std::vector<Node> nodes_;
};

}  // namespace rstcoh
