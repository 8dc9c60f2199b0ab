#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rstcoh/errors.hpp"

namespace rstcoh {

using Rng = std::mt19937_64;

/// Dense row-major tensor of doubles.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> dims)
      : shape(std::move(dims)), data(element_count(shape), 0.0) {}
  Tensor(std::vector<std::size_t> dims, std::vector<double> values)
      : shape(std::move(dims)), data(std::move(values)) {
    if (data.size() != element_count(shape))
      throw ShapeError("tensor data length " + std::to_string(data.size()) +
                       " does not match shape");
  }

  static std::size_t element_count(const std::vector<std::size_t>& dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                           std::multiplies<>());
  }

  std::size_t size() const noexcept { return data.size(); }
  std::size_t rank() const noexcept { return shape.size(); }
  std::size_t rows() const { return shape.empty() ? 1 : shape.front(); }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

  bool all_finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

/// Opaque handle into a ParameterBundle.
struct ParamId {
  std::size_t index = 0;
  friend bool operator==(ParamId, ParamId) = default;
};

/// Named, ordered collection of trainable tensors, each paired with a
/// same-shaped gradient slot. Ordering follows insertion.
class ParameterBundle {
 public:
  ParamId add(std::string name, Tensor value) {
    if (find(name)) throw ConfigError("duplicate parameter name '" + name + "'");
    names_.push_back(std::move(name));
    grads_.emplace_back(value.shape);
    values_.push_back(std::move(value));
    return ParamId{values_.size() - 1};
  }

  std::optional<ParamId> find(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
      if (names_[i] == name) return ParamId{i};
    return std::nullopt;
  }

  ParamId at(const std::string& name) const {
    auto id = find(name);
    if (!id) throw ConfigError("unknown parameter '" + name + "'");
    return *id;
  }

  std::size_t size() const noexcept { return values_.size(); }
  const std::string& name(ParamId id) const { return names_.at(id.index); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  Tensor& value(ParamId id) { return values_.at(id.index); }
  const Tensor& value(ParamId id) const { return values_.at(id.index); }
  Tensor& grad(ParamId id) { return grads_.at(id.index); }
  const Tensor& grad(ParamId id) const { return grads_.at(id.index); }

  void zero_grad() {
    for (auto& g : grads_) std::fill(g.data.begin(), g.data.end(), 0.0);
  }

  std::size_t total_parameters() const {
    std::size_t n = 0;
    for (const auto& v : values_) n += v.size();
    return n;
  }

  bool all_finite() const {
    for (const auto& v : values_)
      if (!v.all_finite()) return false;
    return true;
  }

  friend bool operator==(const ParameterBundle& a, const ParameterBundle& b) {
    return a.names_ == b.names_ && a.values_ == b.values_;
  }

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
  std::vector<Tensor> grads_;
};

inline void fill_uniform(Tensor& t, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : t.data) v = dist(rng);
}

/// Glorot-uniform bound for a weight block mapping fan_in -> fan_out.
inline double glorot_bound(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

inline constexpr double kEmbeddingInitBound = 0.1;

}  // namespace rstcoh
