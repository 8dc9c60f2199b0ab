#pragma once

// Small corpora, vectors and model configurations shared by the model tests.

#include <span>

#include "oracles.hpp"
#include "rstcoh.hpp"

namespace fixture {

inline rstcoh::CorpusSplit tiny_corpus(std::size_t n_train, std::size_t n_test, std::uint64_t seed,
                                       double signal = 0.9) {
  rstcoh::GeneratorConfig g;
  g.n_train = n_train;
  g.n_test = n_test;
  g.signal = signal;
  return rstcoh::synthesize_corpus(g, seed);
}

inline rstcoh::WordVectors tiny_vectors(std::size_t dim, std::uint64_t seed) {
  return rstcoh::synthesize_word_vectors(rstcoh::GeneratorConfig{}, dim, seed);
}

inline rstcoh::ModelConfig tiny_config(rstcoh::ModelKind kind, const std::string& features,
                                       std::size_t word_dim, std::size_t hidden, std::size_t relation_dim) {
  rstcoh::ModelConfig cfg;
  cfg.kind = kind;
  cfg.features = rstcoh::AblationConfig::parse(features);
  cfg.dims = {word_dim, hidden, relation_dim};
  return cfg;
}

/// Summed negative log-likelihood of `docs` under `model`.
inline rstcoh::Var total_loss(rstcoh::Tape& tape, const rstcoh::CoherenceModel& model,
                              std::span<const rstcoh::Document> docs, const rstcoh::WordVectors& wv) {
  std::optional<rstcoh::Var> sum;
  for (const auto& d : docs) {
    auto l = tape.negative_log(model.forward(tape, d, wv), static_cast<std::size_t>(d.label - 1));
    sum = sum ? tape.add(*sum, l) : l;
  }
  return *sum;
}

/// Backpropagated gradients of the summed loss against central differences
/// for every trainable scalar.
inline oracle::GradCheckResult check_gradients(rstcoh::CoherenceModel& model,
                                               std::span<const rstcoh::Document> docs,
                                               const rstcoh::WordVectors& wv, double h = 1e-5) {
  auto& params = model.params();
  {
    rstcoh::Tape tape(params);
    tape.backward(total_loss(tape, model, docs, wv));
  }
  std::vector<rstcoh::Tensor> analytic;
  for (std::size_t k = 0; k < params.size(); ++k) analytic.push_back(params.grad(rstcoh::ParamId{k}));
  const auto& frozen = model;
  return oracle::finite_difference_check(params, analytic, [&] {
    rstcoh::Tape tape(std::as_const(frozen).params());
    return tape.value(total_loss(tape, frozen, docs, wv))[0];
  }, h);
}

}  // namespace fixture
