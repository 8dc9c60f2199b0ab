#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <numeric>
#include <thread>
#include <vector>

#include "rstcoh/adam.hpp"
#include "rstcoh/metrics.hpp"
#include "rstcoh/model.hpp"

namespace rstcoh {

struct TrainConfig {
  double learning_rate = 1e-4;
  int epochs = 2;
  std::uint64_t seed = 1;
  bool shuffle = true;
  ModelConfig model;

  void check() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
      throw ConfigError("learning rate must be positive");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    model.check();
  }
};

struct RunRecord {
  std::uint64_t seed = 0;
  EvaluationReport test;
  std::vector<double> epoch_losses;
  bool diverged = false;
  std::string divergence;  // offending document id when diverged
};

/// −log p(label), with the probability floored at 1e-12.
inline double cross_entropy(const CoherenceDistribution& dist, int label) {
  return -std::log(std::max(dist.p.at(static_cast<std::size_t>(label - 1)), 1e-12));
}

inline bool uses_tree(ModelKind k) { return k != ModelKind::Parseq; }

/// Vocabulary over the training trees; parseq models get the bare UNK
/// vocabulary.
inline RelationVocabulary vocabulary_for(ModelKind kind, const CorpusSplit& split) {
  if (!uses_tree(kind) || split.train.empty()) return RelationVocabulary{};
  return build_relation_vocab(split.train_trees());
}

inline EvaluationReport evaluate(const CoherenceModel& model, const std::vector<Document>& docs,
                                 const WordVectors& wv) {
  if (docs.empty()) throw EmptyEvaluationError("evaluation set is empty");
  ConfusionMatrix cm;
  for (const auto& d : docs) cm.add(d.label, model.predict(d, wv).predicted_class());
  return report(cm);
}

struct TrainResult {
  CoherenceModel model;
  RunRecord record;
};

/// Called after every epoch with (epoch index, model); returning false
/// stops training early.
using EpochCallback = std::function<bool(int, const CoherenceModel&)>;

/// Batch-size-1 Adam training. Parameters are initialized and documents
/// shuffled from one generator seeded with `cfg.seed`, so the result is a
/// pure function of (cfg, data).
inline TrainResult train(const TrainConfig& cfg, const CorpusSplit& split, const WordVectors& wv,
                         const EpochCallback& on_epoch = nullptr) {
  cfg.check();
  if (split.train.empty()) throw ConfigError("training split is empty");
  Rng rng(cfg.seed);
  TrainResult out{CoherenceModel::create(cfg.model, vocabulary_for(cfg.model.kind, split), rng), {}};
  out.record.seed = cfg.seed;
  CoherenceModel& model = out.model;

  AdamConfig adam;
  adam.learning_rate = cfg.learning_rate;
  AdamState state(model.params());
  long step = 0;
  std::vector<std::size_t> order(split.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle) std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t idx : order) {
      const Document& doc = split.train[idx];
      Tape tape(model.params());
      Var probs = model.forward(tape, doc, wv);
      Var loss = tape.negative_log(probs, static_cast<std::size_t>(doc.label - 1));
      const double value = tape.value(loss)[0];
      if (!std::isfinite(value) || !std::all_of(tape.value(probs).begin(), tape.value(probs).end(),
                                                [](double p) { return std::isfinite(p); }))
        throw TrainingDiverged(doc.id);
      tape.backward(loss);
      adam_step(model.params(), state, ++step, adam);
      total += value;
    }
    out.record.epoch_losses.push_back(total / static_cast<double>(order.size()));
    if (!model.params().all_finite()) throw TrainingDiverged(split.train[order.back()].id);
    if (on_epoch && !on_epoch(epoch, model)) break;
  }
  out.record.test = evaluate(model, split.test, wv);
  return out;
}

struct MetricSummary {
  Interval accuracy;
  Interval macro_f1;
  Interval weighted_f1;
};

struct MultiSeedResult {
  std::vector<RunRecord> runs;                // ordered by seed
  std::optional<MetricSummary> aggregate;     // absent when every run diverged
  std::optional<CoherenceModel> best_model;   // highest test accuracy, lowest seed on ties
  std::size_t diverged_count() const {
    return static_cast<std::size_t>(std::count_if(runs.begin(), runs.end(),
                                                  [](const RunRecord& r) { return r.diverged; }));
  }
};

inline MetricSummary summarize(const std::vector<RunRecord>& runs) {
  std::vector<double> acc, macro, weighted;
  for (const auto& r : runs) {
    if (r.diverged) continue;
    acc.push_back(r.test.accuracy);
    macro.push_back(r.test.macro_f1);
    weighted.push_back(r.test.weighted_f1);
  }
  return {confidence_interval(acc), confidence_interval(macro), confidence_interval(weighted)};
}

/// Runs seeds cfg.seed, cfg.seed+1, ... independently. Runs may execute on
/// `threads` workers; results do not depend on the thread count. Diverged
/// runs are recorded and left out of the aggregate.
inline MultiSeedResult run_multi_seed(const TrainConfig& cfg, const CorpusSplit& split,
                                      const WordVectors& wv, std::size_t n_runs,
                                      std::size_t threads = 1, bool keep_best_model = true) {
  if (n_runs < 1) throw ConfigError("n_runs must be >= 1");
  cfg.check();
  std::vector<RunRecord> records(n_runs);
  std::vector<std::optional<CoherenceModel>> models(n_runs);
  std::vector<std::exception_ptr> failures(n_runs);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < n_runs;) {
      TrainConfig run_cfg = cfg;
      run_cfg.seed = cfg.seed + k;
      try {
        TrainResult r = train(run_cfg, split, wv);
        records[k] = std::move(r.record);
        if (keep_best_model) models[k] = std::move(r.model);
      } catch (const TrainingDiverged& e) {
        records[k].seed = run_cfg.seed;
        records[k].diverged = true;
        records[k].divergence = e.document_id();
      } catch (...) {
        failures[k] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(threads, 1, n_runs);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& f : failures)
    if (f) std::rethrow_exception(f);

  MultiSeedResult out;
  out.runs = std::move(records);
  if (out.diverged_count() < n_runs) {
    out.aggregate = summarize(out.runs);
    if (keep_best_model) {
      std::optional<std::size_t> best;
      for (std::size_t k = 0; k < n_runs; ++k)
        if (!out.runs[k].diverged && (!best || out.runs[k].test.accuracy > out.runs[*best].test.accuracy))
          best = k;
      out.best_model = std::move(models[*best]);
    }
  }
  return out;
}

inline nlohmann::ordered_json to_json(const RunRecord& r) {
  nlohmann::ordered_json j;
  j["seed"] = r.seed;
  j["diverged"] = r.diverged;
  if (r.diverged) {
    j["divergence_document"] = r.divergence;
  } else {
    j["epoch_losses"] = r.epoch_losses;
    j["test"] = to_json(r.test);
  }
  return j;
}

inline nlohmann::ordered_json to_json(const Interval& ci) {
  return {{"mean", ci.mean}, {"halfwidth", ci.halfwidth}, {"n", ci.n}};
}

inline nlohmann::ordered_json to_json(const MetricSummary& s) {
  return {{"accuracy", to_json(s.accuracy)},
          {"weighted_f1", to_json(s.weighted_f1)},
          {"macro_f1", to_json(s.macro_f1)}};
}

}  // namespace rstcoh
