#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fixtures.hpp"

using namespace rstcoh;

namespace {

TrainConfig small_config(ModelKind kind, const std::string& features, int epochs = 2, double lr = 1e-3) {
  TrainConfig cfg;
  cfg.model = fixture::tiny_config(kind, features, 6, 8, 4);
  cfg.epochs = epochs;
  cfg.learning_rate = lr;
  cfg.seed = 3;
  return cfg;
}

const CorpusSplit& corpus() {
  static const CorpusSplit split = fixture::tiny_corpus(40, 20, 11);
  return split;
}

const WordVectors& vectors() {
  static const WordVectors wv = fixture::tiny_vectors(6, 4);
  return wv;
}

void expect_same_record(const RunRecord& a, const RunRecord& b) {
  EXPECT_EQ(a.seed, b.seed);
  EXPECT_EQ(a.epoch_losses, b.epoch_losses);
  EXPECT_EQ(a.diverged, b.diverged);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
}

}  // namespace

TEST(CrossEntropy, HandValues) {
  CoherenceDistribution uniform{{1.0 / 3, 1.0 / 3, 1.0 / 3}};
  EXPECT_NEAR(cross_entropy(uniform, 2), std::log(3.0), 1e-12);
  CoherenceDistribution sure{{0.0, 0.0, 1.0}};
  EXPECT_EQ(cross_entropy(sure, 3), 0.0);
  EXPECT_NEAR(cross_entropy(sure, 1), -std::log(1e-12), 1e-9);
  CoherenceDistribution quarter{{0.25, 0.25, 0.5}};
  EXPECT_NEAR(cross_entropy(quarter, 1), 1.3863, 1e-4);
}

TEST(Distribution, TiesPredictLowerClass) {
  EXPECT_EQ((CoherenceDistribution{{0.4, 0.4, 0.2}}).predicted_class(), 1);
  EXPECT_EQ((CoherenceDistribution{{0.2, 0.4, 0.4}}).predicted_class(), 2);
  EXPECT_EQ((CoherenceDistribution{{0.1, 0.2, 0.7}}).predicted_class(), 3);
}

TEST(Train, ConfigErrors) {
  auto cfg = small_config(ModelKind::Rst, "t");
  cfg.learning_rate = 0.0;
  EXPECT_THROW(train(cfg, corpus(), vectors()), ConfigError);
  cfg = small_config(ModelKind::Rst, "t");
  cfg.epochs = 0;
  EXPECT_THROW(train(cfg, corpus(), vectors()), ConfigError);
  CorpusSplit empty;
  EXPECT_THROW(train(small_config(ModelKind::Rst, "t"), empty, vectors()), ConfigError);
  EXPECT_THROW(run_multi_seed(small_config(ModelKind::Rst, "t"), corpus(), vectors(), 0), ConfigError);
}

TEST(Train, SameSeedIsBitIdentical) {
  for (auto kind : {ModelKind::Rst, ModelKind::Parseq, ModelKind::Ensemble}) {
    const auto cfg = small_config(kind, kind == ModelKind::Rst ? "t,ns,r,e" : "t,ns,r");
    auto a = train(cfg, corpus(), vectors());
    auto b = train(cfg, corpus(), vectors());
    expect_same_record(a.record, b.record);
    EXPECT_TRUE(a.model.params() == b.model.params()) << to_string(kind);
    EXPECT_EQ(a.model.to_checkpoint().dump(), b.model.to_checkpoint().dump());
  }
}

TEST(Train, DifferentSeedsDiffer) {
  auto cfg = small_config(ModelKind::Rst, "t,ns,r");
  auto a = train(cfg, corpus(), vectors());
  cfg.seed = 4;
  auto b = train(cfg, corpus(), vectors());
  EXPECT_NE(a.record.epoch_losses, b.record.epoch_losses);
}

TEST(Train, FirstEpochLossIsNearUniform) {
  for (auto kind : {ModelKind::Rst, ModelKind::Parseq, ModelKind::Ensemble}) {
    auto cfg = small_config(kind, "t,ns,r", 1, 1e-4);
    cfg.model.dims = {6, 100, 50};
    const auto r = train(cfg, corpus(), vectors());
    ASSERT_EQ(r.record.epoch_losses.size(), 1u);
    EXPECT_NEAR(r.record.epoch_losses[0], std::log(3.0), 0.1) << to_string(kind);
  }
}

TEST(Train, LossDecreasesOnRelationSignal) {
  const auto r = train(small_config(ModelKind::Rst, "t,ns,r", 8, 5e-3), corpus(), vectors());
  EXPECT_LT(r.record.epoch_losses.back(), r.record.epoch_losses.front());
}

TEST(Train, CallbackCanStopEarly) {
  int calls = 0;
  const auto r = train(small_config(ModelKind::Parseq, "t", 5), corpus(), vectors(),
                       [&](int epoch, const CoherenceModel&) {
                         ++calls;
                         return epoch < 1;
                       });
  EXPECT_EQ(calls, 2);
  EXPECT_EQ(r.record.epoch_losses.size(), 2u);
}

TEST(Train, ParseqVocabularyIsBare) {
  EXPECT_EQ(vocabulary_for(ModelKind::Parseq, corpus()).size(), 1u);
  EXPECT_GT(vocabulary_for(ModelKind::Rst, corpus()).size(), 1u);
}

TEST(Train, NonFiniteInputsDiverge) {
  WordVectors bad = vectors();
  for (const auto& t : GeneratorConfig{}.token_pool)
    bad.set(t, std::vector<double>(6, std::numeric_limits<double>::quiet_NaN()));
  const auto cfg = small_config(ModelKind::Parseq, "t");
  EXPECT_THROW(train(cfg, corpus(), bad), TrainingDiverged);
  const auto multi = run_multi_seed(cfg, corpus(), bad, 3);
  EXPECT_EQ(multi.diverged_count(), 3u);
  EXPECT_FALSE(multi.aggregate.has_value());
  EXPECT_FALSE(multi.best_model.has_value());
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(multi.runs[k].seed, cfg.seed + k);
    EXPECT_FALSE(multi.runs[k].divergence.empty());
  }
}

TEST(MultiSeed, ParallelMatchesSerial) {
  const auto cfg = small_config(ModelKind::Rst, "t,ns,r");
  const auto serial = run_multi_seed(cfg, corpus(), vectors(), 4, 1);
  const auto parallel = run_multi_seed(cfg, corpus(), vectors(), 4, 3);
  ASSERT_EQ(serial.runs.size(), 4u);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(serial.runs[k].seed, cfg.seed + k);
    expect_same_record(serial.runs[k], parallel.runs[k]);
  }
  EXPECT_EQ(to_json(*serial.aggregate).dump(), to_json(*parallel.aggregate).dump());
  EXPECT_TRUE(serial.best_model->params() == parallel.best_model->params());
}

TEST(MultiSeed, SingleRunHasZeroHalfwidth) {
  const auto r = run_multi_seed(small_config(ModelKind::Parseq, "t", 1), corpus(), vectors(), 1);
  ASSERT_TRUE(r.aggregate.has_value());
  EXPECT_EQ(r.aggregate->accuracy.halfwidth, 0.0);
  EXPECT_EQ(r.aggregate->accuracy.n, 1u);
  EXPECT_EQ(r.aggregate->accuracy.mean, r.runs[0].test.accuracy);
}

TEST(MultiSeed, RunKMatchesStandaloneTraining) {
  const auto cfg = small_config(ModelKind::Rst, "t,ns", 1);
  const auto multi = run_multi_seed(cfg, corpus(), vectors(), 3, 2);
  auto third = cfg;
  third.seed = cfg.seed + 2;
  expect_same_record(multi.runs[2], train(third, corpus(), vectors()).record);
}

TEST(Checkpoint, TrainedModelRoundTripsPredictions) {
  const auto r = train(small_config(ModelKind::Ensemble, "t,ns,r"), corpus(), vectors());
  const auto back = CoherenceModel::from_checkpoint(nlohmann::json::parse(r.model.to_checkpoint().dump()));
  for (const auto& d : corpus().test) EXPECT_EQ(back.predict(d, vectors()).p, r.model.predict(d, vectors()).p);
  EXPECT_EQ(evaluate(back, corpus().test, vectors()).accuracy, r.record.test.accuracy);
}
