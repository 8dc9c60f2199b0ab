#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>

#include "json.hpp"
#include "rstcoh/trainer.hpp"

namespace rstcoh {

/// Synthetic-corpus section of the global config.
struct SyntheticConfig {
  GeneratorConfig generator;
  std::uint64_t seed = 7;
  std::size_t word_dim = 300;
};

/// Everything a command needs. Data either comes from files (`paths`) or
/// from the synthetic generator.
struct GlobalConfig {
  std::string documents;
  std::string trees;
  std::string word_vectors;
  std::string output_dir = "out";
  std::optional<SyntheticConfig> synthetic;
  TrainConfig train;
  std::size_t runs = 1;
  std::size_t threads = 1;
  std::string majority_policy = "fixed:3";

  bool uses_files() const { return !documents.empty(); }

  void check() const {
    train.check();
    if (runs < 1) throw ConfigError("runs must be >= 1");
    if (!uses_files() && !synthetic)
      throw ConfigError("config needs either paths.documents/paths.trees or a synthetic section");
    if (uses_files() && (trees.empty() || word_vectors.empty()))
      throw ConfigError("paths.documents requires paths.trees and paths.word_vectors");
    for (const auto* p : {&documents, &trees, &word_vectors})
      if (!p->empty() && !std::filesystem::exists(*p))
        throw ConfigError("path does not exist: " + *p);
    if (synthetic) synthetic->generator.check();
    majority_class(majority_policy, {});
  }
};

namespace detail {

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                           const std::string& where) {
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
}

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

/// Parses the JSON config; relative paths resolve against `base_dir`.
inline GlobalConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  GlobalConfig cfg;
  try {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    detail::reject_unknown(j, {"paths", "synthetic", "model", "features", "train", "runs", "threads",
                               "majority_policy"},
                           "config");
    auto resolve = [&](const std::string& p) {
      if (p.empty()) return p;
      std::filesystem::path path(p);
      return (path.is_absolute() || base_dir.empty() ? path : base_dir / path).lexically_normal().string();
    };
    if (j.contains("paths")) {
      const auto& p = j["paths"];
      detail::reject_unknown(p, {"documents", "trees", "word_vectors", "output_dir"}, "paths");
      cfg.documents = resolve(p.value("documents", ""));
      cfg.trees = resolve(p.value("trees", ""));
      cfg.word_vectors = resolve(p.value("word_vectors", ""));
      cfg.output_dir = resolve(p.value("output_dir", "out"));
    }
    if (j.contains("synthetic")) {
      const auto& s = j["synthetic"];
      detail::reject_unknown(s, {"n_train", "n_test", "signal", "seed", "word_dim", "pattern_size",
                                 "class_priors", "min_edus", "max_edus", "labels"},
                             "synthetic");
      SyntheticConfig sc;
      auto& g = sc.generator;
      detail::read_opt(s, "n_train", g.n_train);
      detail::read_opt(s, "n_test", g.n_test);
      detail::read_opt(s, "signal", g.signal);
      detail::read_opt(s, "pattern_size", g.pattern_size);
      detail::read_opt(s, "min_edus", g.min_edus);
      detail::read_opt(s, "max_edus", g.max_edus);
      detail::read_opt(s, "labels", g.labels);
      if (s.contains("class_priors")) {
        auto pri = s["class_priors"].get<std::vector<double>>();
        if (pri.size() != 3) throw ConfigError("synthetic.class_priors needs 3 values");
        std::copy(pri.begin(), pri.end(), g.class_priors.begin());
      }
      detail::read_opt(s, "seed", sc.seed);
      detail::read_opt(s, "word_dim", sc.word_dim);
      cfg.synthetic = sc;
    }
    if (j.contains("model")) cfg.train.model.kind = parse_model_kind(j["model"].get<std::string>());
    if (j.contains("features")) cfg.train.model.features = AblationConfig::parse(j["features"].get<std::string>());
    if (j.contains("train")) {
      const auto& t = j["train"];
      detail::reject_unknown(t, {"learning_rate", "epochs", "hidden", "relation_dim", "seed", "shuffle"},
                             "train");
      detail::read_opt(t, "learning_rate", cfg.train.learning_rate);
      detail::read_opt(t, "epochs", cfg.train.epochs);
      detail::read_opt(t, "hidden", cfg.train.model.dims.hidden);
      detail::read_opt(t, "relation_dim", cfg.train.model.dims.relation_dim);
      detail::read_opt(t, "seed", cfg.train.seed);
      detail::read_opt(t, "shuffle", cfg.train.shuffle);
    }
    detail::read_opt(j, "runs", cfg.runs);
    detail::read_opt(j, "threads", cfg.threads);
    detail::read_opt(j, "majority_policy", cfg.majority_policy);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  if (cfg.synthetic) cfg.train.model.dims.word_dim = cfg.synthetic->word_dim;
  return cfg;
}

inline GlobalConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j, std::filesystem::path(path).parent_path());
}

/// Effective configuration, embedded in every output artifact.
inline nlohmann::ordered_json to_json(const GlobalConfig& c) {
  nlohmann::ordered_json j;
  if (c.uses_files())
    j["paths"] = {{"documents", c.documents}, {"trees", c.trees}, {"word_vectors", c.word_vectors}};
  if (c.synthetic) {
    const auto& g = c.synthetic->generator;
    j["synthetic"] = {{"n_train", g.n_train},   {"n_test", g.n_test},
                      {"signal", g.signal},     {"seed", c.synthetic->seed},
                      {"word_dim", c.synthetic->word_dim},
                      {"pattern_size", g.pattern_size},
                      {"class_priors", g.class_priors},
                      {"min_edus", g.min_edus}, {"max_edus", g.max_edus},
                      {"labels", g.labels}};
  }
  j["model"] = to_string(c.train.model.kind);
  j["features"] = c.train.model.features.to_string();
  j["train"] = {{"learning_rate", c.train.learning_rate},
                {"epochs", c.train.epochs},
                {"hidden", c.train.model.dims.hidden},
                {"relation_dim", c.train.model.dims.relation_dim},
                {"word_dim", c.train.model.dims.word_dim},
                {"seed", c.train.seed},
                {"shuffle", c.train.shuffle}};
  j["runs"] = c.runs;
  j["majority_policy"] = c.majority_policy;
  return j;
}

struct LoadedData {
  CorpusSplit split;
  WordVectors vectors;
};

/// Loads or synthesizes the corpus and word vectors named by the config,
/// and sets the model's word dimension from the vectors.
inline LoadedData load_data(GlobalConfig& cfg) {
  if (cfg.uses_files()) {
    CorpusSplit split = load_corpus(cfg.documents, cfg.trees);
    WordVectors wv = load_word_vectors(cfg.word_vectors, corpus_tokens(split));
    cfg.train.model.dims.word_dim = wv.dimension();
    return {std::move(split), std::move(wv)};
  }
  const auto& s = *cfg.synthetic;
  cfg.train.model.dims.word_dim = s.word_dim;
  return {synthesize_corpus(s.generator, s.seed), synthesize_word_vectors(s.generator, s.word_dim, s.seed)};
}

}  // namespace rstcoh
