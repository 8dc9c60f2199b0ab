#pragma once

#include <array>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "rstcoh/parseq.hpp"

namespace rstcoh {

enum class ModelKind { Rst, Parseq, Ensemble };

inline std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Rst: return "rst";
    case ModelKind::Parseq: return "parseq";
    case ModelKind::Ensemble: return "ensemble";
  }
  return "?";
}

inline ModelKind parse_model_kind(const std::string& s) {
  if (s == "rst") return ModelKind::Rst;
  if (s == "parseq") return ModelKind::Parseq;
  if (s == "ensemble") return ModelKind::Ensemble;
  throw ConfigError("unknown model kind '" + s + "' (expected rst, parseq or ensemble)");
}

struct ModelConfig {
  ModelKind kind = ModelKind::Rst;
  AblationConfig features = AblationConfig::full();
  ModelDims dims;

  void check() const {
    features.check();
    if (kind == ModelKind::Ensemble) check_ensemble_features(features);
    if (dims.word_dim == 0 || dims.hidden == 0 || dims.relation_dim == 0)
      throw ConfigError("model dimensions must be positive");
  }
};

struct CoherenceDistribution {
  std::array<double, kNumClasses> p{};

  /// Most probable class in {1,2,3}; ties go to the lower class.
  int predicted_class() const {
    int best = 0;
    for (int k = 1; k < kNumClasses; ++k)
      if (p[static_cast<std::size_t>(k)] > p[static_cast<std::size_t>(best)]) best = k;
    return best + 1;
  }
};

struct ParameterCount {
  std::string component;
  std::size_t count = 0;
};

/// A trainable coherence classifier of one of the three kinds, owning its
/// parameters and (for tree-based kinds) its relation vocabulary.
class CoherenceModel {
 public:
  static CoherenceModel create(const ModelConfig& cfg, RelationVocabulary vocab, Rng& rng) {
    cfg.check();
    CoherenceModel m;
    m.cfg_ = cfg;
    m.vocab_ = std::move(vocab);
    switch (cfg.kind) {
      case ModelKind::Rst:
        m.rst_ = add_tree_model(m.params_, cfg.dims, m.vocab_.size(), cfg.features, rng);
        break;
      case ModelKind::Parseq:
        m.parseq_ = add_parseq(m.params_, cfg.dims, rng);
        break;
      case ModelKind::Ensemble:
        m.ensemble_ = add_ensemble(m.params_, cfg.dims, m.vocab_.size(), cfg.features, rng);
        break;
    }
    return m;
  }

  const ModelConfig& config() const noexcept { return cfg_; }
  const RelationVocabulary& vocabulary() const noexcept { return vocab_; }
  ParameterBundle& params() noexcept { return params_; }
  const ParameterBundle& params() const noexcept { return params_; }
  const std::optional<TreeModelParams>& rst() const noexcept { return rst_; }
  const std::optional<ParseqParams>& parseq() const noexcept { return parseq_; }
  const std::optional<EnsembleParams>& ensemble() const noexcept { return ensemble_; }

  /// Records the forward pass for `doc` and returns the probability node.
  Var forward(Tape& tape, const Document& doc, const WordVectors& wv,
              std::size_t* visits = nullptr) const {
    switch (cfg_.kind) {
      case ModelKind::Rst:
        return classify_document(tape, doc.tree, *rst_, vocab_, wv, cfg_.features, visits);
      case ModelKind::Parseq:
        return classify_parseq(tape, doc.paragraphs, wv, *parseq_);
      case ModelKind::Ensemble:
        return classify_ensemble(tape, doc.tree, doc.paragraphs, wv, *ensemble_, vocab_, cfg_.features);
    }
    throw ConfigError("unreachable model kind");
  }

  CoherenceDistribution predict(const Document& doc, const WordVectors& wv) const {
    Tape tape(params_);
    const auto& v = tape.value(forward(tape, doc, wv));
    CoherenceDistribution d;
    std::copy(v.begin(), v.end(), d.p.begin());
    return d;
  }

  /// Trainable parameter counts per component, ending with "total". Word
  /// vectors are frozen and never counted.
  std::vector<ParameterCount> count_parameters() const {
    std::vector<ParameterCount> out;
    auto tensor_size = [&](ParamId id) { return params_.value(id).size(); };
    auto tree_side = [&](const TreeSideParams& s) {
      if (s.edu) out.push_back({"edu_encoder", s.edu->cell.parameter_count()});
      out.push_back({"tree_cell", s.cell.parameter_count()});
      if (s.relation_table) out.push_back({"relation_table", tensor_size(*s.relation_table)});
      if (s.nuclearity_table) out.push_back({"nuclearity_table", tensor_size(*s.nuclearity_table)});
    };
    auto parseq_side = [&](const ParseqEncoderParams& p) {
      out.push_back({"parseq_lstm1", p.sentence.parameter_count()});
      out.push_back({"parseq_lstm2", p.paragraph.parameter_count()});
      out.push_back({"parseq_lstm3", p.document.parameter_count()});
    };
    if (rst_) {
      tree_side(rst_->side);
      out.push_back({"classifier", rst_->classifier.parameter_count()});
    }
    if (parseq_) {
      parseq_side(parseq_->encoder);
      out.push_back({"classifier", parseq_->classifier.parameter_count()});
    }
    if (ensemble_) {
      tree_side(ensemble_->tree);
      parseq_side(ensemble_->parseq);
      out.push_back({"classifier", ensemble_->joint.parameter_count()});
    }
    std::size_t total = 0;
    for (const auto& c : out) total += c.count;
    out.push_back({"total", total});
    return out;
  }

  // --- checkpoint: JSON, byte-stable for identical parameters ------------

  static constexpr int kCheckpointVersion = 1;

  nlohmann::ordered_json to_checkpoint(const nlohmann::ordered_json& provenance = nullptr) const {
    nlohmann::ordered_json j;
    j["format"] = "rstcoh-checkpoint";
    j["version"] = kCheckpointVersion;
    j["model"] = to_string(cfg_.kind);
    j["features"] = cfg_.features.to_string();
    j["dims"] = {{"word_dim", cfg_.dims.word_dim},
                 {"hidden", cfg_.dims.hidden},
                 {"relation_dim", cfg_.dims.relation_dim}};
    j["vocabulary"] = vocab_.labels();
    auto params = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < params_.size(); ++k) {
      const Tensor& t = params_.value(ParamId{k});
      params.push_back({{"name", params_.name(ParamId{k})}, {"shape", t.shape}, {"data", t.data}});
    }
    j["parameters"] = std::move(params);
    if (!provenance.is_null()) j["provenance"] = provenance;
    return j;
  }

  static CoherenceModel from_checkpoint(const nlohmann::json& j) {
    try {
      if (j.at("format") != "rstcoh-checkpoint")
        throw FormatError("not an rstcoh checkpoint");
      if (j.at("version").get<int>() != kCheckpointVersion)
        throw FormatError("unsupported checkpoint version " + j.at("version").dump());
      ModelConfig cfg;
      cfg.kind = parse_model_kind(j.at("model").get<std::string>());
      cfg.features = AblationConfig::parse(j.at("features").get<std::string>());
      cfg.dims.word_dim = j.at("dims").at("word_dim").get<std::size_t>();
      cfg.dims.hidden = j.at("dims").at("hidden").get<std::size_t>();
      cfg.dims.relation_dim = j.at("dims").at("relation_dim").get<std::size_t>();
      auto labels = j.at("vocabulary").get<std::vector<std::string>>();
      auto vocab = RelationVocabulary::from_labels(labels);
      if (vocab.labels() != labels) throw FormatError("checkpoint vocabulary is not in canonical order");
      Rng rng(0);
      CoherenceModel m = create(cfg, std::move(vocab), rng);
      const auto& params = j.at("parameters");
      if (params.size() != m.params_.size())
        throw FormatError("checkpoint has " + std::to_string(params.size()) + " tensors, model expects " +
                          std::to_string(m.params_.size()));
      for (const auto& entry : params) {
        const ParamId id = m.params_.at(entry.at("name").get<std::string>());
        Tensor t(entry.at("shape").get<std::vector<std::size_t>>(),
                 entry.at("data").get<std::vector<double>>());
        if (t.shape != m.params_.value(id).shape)
          throw FormatError("shape mismatch for '" + m.params_.name(id) + "'");
        m.params_.value(id) = std::move(t);
      }
      return m;
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("malformed checkpoint: ") + e.what());
    }
  }

  void save(const std::string& path, const nlohmann::ordered_json& provenance = nullptr) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write checkpoint '" + path + "'");
    out << to_checkpoint(provenance).dump() << '\n';
  }

  static CoherenceModel load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot read checkpoint '" + path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("malformed checkpoint: ") + e.what());
    }
    return from_checkpoint(j);
  }

 private:
  ModelConfig cfg_;
  RelationVocabulary vocab_;
  ParameterBundle params_;
  std::optional<TreeModelParams> rst_;
  std::optional<ParseqParams> parseq_;
  std::optional<EnsembleParams> ensemble_;
};

}  // namespace rstcoh
