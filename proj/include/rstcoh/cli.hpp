#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rstcoh/config.hpp"

namespace rstcoh::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kDataError = 2, kAllDiverged = 3 };

struct Overrides {
  std::optional<std::string> model;
  std::optional<std::string> features;
  std::optional<std::size_t> runs;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> threads;
};

inline void apply(GlobalConfig& cfg, const Overrides& o) {
  if (o.model) cfg.train.model.kind = parse_model_kind(*o.model);
  if (o.features) cfg.train.model.features = AblationConfig::parse(*o.features);
  if (o.runs) cfg.runs = *o.runs;
  if (o.seed) cfg.train.seed = *o.seed;
  if (o.out) cfg.output_dir = *o.out;
  if (o.threads) cfg.threads = *o.threads;
}

inline std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
  return buf;
}

inline std::string percent_ci(const Interval& ci) {
  return percent(ci.mean) + " ± " + percent(ci.halfwidth);
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  out << text;
}

inline std::filesystem::path prepare_output(const GlobalConfig& cfg) {
  std::filesystem::path dir(cfg.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

inline nlohmann::ordered_json data_accounting(const CorpusSplit& split) {
  auto excluded = nlohmann::ordered_json::array();
  for (const auto& e : split.exclusion_log) excluded.push_back({{"id", e.id}, {"reason", e.reason}});
  return {{"input", split.input_count},
          {"train", split.train.size()},
          {"test", split.test.size()},
          {"excluded", std::move(excluded)}};
}

inline nlohmann::ordered_json parameter_counts(const CoherenceModel& m) {
  nlohmann::ordered_json j;
  for (const auto& c : m.count_parameters()) j[c.component] = c.count;
  return j;
}

// --- train --------------------------------------------------------------

inline int cmd_train(GlobalConfig cfg, std::ostream& out) {
  cfg.check();
  LoadedData data = load_data(cfg);
  if (data.split.test.empty()) throw EmptyEvaluationError("test split is empty");
  const auto dir = prepare_output(cfg);
  const auto provenance = to_json(cfg);

  MultiSeedResult res = run_multi_seed(cfg.train, data.split, data.vectors, cfg.runs, cfg.threads);

  std::string log, csv = "seed," + csv_header() + "\n";
  for (const auto& r : res.runs) {
    log += to_json(r).dump() + "\n";
    csv += std::to_string(r.seed) + "," + (r.diverged ? std::string("diverged") : to_csv_row(r.test)) + "\n";
  }
  write_text(dir / "runs.jsonl", log);
  write_text(dir / "runs.csv", csv);

  nlohmann::ordered_json summary;
  summary["config"] = provenance;
  summary["data"] = data_accounting(data.split);
  summary["runs"] = res.runs.size();
  summary["completed"] = res.runs.size() - res.diverged_count();
  auto diverged = nlohmann::ordered_json::array();
  for (const auto& r : res.runs)
    if (r.diverged) diverged.push_back({{"seed", r.seed}, {"document", r.divergence}});
  summary["diverged"] = diverged;
  summary["metrics"] = res.aggregate ? to_json(*res.aggregate) : nlohmann::ordered_json(nullptr);
  if (res.best_model) {
    summary["parameters"] = parameter_counts(*res.best_model);
    res.best_model->save((dir / "checkpoint.json").string(), provenance);
    if (uses_tree(cfg.train.model.kind))
      res.best_model->vocabulary().save((dir / "vocabulary.txt").string());
  }
  write_text(dir / "summary.json", summary.dump(2) + "\n");

  out << "model     features   runs  accuracy        weighted_f1     macro_f1\n";
  char line[256];
  if (res.aggregate) {
    std::snprintf(line, sizeof line, "%-9s %-10s %4zu  %-15s %-15s %-15s\n",
                  to_string(cfg.train.model.kind).c_str(), cfg.train.model.features.to_string().c_str(),
                  res.runs.size() - res.diverged_count(), percent_ci(res.aggregate->accuracy).c_str(),
                  percent_ci(res.aggregate->weighted_f1).c_str(), percent_ci(res.aggregate->macro_f1).c_str());
    out << line;
  }
  if (res.diverged_count() > 0) out << res.diverged_count() << " run(s) diverged\n";
  return res.aggregate ? kOk : kAllDiverged;
}

// --- evaluate -----------------------------------------------------------

inline int cmd_evaluate(GlobalConfig cfg, const std::string& checkpoint, std::ostream& out) {
  cfg.check();
  CoherenceModel model = CoherenceModel::load(checkpoint);
  LoadedData data = load_data(cfg);
  if (data.vectors.dimension() != model.config().dims.word_dim)
    throw DimensionError("checkpoint expects word vectors of dimension " +
                         std::to_string(model.config().dims.word_dim) + ", data has " +
                         std::to_string(data.vectors.dimension()));
  EvaluationReport rep = evaluate(model, data.split.test, data.vectors);
  const auto dir = prepare_output(cfg);
  nlohmann::ordered_json j;
  j["config"] = to_json(cfg);
  j["checkpoint"] = checkpoint;
  j["model"] = to_string(model.config().kind);
  j["features"] = model.config().features.to_string();
  j["data"] = data_accounting(data.split);
  j["report"] = to_json(rep);
  write_text(dir / "report.json", j.dump(2) + "\n");
  write_text(dir / "report.csv", csv_header() + "\n" + to_csv_row(rep) + "\n");
  out << "accuracy " << percent(rep.accuracy) << "  weighted_f1 " << percent(rep.weighted_f1)
      << "  macro_f1 " << percent(rep.macro_f1) << "  (n=" << rep.confusion.total() << ")\n";
  return kOk;
}

// --- ablate -------------------------------------------------------------

struct GridRow {
  std::string model;     // "majority" | "parseq" | "rst" | "ensemble"
  std::string features;  // "" for the baselines
};

/// The result-table rows: baselines, four RST rows, three ensemble rows.
inline std::vector<GridRow> ablation_grid() {
  return {{"majority", ""},       {"parseq", ""},          {"rst", "t"},
          {"rst", "t,ns"},        {"rst", "t,ns,r"},       {"rst", "t,ns,r,e"},
          {"ensemble", "t"},      {"ensemble", "t,ns"},    {"ensemble", "t,ns,r"}};
}

struct GridResult {
  GridRow row;
  std::optional<MetricSummary> metrics;
  std::size_t runs = 0;
};

inline std::vector<int> labels_of(const std::vector<Document>& docs) {
  std::vector<int> out;
  for (const auto& d : docs) out.push_back(d.label);
  return out;
}

inline std::vector<GridResult> run_ablation(const GlobalConfig& cfg, const LoadedData& data) {
  std::vector<GridResult> results;
  for (const auto& row : ablation_grid()) {
    GridResult gr{row, std::nullopt, 0};
    if (row.model == "majority") {
      const auto train_labels = labels_of(data.split.train);
      const auto test_labels = labels_of(data.split.test);
      const auto rep = majority_baseline(cfg.majority_policy, train_labels, test_labels);
      const double acc[] = {rep.accuracy}, mac[] = {rep.macro_f1}, wei[] = {rep.weighted_f1};
      gr.metrics = MetricSummary{confidence_interval(acc), confidence_interval(mac), confidence_interval(wei)};
      gr.runs = 1;
    } else {
      TrainConfig tc = cfg.train;
      tc.model.kind = parse_model_kind(row.model);
      tc.model.features = row.features.empty() ? AblationConfig{} : AblationConfig::parse(row.features);
      auto res = run_multi_seed(tc, data.split, data.vectors, cfg.runs, cfg.threads, false);
      gr.metrics = res.aggregate;
      gr.runs = res.runs.size() - res.diverged_count();
    }
    results.push_back(std::move(gr));
  }
  return results;
}

inline std::string ablation_csv(const std::vector<GridResult>& rows) {
  std::string csv = "model,features,runs,accuracy,accuracy_ci,weighted_f1,weighted_f1_ci,macro_f1,macro_f1_ci\n";
  for (const auto& r : rows) {
    csv += r.row.model + ",\"" + r.row.features + "\"," + std::to_string(r.runs);
    if (r.metrics) {
      for (const Interval* ci : {&r.metrics->accuracy, &r.metrics->weighted_f1, &r.metrics->macro_f1})
        csv += "," + percent(ci->mean) + "," + percent(ci->halfwidth);
    } else {
      csv += ",diverged,,diverged,,diverged,";
    }
    csv += "\n";
  }
  return csv;
}

inline int cmd_ablate(GlobalConfig cfg, std::ostream& out) {
  cfg.check();
  LoadedData data = load_data(cfg);
  if (data.split.test.empty()) throw EmptyEvaluationError("test split is empty");
  const auto dir = prepare_output(cfg);
  const auto rows = run_ablation(cfg, data);
  const std::string csv = ablation_csv(rows);
  write_text(dir / "ablation.csv", csv);
  nlohmann::ordered_json j;
  j["config"] = to_json(cfg);
  j["data"] = data_accounting(data.split);
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : rows)
    arr.push_back({{"model", r.row.model},
                   {"features", r.row.features},
                   {"runs", r.runs},
                   {"metrics", r.metrics ? to_json(*r.metrics) : nlohmann::ordered_json(nullptr)}});
  j["rows"] = arr;
  write_text(dir / "ablation.json", j.dump(2) + "\n");
  out << csv;
  return kOk;
}

// --- synth --------------------------------------------------------------

inline int cmd_synth(GlobalConfig cfg, std::ostream& out) {
  if (!cfg.synthetic) cfg.synthetic = SyntheticConfig{};
  const auto& s = *cfg.synthetic;
  const auto dir = prepare_output(cfg);
  CorpusSplit split = synthesize_corpus(s.generator, s.seed);
  write_documents_jsonl(split, (dir / "documents.jsonl").string());
  write_trees(split, (dir / "trees.txt").string());
  synthesize_word_vectors(s.generator, s.word_dim, s.seed).save((dir / "vectors.txt").string());
  out << "wrote " << split.train.size() << " train and " << split.test.size() << " test documents to "
      << dir.string() << "\n";
  return kOk;
}

// --- validate-trees -----------------------------------------------------

inline int cmd_validate_trees(const std::string& path, std::ostream& out) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open tree file '" + path + "'");
  std::size_t line_no = 0, valid = 0, invalid = 0, unparseable = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    TreeRecord rec;
    try {
      rec = parse_tree_line(line);
    } catch (const ParseError& e) {
      ++unparseable;
      out << "line " << line_no << ": ParseError " << e.what() << "\n";
      continue;
    }
    const auto vs = validate_tree(rec.tree);
    if (vs.empty()) {
      ++valid;
      continue;
    }
    ++invalid;
    out << "line " << line_no << (rec.id.empty() ? "" : " " + rec.id) << ":";
    for (const auto& v : vs) out << " " << to_string(v.kind) << "@" << (v.path.empty() ? "root" : v.path);
    out << "\n";
  }
  out << "checked " << valid + invalid + unparseable << " trees: " << valid << " valid, " << invalid
      << " invalid, " << unparseable << " unparseable\n";
  return invalid + unparseable == 0 ? kOk : kDataError;
}

// --- entry point --------------------------------------------------------

inline void report_error(std::ostream& err, const std::string& kind, const std::string& message) {
  err << nlohmann::json{{"error", kind}, {"message", message}}.dump() << "\n";
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Discourse-coherence classification over RST trees"};
  app.require_subcommand(1);

  std::string config_path, checkpoint, tree_path;
  Overrides ov;
  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", config_path, "JSON config file");
    if (config_required) opt->required();
    sub->add_option("--out", ov.out, "output directory");
    sub->add_option("--seed", ov.seed, "base seed");
  };
  auto add_training = [&](CLI::App* sub) {
    sub->add_option("--model", ov.model, "rst | parseq | ensemble");
    sub->add_option("--features", ov.features, "t[,ns[,r[,e]]]");
    sub->add_option("--runs", ov.runs, "number of seeds");
    sub->add_option("--threads", ov.threads, "worker threads for the seed harness");
  };

  auto* train = app.add_subcommand("train", "train and evaluate over several seeds");
  add_common(train, true);
  add_training(train);
  auto* evaluate_cmd = app.add_subcommand("evaluate", "evaluate a checkpoint on the test split");
  add_common(evaluate_cmd, true);
  evaluate_cmd->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  auto* ablate = app.add_subcommand("ablate", "run the feature-ablation grid");
  add_common(ablate, true);
  add_training(ablate);
  auto* synth = app.add_subcommand("synth", "write a synthetic corpus");
  add_common(synth, false);
  auto* validate = app.add_subcommand("validate-trees", "validate a tree file");
  validate->add_option("trees", tree_path, "tree file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    report_error(err, "UsageError", e.what());
    return kConfigError;
  }

  try {
    if (validate->parsed()) return cmd_validate_trees(tree_path, out);
    GlobalConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    apply(cfg, ov);
    if (synth->parsed()) {
      if (ov.seed) {
        if (!cfg.synthetic) cfg.synthetic = SyntheticConfig{};
        cfg.synthetic->seed = *ov.seed;
      }
      return cmd_synth(cfg, out);
    }
    cfg.train.model.check();
    if (train->parsed()) return cmd_train(cfg, out);
    if (ablate->parsed()) return cmd_ablate(cfg, out);
    if (evaluate_cmd->parsed()) return cmd_evaluate(cfg, checkpoint, out);
  } catch (const ConfigError& e) {
    report_error(err, e.kind(), e.what());
    return kConfigError;
  } catch (const TrainingDiverged& e) {
    report_error(err, e.kind(), e.what());
    return kAllDiverged;
  } catch (const Error& e) {
    report_error(err, e.kind(), e.what());
    return kDataError;
  } catch (const std::exception& e) {
    report_error(err, "Error", e.what());
    return kDataError;
  }
  return kOk;
}

}  // namespace rstcoh::cli
