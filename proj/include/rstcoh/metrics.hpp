#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "rstcoh/errors.hpp"

namespace rstcoh {

/// 3x3 counts; rows are true classes, columns predicted classes, both
/// indexed by coherence class minus one.
struct ConfusionMatrix {
  std::array<std::array<long, 3>, 3> counts{};

  void add(int true_class, int predicted_class) {
    if (true_class < 1 || true_class > 3 || predicted_class < 1 || predicted_class > 3)
      throw ConfigError("confusion matrix classes must be in {1,2,3}");
    ++counts[static_cast<std::size_t>(true_class - 1)][static_cast<std::size_t>(predicted_class - 1)];
  }

  long total() const {
    long n = 0;
    for (const auto& r : counts)
      for (long c : r) n += c;
    return n;
  }

  long trace() const { return counts[0][0] + counts[1][1] + counts[2][2]; }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long support = 0;
};

struct EvaluationReport {
  ConfusionMatrix confusion;
  double accuracy = 0.0;
  std::array<ClassScores, 3> per_class{};
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;
};

inline double safe_ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

/// Precision/recall with 0/0 read as 0. Both the unweighted (macro) and the
/// support-weighted mean of the class F1 scores are reported.
inline EvaluationReport report(const ConfusionMatrix& cm) {
  const long total = cm.total();
  if (total <= 0) throw EmptyEvaluationError("cannot report on an empty confusion matrix");
  EvaluationReport r;
  r.confusion = cm;
  r.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);
  for (std::size_t k = 0; k < 3; ++k) {
    long predicted = 0, support = 0;
    for (std::size_t j = 0; j < 3; ++j) {
      predicted += cm.counts[j][k];
      support += cm.counts[k][j];
    }
    auto& s = r.per_class[k];
    const double tp = static_cast<double>(cm.counts[k][k]);
    s.support = support;
    s.precision = safe_ratio(tp, static_cast<double>(predicted));
    s.recall = safe_ratio(tp, static_cast<double>(support));
    s.f1 = safe_ratio(2.0 * s.precision * s.recall, s.precision + s.recall);
    r.macro_f1 += s.f1 / 3.0;
    r.weighted_f1 += s.f1 * static_cast<double>(support) / static_cast<double>(total);
  }
  return r;
}

inline EvaluationReport report(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size())
    throw DimensionError("truth and prediction lists differ in length");
  ConfusionMatrix cm;
  for (std::size_t k = 0; k < truth.size(); ++k) cm.add(truth[k], predicted[k]);
  return report(cm);
}

/// "fixed:<c>" predicts class c; "train-argmax" predicts the most frequent
/// training class, ties going to the lowest class.
inline int majority_class(const std::string& policy, std::span<const int> train_labels) {
  if (policy.rfind("fixed:", 0) == 0 && policy.size() == 7 && policy[6] >= '1' && policy[6] <= '3')
    return policy[6] - '0';
  if (policy == "train-argmax") {
    std::array<long, 3> counts{};
    for (int l : train_labels)
      if (l >= 1 && l <= 3) ++counts[static_cast<std::size_t>(l - 1)];
    int best = 1;
    for (int c = 2; c <= 3; ++c)
      if (counts[static_cast<std::size_t>(c - 1)] > counts[static_cast<std::size_t>(best - 1)]) best = c;
    return best;
  }
  throw ConfigError("unknown majority policy '" + policy + "'");
}

inline EvaluationReport majority_baseline(const std::string& policy, std::span<const int> train_labels,
                                          std::span<const int> test_labels) {
  const int cls = majority_class(policy, train_labels);
  if (test_labels.empty()) throw EmptyEvaluationError("majority baseline needs test labels");
  ConfusionMatrix cm;
  for (int l : test_labels) cm.add(l, cls);
  return report(cm);
}

struct Interval {
  double mean = 0.0;
  double halfwidth = 0.0;
  std::size_t n = 0;
};

/// Normal-approximation 95% interval: 1.96 * sample std / sqrt(n), and a
/// zero halfwidth for a single value.
inline Interval confidence_interval(std::span<const double> values) {
  if (values.empty()) throw EmptyEvaluationError("confidence interval of zero values");
  Interval ci;
  ci.n = values.size();
  for (double v : values) ci.mean += v;
  ci.mean /= static_cast<double>(ci.n);
  if (ci.n == 1) return ci;
  double ss = 0.0;
  for (double v : values) ss += (v - ci.mean) * (v - ci.mean);
  const double sd = std::sqrt(ss / static_cast<double>(ci.n - 1));
  ci.halfwidth = 1.96 * sd / std::sqrt(static_cast<double>(ci.n));
  return ci;
}

inline nlohmann::ordered_json to_json(const EvaluationReport& r) {
  nlohmann::ordered_json j;
  j["accuracy"] = r.accuracy;
  j["macro_f1"] = r.macro_f1;
  j["weighted_f1"] = r.weighted_f1;
  auto classes = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& s = r.per_class[k];
    classes.push_back({{"class", k + 1},
                       {"precision", s.precision},
                       {"recall", s.recall},
                       {"f1", s.f1},
                       {"support", s.support}});
  }
  j["per_class"] = classes;
  auto cm = nlohmann::ordered_json::array();
  for (const auto& row : r.confusion.counts) cm.push_back(row);
  j["confusion"] = cm;
  return j;
}

inline std::string csv_header() {
  return "accuracy,macro_f1,weighted_f1,p1,r1,f1_1,p2,r2,f1_2,p3,r3,f1_3,support1,support2,support3";
}

/// One flat CSV row matching csv_header().
inline std::string to_csv_row(const EvaluationReport& r) {
  std::string out;
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.6f", v);
    if (!out.empty()) out.push_back(',');
    out += buf;
  };
  put(r.accuracy);
  put(r.macro_f1);
  put(r.weighted_f1);
  for (const auto& s : r.per_class) {
    put(s.precision);
    put(s.recall);
    put(s.f1);
  }
  for (const auto& s : r.per_class) out += ',' + std::to_string(s.support);
  return out;
}

}  // namespace rstcoh
