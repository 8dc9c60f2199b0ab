#pragma once

// Test-only reference implementations. Nothing here calls into the tape:
// the scalar oracles re-derive each gate equation on plain doubles, and the
// gradient oracle uses central finite differences of forward passes.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "rstcoh.hpp"

namespace oracle {

inline double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// 1-dim sequence LSTM. Gate order i, f, o, u; each gate g has weights
/// wx[g] (input), wh[g] (hidden) and bias b[g].
struct ScalarLstm {
  double wx[4], wh[4], b[4];

  static ScalarLstm from(const rstcoh::ParameterBundle& p, const rstcoh::LstmCellParams& cell) {
    const auto& w = p.value(cell.weights);
    const auto& b = p.value(cell.bias);
    ScalarLstm s{};
    for (std::size_t g = 0; g < 4; ++g) {
      s.wx[g] = w.at(g, 0);
      s.wh[g] = w.at(g, 1);
      s.b[g] = b.data[g];
    }
    return s;
  }

  void step(double x, double& h, double& c) const {
    const double i = sig(wx[0] * x + wh[0] * h + b[0]);
    const double f = sig(wx[1] * x + wh[1] * h + b[1]);
    const double o = sig(wx[2] * x + wh[2] * h + b[2]);
    const double u = std::tanh(wx[3] * x + wh[3] * h + b[3]);
    c = i * u + f * c;
    h = o * std::tanh(c);
  }

  /// Final (h, c) over a sequence from a zero state.
  std::pair<double, double> run(const std::vector<double>& xs) const {
    double h = 0.0, c = 0.0;
    for (double x : xs) step(x, h, c);
    return {h, c};
  }
};

/// 1-dim binary TreeLSTM. Gate order i, f_l, f_r, o, u; input columns
/// h_l, h_r, r_l, r_r.
struct ScalarTreeCell {
  double w[5][4], b[5];

  static ScalarTreeCell from(const rstcoh::ParameterBundle& p, const rstcoh::TreeCellParams& cell) {
    ScalarTreeCell s{};
    for (std::size_t g = 0; g < 5; ++g) {
      for (std::size_t k = 0; k < 4; ++k) s.w[g][k] = p.value(cell.weights).at(g, k);
      s.b[g] = p.value(cell.bias).data[g];
    }
    return s;
  }

  void compose(double hl, double cl, double hr, double cr, double rl, double rr, double& h,
               double& c) const {
    auto pre = [&](int g) { return w[g][0] * hl + w[g][1] * hr + w[g][2] * rl + w[g][3] * rr + b[g]; };
    const double i = sig(pre(0));
    const double fl = sig(pre(1));
    const double fr = sig(pre(2));
    const double o = sig(pre(3));
    const double u = std::tanh(pre(4));
    c = i * u + fl * cl + fr * cr;
    h = o * std::tanh(c);
  }
};

inline std::vector<double> softmax3(double a, double b, double c) {
  const double m = std::max({a, b, c});
  const double ea = std::exp(a - m), eb = std::exp(b - m), ec = std::exp(c - m);
  const double z = ea + eb + ec;
  return {ea / z, eb / z, ec / z};
}

/// Scalar word lookup with the out-of-vocabulary-is-zero rule.
inline double word(const std::map<std::string, double>& table, const std::string& tok) {
  auto it = table.find(tok);
  return it == table.end() ? 0.0 : it->second;
}

/// Relative error with magnitudes below `floor` treated as zero.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t checked = 0;
};

/// Compares `analytic` (a snapshot of bundle gradients) with central
/// differences of `loss` for every scalar parameter.
inline GradCheckResult finite_difference_check(rstcoh::ParameterBundle& params,
                                               const std::vector<rstcoh::Tensor>& analytic,
                                               const std::function<double()>& loss, double h = 1e-5) {
  GradCheckResult r;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& theta = params.value(rstcoh::ParamId{k}).data;
    for (std::size_t j = 0; j < theta.size(); ++j) {
      const double saved = theta[j];
      theta[j] = saved + h;
      const double up = loss();
      theta[j] = saved - h;
      const double down = loss();
      theta[j] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double err = relative_error(analytic[k].data[j], numeric);
      ++r.checked;
      if (err > r.max_relative_error) {
        r.max_relative_error = err;
        r.worst_parameter = params.name(rstcoh::ParamId{k}) + "[" + std::to_string(j) + "]";
      }
    }
  }
  return r;
}

inline void randomize(rstcoh::ParameterBundle& params, rstcoh::Rng& rng, double bound = 0.5) {
  for (std::size_t k = 0; k < params.size(); ++k) rstcoh::fill_uniform(params.value(rstcoh::ParamId{k}), bound, rng);
}

// --- random trees ---------------------------------------------------------

inline std::string random_edu_text(rstcoh::Rng& rng) {
  static const std::vector<std::string> pieces = {"word", "Claim", "\"quoted\"", "back\\slash", "tab\there",
                                                  "line\nbreak", "ünïcode", "(paren)", "it's", "x"};
  std::uniform_int_distribution<std::size_t> n(1, 4), pick(0, pieces.size() - 1);
  std::string s;
  for (std::size_t k = n(rng); k > 0; --k) {
    if (!s.empty()) s.push_back(' ');
    s += pieces[pick(rng)];
  }
  return s;
}

inline rstcoh::RelationLabel random_label(rstcoh::Rng& rng, const std::vector<std::string>& names) {
  std::uniform_int_distribution<std::size_t> pick(0, names.size() - 1);
  std::bernoulli_distribution nuc(0.5);
  return {names[pick(rng)], nuc(rng) ? rstcoh::Nuclearity::Nucleus : rstcoh::Nuclearity::Satellite};
}

/// Random binary tree with `leaves` leaves, depth capped at `max_depth`.
inline rstcoh::RstTree random_tree(rstcoh::Rng& rng, std::size_t leaves, std::size_t max_depth,
                                   const std::vector<std::string>& names) {
  if (leaves <= 1 || max_depth <= 1) return rstcoh::RstTree::leaf(random_edu_text(rng));
  std::uniform_int_distribution<std::size_t> cut(1, leaves - 1);
  const std::size_t l = cut(rng);
  auto left = random_tree(rng, l, max_depth - 1, names);
  auto right = random_tree(rng, leaves - l, max_depth - 1, names);
  return rstcoh::RstTree::internal(std::move(left), std::move(right), random_label(rng, names),
                                   random_label(rng, names));
}

inline std::vector<std::string> relation_names() {
  return {"Elaboration", "Evidence", "Contrast", "Joint", "Manner-Means", "Same-Unit", "Cause2"};
}

/// Copy of `t` with fresh labels and EDU texts but the same shape.
inline rstcoh::RstTree relabel(const rstcoh::RstTree& t, rstcoh::Rng& rng) {
  if (t.is_leaf()) return rstcoh::RstTree::leaf(random_edu_text(rng));
  const auto names = relation_names();
  return rstcoh::RstTree::internal(relabel(t.left(), rng), relabel(t.right(), rng), random_label(rng, names),
                                   random_label(rng, names));
}

/// Copy of `t` with only the EDU texts replaced.
inline rstcoh::RstTree retext(const rstcoh::RstTree& t, rstcoh::Rng& rng) {
  if (t.is_leaf()) return rstcoh::RstTree::leaf(random_edu_text(rng));
  return rstcoh::RstTree::internal(retext(t.left(), rng), retext(t.right(), rng), t.left_label, t.right_label);
}

// --- label-histogram nearest-centroid classifier ----------------------------

inline std::vector<double> label_histogram(const rstcoh::RstTree& t, const std::vector<std::string>& labels) {
  std::map<std::string, std::size_t> index;
  for (std::size_t k = 0; k < labels.size(); ++k) index[labels[k]] = k;
  std::vector<double> h(labels.size(), 0.0);
  double n = 0.0;
  t.for_each_label([&](const rstcoh::RelationLabel& l) {
    auto it = index.find(l.combined());
    if (it != index.end()) h[it->second] += 1.0;
    n += 1.0;
  });
  for (double& v : h) v /= std::max(n, 1.0);
  return h;
}

/// Test accuracy of a nearest-centroid classifier over normalized label
/// histograms, fit on the training split.
inline double nearest_centroid_accuracy(const rstcoh::CorpusSplit& split, const std::vector<std::string>& labels) {
  std::vector<std::vector<double>> centroid(3, std::vector<double>(labels.size(), 0.0));
  std::vector<double> count(3, 0.0);
  for (const auto& d : split.train) {
    const auto h = label_histogram(d.tree, labels);
    for (std::size_t k = 0; k < h.size(); ++k) centroid[d.label - 1][k] += h[k];
    count[d.label - 1] += 1.0;
  }
  for (int c = 0; c < 3; ++c)
    for (double& v : centroid[c]) v /= std::max(count[c], 1.0);
  std::size_t correct = 0;
  for (const auto& d : split.test) {
    const auto h = label_histogram(d.tree, labels);
    int best = 0;
    double best_d = 1e300;
    for (int c = 0; c < 3; ++c) {
      if (count[c] == 0.0) continue;
      double dist = 0.0;
      for (std::size_t k = 0; k < h.size(); ++k) dist += (h[k] - centroid[c][k]) * (h[k] - centroid[c][k]);
      if (dist < best_d) {
        best_d = dist;
        best = c;
      }
    }
    if (best + 1 == d.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(split.test.size());
}

}  // namespace oracle
