#pragma once

#include <array>
#include <optional>
#include <string>

#include "rstcoh/edu_encoder.hpp"

namespace rstcoh {

/// Feature switches of the ablation grid. T (bottom-up traversal) is always
/// on; R is only defined together with NS.
struct AblationConfig {
  bool tree = true;
  bool nuclearity = false;
  bool relation = false;
  bool edu = false;

  static AblationConfig full() { return {true, true, true, true}; }

  /// Parses a comma list drawn from {t, ns, r, e}, e.g. "t,ns,r".
  static AblationConfig parse(const std::string& spec) {
    AblationConfig a{false, false, false, false};
    std::size_t start = 0;
    while (start <= spec.size()) {
      const std::size_t comma = std::min(spec.find(',', start), spec.size());
      const std::string tok = spec.substr(start, comma - start);
      if (tok == "t") a.tree = true;
      else if (tok == "ns") a.nuclearity = true;
      else if (tok == "r") a.relation = true;
      else if (tok == "e") a.edu = true;
      else throw ConfigError("unknown feature '" + tok + "' in '" + spec + "'");
      start = comma + 1;
    }
    a.check();
    return a;
  }

  void check() const {
    if (!tree) throw ConfigError("feature t (tree traversal) cannot be disabled");
    if (relation && !nuclearity) throw ConfigError("feature r requires ns");
  }

  std::string to_string() const {
    std::string s = "t";
    if (nuclearity) s += ",ns";
    if (relation) s += ",r";
    if (edu) s += ",e";
    return s;
  }

  friend bool operator==(const AblationConfig&, const AblationConfig&) = default;
};

struct ModelDims {
  std::size_t word_dim = 300;
  std::size_t hidden = 100;
  std::size_t relation_dim = 50;
};

struct AffineParams {
  ParamId weights;
  ParamId bias;
  std::size_t in = 0;
  std::size_t out = 0;

  std::size_t parameter_count() const { return in * out + out; }
};

inline AffineParams add_affine(ParameterBundle& bundle, const std::string& prefix, std::size_t in,
                               std::size_t out, Rng& rng) {
  Tensor w({out, in});
  fill_uniform(w, glorot_bound(in, out), rng);
  return {bundle.add(prefix + ".W", std::move(w)), bundle.add(prefix + ".b", Tensor({out})), in, out};
}

/// Binary TreeLSTM cell with per-child forget gates. Gate rows are stacked
/// as input, left-forget, right-forget, output, candidate over the input
/// [h_l ; h_r ; r_l ; r_r].
struct TreeCellParams {
  std::size_t hidden = 0;
  std::size_t label_dim = 0;
  ParamId weights;
  ParamId bias;

  static constexpr std::size_t kGates = 5;

  std::size_t input_size() const { return 2 * hidden + 2 * label_dim; }
  std::size_t parameter_count() const { return kGates * (input_size() * hidden + hidden); }
};

/// Everything that encodes the tree: cell, label tables and (with E) the
/// EDU encoder. Shared by the standalone model and the ensemble.
struct TreeSideParams {
  TreeCellParams cell;
  std::optional<ParamId> relation_table;
  std::optional<ParamId> nuclearity_table;
  std::optional<EduEncoderParams> edu;
};

struct TreeModelParams {
  TreeSideParams side;
  AffineParams classifier;  // 2*hidden -> 3
};

inline TreeSideParams add_tree_side(ParameterBundle& bundle, const ModelDims& dims,
                                    std::size_t vocab_size, const AblationConfig& abl, Rng& rng) {
  abl.check();
  TreeSideParams side;
  if (abl.edu) side.edu = add_edu_encoder(bundle, dims.word_dim, dims.hidden, rng);
  side.cell.hidden = dims.hidden;
  side.cell.label_dim = dims.relation_dim;
  Tensor w({TreeCellParams::kGates * dims.hidden, side.cell.input_size()});
  fill_uniform(w, glorot_bound(side.cell.input_size(), dims.hidden), rng);
  side.cell.weights = bundle.add("tree.cell.W", std::move(w));
  side.cell.bias = bundle.add("tree.cell.b", Tensor({TreeCellParams::kGates * dims.hidden}));
  if (abl.relation) {
    Tensor t({vocab_size, dims.relation_dim});
    fill_uniform(t, kEmbeddingInitBound, rng);
    side.relation_table = bundle.add("tree.relation", std::move(t));
  } else if (abl.nuclearity) {
    Tensor t({2, dims.relation_dim});
    fill_uniform(t, kEmbeddingInitBound, rng);
    side.nuclearity_table = bundle.add("tree.nuclearity", std::move(t));
  }
  return side;
}

inline TreeModelParams add_tree_model(ParameterBundle& bundle, const ModelDims& dims,
                                      std::size_t vocab_size, const AblationConfig& abl, Rng& rng) {
  TreeModelParams p;
  p.side = add_tree_side(bundle, dims, vocab_size, abl, rng);
  p.classifier = add_affine(bundle, "rst.classifier", 2 * dims.hidden, kNumClasses, rng);
  return p;
}

/// Relation/nuclearity embedding of a child label: the combined-label row
/// under R+NS (UNK row when unseen), the nuclearity row under NS alone, and
/// zeros otherwise.
inline Var label_embedding(Tape& tape, const RelationLabel& label, const TreeSideParams& p,
                           const RelationVocabulary& vocab, const AblationConfig& abl) {
  if (abl.relation && abl.nuclearity && p.relation_table)
    return tape.lookup(*p.relation_table, vocab.index(label));
  if (abl.nuclearity && p.nuclearity_table)
    return tape.lookup(*p.nuclearity_table, label.nuclearity == Nuclearity::Nucleus ? 0 : 1);
  return tape.zeros(p.cell.label_dim);
}

/// One TreeLSTM composition:
///   i = σ(W_i x + b_i), f_l = σ(W_fl x + b_fl), f_r = σ(W_fr x + b_fr),
///   o = σ(W_o x + b_o), u = tanh(W_u x + b_u),
///   c = i⊙u + f_l⊙c_l + f_r⊙c_r, h = o⊙tanh(c),
/// with x = [h_l ; h_r ; r_l ; r_r].
inline LstmState tree_cell_step(Tape& tape, const TreeCellParams& p, LstmState left,
                                LstmState right, Var r_left, Var r_right) {
  const std::size_t hs = p.hidden;
  Var pre = tape.affine(p.weights, p.bias, tape.concat({left.h, right.h, r_left, r_right}));
  Var i = tape.sigmoid(tape.slice(pre, 0 * hs, hs));
  Var fl = tape.sigmoid(tape.slice(pre, 1 * hs, hs));
  Var fr = tape.sigmoid(tape.slice(pre, 2 * hs, hs));
  Var o = tape.sigmoid(tape.slice(pre, 3 * hs, hs));
  Var u = tape.tanh(tape.slice(pre, 4 * hs, hs));
  Var c = tape.add(tape.add(tape.mul(i, u), tape.mul(fl, left.c)), tape.mul(fr, right.c));
  Var h = tape.mul(o, tape.tanh(c));
  return {h, c};
}

/// Bottom-up encoding of `t`. Leaves take (e, c) from the EDU encoder under
/// E and zeros otherwise. `visits`, when given, counts visited nodes.
inline LstmState encode_subtree(Tape& tape, const RstTree& t, const TreeSideParams& p,
                                const RelationVocabulary& vocab, const WordVectors& wv,
                                const AblationConfig& abl, std::size_t* visits = nullptr) {
  if (visits) ++*visits;
  if (t.is_leaf()) {
    if (abl.edu) {
      if (!p.edu) throw ConfigError("feature e requested but the model has no EDU encoder");
      const auto tokens = tokenize(t.edu_text);
      if (tokens.empty()) throw ValidationError("leaf has an empty EDU");
      return encode_edu(tape, tokens, wv, *p.edu);
    }
    return {tape.zeros(p.cell.hidden), tape.zeros(p.cell.hidden)};
  }
  if (t.children.size() != 2) throw ValidationError("encode_subtree: non-binary node");
  LstmState l = encode_subtree(tape, t.left(), p, vocab, wv, abl, visits);
  LstmState r = encode_subtree(tape, t.right(), p, vocab, wv, abl, visits);
  return tree_cell_step(tape, p.cell, l, r, label_embedding(tape, t.left_label, p, vocab, abl),
                        label_embedding(tape, t.right_label, p, vocab, abl));
}

/// Document representation [h_left ; h_right] from the root's children.
inline Var root_representation(Tape& tape, const RstTree& t, const TreeSideParams& p,
                               const RelationVocabulary& vocab, const WordVectors& wv,
                               const AblationConfig& abl, std::size_t* visits = nullptr) {
  if (t.is_leaf()) throw DegenerateTreeError("cannot classify a single-EDU tree");
  if (t.children.size() != 2) throw ValidationError("root is not binary");
  if (visits) ++*visits;
  LstmState l = encode_subtree(tape, t.left(), p, vocab, wv, abl, visits);
  LstmState r = encode_subtree(tape, t.right(), p, vocab, wv, abl, visits);
  return tape.concat({l.h, r.h});
}

/// Softmax class probabilities (node of length 3 on the tape).
inline Var classify_document(Tape& tape, const RstTree& t, const TreeModelParams& p,
                             const RelationVocabulary& vocab, const WordVectors& wv,
                             const AblationConfig& abl, std::size_t* visits = nullptr) {
  Var d = root_representation(tape, t, p.side, vocab, wv, abl, visits);
  return tape.softmax(tape.affine(p.classifier.weights, p.classifier.bias, d));
}

}  // namespace rstcoh
