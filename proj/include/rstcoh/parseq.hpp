#pragma once

#include "rstcoh/tree_model.hpp"

namespace rstcoh {

/// Three stacked sequence LSTMs: words -> sentence (lstm1), sentences ->
/// paragraph (lstm2), paragraphs -> document (lstm3). Each level keeps the
/// final hidden state.
struct ParseqEncoderParams {
  LstmCellParams sentence;
  LstmCellParams paragraph;
  LstmCellParams document;
};

struct ParseqParams {
  ParseqEncoderParams encoder;
  AffineParams classifier;  // hidden -> 3
};

inline ParseqEncoderParams add_parseq_encoder(ParameterBundle& bundle, const ModelDims& dims,
                                              Rng& rng) {
  ParseqEncoderParams p;
  p.sentence = add_lstm_cell(bundle, "parseq.lstm1", dims.word_dim, dims.hidden, rng);
  p.paragraph = add_lstm_cell(bundle, "parseq.lstm2", dims.hidden, dims.hidden, rng);
  p.document = add_lstm_cell(bundle, "parseq.lstm3", dims.hidden, dims.hidden, rng);
  return p;
}

inline ParseqParams add_parseq(ParameterBundle& bundle, const ModelDims& dims, Rng& rng) {
  ParseqParams p;
  p.encoder = add_parseq_encoder(bundle, dims, rng);
  p.classifier = add_affine(bundle, "parseq.classifier", dims.hidden, kNumClasses, rng);
  return p;
}

inline Var encode_parseq(Tape& tape, const Paragraphs& paragraphs, const WordVectors& wv,
                         const ParseqEncoderParams& p) {
  if (wv.dimension() != p.sentence.input_size)
    throw DimensionError("encode_parseq: word vectors have dimension " +
                         std::to_string(wv.dimension()) + ", sentence LSTM expects " +
                         std::to_string(p.sentence.input_size));
  std::vector<Var> paragraph_vecs;
  for (const auto& para : paragraphs) {
    std::vector<Var> sentence_vecs;
    for (const auto& sent : para) {
      if (sent.empty()) continue;
      std::vector<Var> words;
      words.reserve(sent.size());
      for (const auto& tok : sent) words.push_back(tape.input(wv.lookup(tok)));
      sentence_vecs.push_back(lstm_run(tape, p.sentence, words).h);
    }
    if (!sentence_vecs.empty()) paragraph_vecs.push_back(lstm_run(tape, p.paragraph, sentence_vecs).h);
  }
  if (paragraph_vecs.empty()) throw EmptyDocumentError("encode_parseq: document has no tokens");
  return lstm_run(tape, p.document, paragraph_vecs).h;
}

inline Var classify_parseq(Tape& tape, const Paragraphs& paragraphs, const WordVectors& wv,
                           const ParseqParams& p) {
  Var d = encode_parseq(tape, paragraphs, wv, p.encoder);
  return tape.softmax(tape.affine(p.classifier.weights, p.classifier.bias, d));
}

/// Tree side (zero leaves, no EDU encoder) and ParSeq side feeding one joint
/// classifier over [h_l ; h_r ; d_parseq].
struct EnsembleParams {
  TreeSideParams tree;
  ParseqEncoderParams parseq;
  AffineParams joint;  // 3*hidden -> 3
};

inline void check_ensemble_features(const AblationConfig& abl) {
  abl.check();
  if (abl.edu)
    throw ConfigError("feature e is not available to the ensemble (tree leaves are zero vectors)");
}

inline EnsembleParams add_ensemble(ParameterBundle& bundle, const ModelDims& dims,
                                   std::size_t vocab_size, const AblationConfig& abl, Rng& rng) {
  check_ensemble_features(abl);
  EnsembleParams p;
  p.tree = add_tree_side(bundle, dims, vocab_size, abl, rng);
  p.parseq = add_parseq_encoder(bundle, dims, rng);
  p.joint = add_affine(bundle, "ensemble.classifier", 3 * dims.hidden, kNumClasses, rng);
  return p;
}

inline Var classify_ensemble(Tape& tape, const RstTree& tree, const Paragraphs& paragraphs,
                             const WordVectors& wv, const EnsembleParams& p,
                             const RelationVocabulary& vocab, const AblationConfig& abl) {
  check_ensemble_features(abl);
  Var tree_side = root_representation(tape, tree, p.tree, vocab, wv, abl);
  Var parseq_side = encode_parseq(tape, paragraphs, wv, p.parseq);
  Var d = tape.concat({tree_side, parseq_side});
  return tape.softmax(tape.affine(p.joint.weights, p.joint.bias, d));
}

}  // namespace rstcoh
