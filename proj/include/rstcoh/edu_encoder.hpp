#pragma once

#include <span>
#include <string>

#include "rstcoh/corpus.hpp"
#include "rstcoh/lstm.hpp"

namespace rstcoh {

struct EduEncoderParams {
  LstmCellParams cell;
};

inline EduEncoderParams add_edu_encoder(ParameterBundle& bundle, std::size_t word_dim,
                                        std::size_t hidden, Rng& rng) {
  return {add_lstm_cell(bundle, "edu.lstm", word_dim, hidden, rng)};
}

/// Runs the LSTM over the tokens' word vectors from a zero state. The final
/// hidden state is the EDU embedding; the final cell state seeds the leaf's
/// cell in the tree recursion.
inline LstmState encode_edu(Tape& tape, std::span<const std::string> tokens,
                            const WordVectors& wv, const EduEncoderParams& p) {
  if (wv.dimension() != p.cell.input_size)
    throw DimensionError("encode_edu: word vectors have dimension " +
                         std::to_string(wv.dimension()) + ", encoder expects " +
                         std::to_string(p.cell.input_size));
  if (tokens.empty()) throw ValidationError("encode_edu: EDU has no tokens");
  LstmState s = lstm_zero_state(tape, p.cell);
  for (const auto& tok : tokens) s = lstm_cell_step(tape, p.cell, tape.input(wv.lookup(tok)), s);
  return s;
}

}  // namespace rstcoh
