#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rstcoh/tape.hpp"

namespace rstcoh {

/// Weights of a sequence LSTM cell. The four gates are stacked row-wise in
/// the order input, forget, output, candidate:
///   weights: [4*hidden, input + hidden], columns = [x ; h]
///   bias:    [4*hidden]
struct LstmCellParams {
  std::size_t input_size = 0;
  std::size_t hidden_size = 0;
  ParamId weights;
  ParamId bias;

  static constexpr std::size_t kGates = 4;

  std::size_t parameter_count() const {
    return kGates * ((input_size + hidden_size) * hidden_size + hidden_size);
  }
};

/// Registers a zero-bias, Glorot-initialized LSTM cell under `prefix`.
inline LstmCellParams add_lstm_cell(ParameterBundle& bundle, const std::string& prefix,
                                    std::size_t input_size, std::size_t hidden_size,
                                    Rng& rng) {
  const std::size_t gates = LstmCellParams::kGates;
  Tensor w({gates * hidden_size, input_size + hidden_size});
  fill_uniform(w, glorot_bound(input_size + hidden_size, hidden_size), rng);
  LstmCellParams p;
  p.input_size = input_size;
  p.hidden_size = hidden_size;
  p.weights = bundle.add(prefix + ".W", std::move(w));
  p.bias = bundle.add(prefix + ".b", Tensor({gates * hidden_size}));
  return p;
}

struct LstmState {
  Var h;
  Var c;
};

/// One step of the standard LSTM recurrence:
///   i = σ(W_i[x;h] + b_i), f = σ(W_f[x;h] + b_f), o = σ(W_o[x;h] + b_o),
///   u = tanh(W_u[x;h] + b_u), c' = i⊙u + f⊙c, h' = o⊙tanh(c').
inline LstmState lstm_cell_step(Tape& tape, const LstmCellParams& p, Var x, LstmState prev) {
  const std::size_t hs = p.hidden_size;
  if (tape.size(x) != p.input_size || tape.size(prev.h) != hs || tape.size(prev.c) != hs)
    throw DimensionError("lstm_cell_step: expected input " + std::to_string(p.input_size) +
                         " and state " + std::to_string(hs) + ", got " +
                         std::to_string(tape.size(x)) + "/" + std::to_string(tape.size(prev.h)) +
                         "/" + std::to_string(tape.size(prev.c)));
  Var pre = tape.affine(p.weights, p.bias, tape.concat({x, prev.h}));
  Var i = tape.sigmoid(tape.slice(pre, 0 * hs, hs));
  Var f = tape.sigmoid(tape.slice(pre, 1 * hs, hs));
  Var o = tape.sigmoid(tape.slice(pre, 2 * hs, hs));
  Var u = tape.tanh(tape.slice(pre, 3 * hs, hs));
  Var c = tape.add(tape.mul(i, u), tape.mul(f, prev.c));
  Var h = tape.mul(o, tape.tanh(c));
  return {h, c};
}

inline LstmState lstm_zero_state(Tape& tape, const LstmCellParams& p) {
  return {tape.zeros(p.hidden_size), tape.zeros(p.hidden_size)};
}

/// Runs the cell left to right from a zero state; returns the final state.
inline LstmState lstm_run(Tape& tape, const LstmCellParams& p, const std::vector<Var>& inputs) {
  LstmState s = lstm_zero_state(tape, p);
  for (Var x : inputs) s = lstm_cell_step(tape, p, x, s);
  return s;
}

}  // namespace rstcoh
