#ifndef DAN_TEXT_ENCODER_HPP_
#define DAN_TEXT_ENCODER_HPP_

#include <string>
#include <utility>
#include <vector>

#include "dan/param_store.hpp"
#include "dan/tensor.hpp"

namespace dan {

// Token ids with right-padding. ids[0..valid_len) are real tokens; positions
// beyond valid_len are padding and never read by the encoder. Id 0 is the
// reserved padding id.
struct TokenSequence {
  std::vector<int> ids;
  int valid_len = 0;
};

struct LstmGateParams {
  Var w;  // input weights  [d x d]
  Var u;  // recurrent weights [d x d]
  Var b;  // bias [d]
};

struct LstmDirParams {
  LstmGateParams input, forget, output, candidate;
};

struct TextEncoderParams {
  Var embedding;  // [d x vocab]
  LstmDirParams fwd, bwd;
};

// Per-token context vectors. tokens[t] for t < valid_len are the encoded
// vectors u_t; rows is the [T x d] stack with padded rows exactly zero.
struct EncodedText {
  Var rows;
  std::vector<Var> tokens;
  int valid_len = 0;
};

// Row t of the result is column ids[t] of the embedding matrix.
Var embed_tokens(Tape& tape, const TokenSequence& seq, const Var& embedding);

// One gated recurrent update: sigmoid input/forget/output gates, tanh
// candidate and output squashing. Returns (h_t, c_t).
std::pair<Var, Var> recurrent_step(Tape& tape, const Var& x_t, const Var& h_prev,
                                   const Var& c_prev, const LstmDirParams& params);

// Bidirectional encoding from zero initial states. The forward pass covers
// t = 0..valid_len-1 and the backward pass the same range reversed; padded
// positions are never touched. u_t = h_t(fwd) + h_t(bwd).
EncodedText encode_bidirectional(Tape& tape, const TokenSequence& seq,
                                 const TextEncoderParams& params);

// Parameter wiring under `prefix` (e.g. "rdan/").
void init_text_encoder_params(ParamStore& store, const std::string& prefix,
                              int hidden_dim, int vocab_size, Rng& rng);
TextEncoderParams bind_text_encoder_params(const ParamStore& store,
                                           const std::string& prefix);

// Newline-delimited token file; line number = id, id 0 reserved for padding.
void write_vocab_file(const std::string& path, const std::vector<std::string>& tokens);
std::vector<std::string> read_vocab_file(const std::string& path);

}  // namespace dan

#endif  // DAN_TEXT_ENCODER_HPP_
