#include "dan/text_encoder.hpp"

#include <fstream>

#include "dan/error.hpp"

namespace dan {

Var embed_tokens(Tape& tape, const TokenSequence& seq, const Var& embedding) {
  return embed_lookup(tape, embedding, seq.ids);
}

std::pair<Var, Var> recurrent_step(Tape& tape, const Var& x_t, const Var& h_prev,
                                   const Var& c_prev, const LstmDirParams& params) {
  auto pre = [&](const LstmGateParams& g) {
    return add(tape, affine(tape, x_t, g.w, g.b), matvec(tape, g.u, h_prev));
  };
  Var gate_i = sigmoid_elem(tape, pre(params.input));
  Var gate_f = sigmoid_elem(tape, pre(params.forget));
  Var gate_o = sigmoid_elem(tape, pre(params.output));
  Var cand = tanh_elem(tape, pre(params.candidate));
  Var c_t = add(tape, mul_elem(tape, gate_f, c_prev), mul_elem(tape, gate_i, cand));
  Var h_t = mul_elem(tape, gate_o, tanh_elem(tape, c_t));
  return {h_t, c_t};
}

EncodedText encode_bidirectional(Tape& tape, const TokenSequence& seq,
                                 const TextEncoderParams& params) {
  if (seq.valid_len < 1) throw ValueError("encode_bidirectional: empty sequence");
  if (static_cast<std::size_t>(seq.valid_len) > seq.ids.size())
    throw ValueError("encode_bidirectional: valid_len " +
                     std::to_string(seq.valid_len) + " exceeds sequence length " +
                     std::to_string(seq.ids.size()));
  std::size_t len = static_cast<std::size_t>(seq.valid_len);
  std::size_t total = seq.ids.size();
  std::size_t d = params.embedding->rows();

  // Only the valid prefix is embedded, so padding ids can never leak into
  // the outputs.
  std::vector<int> valid_ids(seq.ids.begin(), seq.ids.begin() + len);
  Var x = embed_lookup(tape, params.embedding, valid_ids);

  std::vector<Var> h_fwd(len), h_bwd(len);
  Var h = make_zeros({d});
  Var c = make_zeros({d});
  for (std::size_t t = 0; t < len; ++t) {
    auto [h_t, c_t] = recurrent_step(tape, row(tape, x, t), h, c, params.fwd);
    h_fwd[t] = h_t;
    h = h_t;
    c = c_t;
  }
  h = make_zeros({d});
  c = make_zeros({d});
  for (std::size_t t = len; t-- > 0;) {
    auto [h_t, c_t] = recurrent_step(tape, row(tape, x, t), h, c, params.bwd);
    h_bwd[t] = h_t;
    h = h_t;
    c = c_t;
  }

  EncodedText out;
  out.valid_len = seq.valid_len;
  out.tokens.reserve(total);
  for (std::size_t t = 0; t < len; ++t)
    out.tokens.push_back(add(tape, h_fwd[t], h_bwd[t]));
  if (total > len) {
    Var zero = make_zeros({d});
    for (std::size_t t = len; t < total; ++t) out.tokens.push_back(zero);
  }
  out.rows = stack_rows(tape, out.tokens);
  return out;
}

void init_text_encoder_params(ParamStore& store, const std::string& prefix,
                              int hidden_dim, int vocab_size, Rng& rng) {
  std::size_t d = static_cast<std::size_t>(hidden_dim);
  store.create_xavier(prefix + "embed/M", d, static_cast<std::size_t>(vocab_size), rng);
  for (const char* dir : {"fwd", "bwd"}) {
    for (const char* gate : {"in", "forget", "out", "cand"}) {
      std::string base = prefix + "lstm/" + dir + "/" + gate + "/";
      store.create_xavier(base + "W", d, d, rng);
      store.create_xavier(base + "U", d, d, rng);
      // Forget-gate bias starts at 1 to keep early gradients flowing.
      double b0 = std::string(gate) == "forget" ? 1.0 : 0.0;
      store.create(base + "b", {d}, std::vector<double>(d, b0));
    }
  }
}

TextEncoderParams bind_text_encoder_params(const ParamStore& store,
                                           const std::string& prefix) {
  auto gate = [&](const std::string& dir, const std::string& g) {
    std::string base = prefix + "lstm/" + dir + "/" + g + "/";
    return LstmGateParams{store.get(base + "W"), store.get(base + "U"),
                          store.get(base + "b")};
  };
  TextEncoderParams p;
  p.embedding = store.get(prefix + "embed/M");
  p.fwd = {gate("fwd", "in"), gate("fwd", "forget"), gate("fwd", "out"),
           gate("fwd", "cand")};
  p.bwd = {gate("bwd", "in"), gate("bwd", "forget"), gate("bwd", "out"),
           gate("bwd", "cand")};
  return p;
}

void write_vocab_file(const std::string& path, const std::vector<std::string>& tokens) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write vocabulary file: " + path);
  for (const std::string& t : tokens) out << t << "\n";
  if (!out) throw IoError("failed writing vocabulary file: " + path);
}

std::vector<std::string> read_vocab_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read vocabulary file: " + path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) tokens.push_back(line);
  return tokens;
}

}  // namespace dan
