#include <doctest.h>

#include <cmath>

#include "dan/grad_check.hpp"
#include "dan/text_encoder.hpp"
#include "oracles.hpp"

using namespace dan;

namespace {

LstmDirParams zero_cell(std::size_t d) {
  auto gate = [&]() {
    return LstmGateParams{make_zeros({d, d}), make_zeros({d, d}), make_zeros({d})};
  };
  return {gate(), gate(), gate(), gate()};
}

}  // namespace

TEST_CASE("recurrent_step: all-zero parameters give zero output") {
  std::size_t d = 3;
  Tape tape;
  LstmDirParams cell = zero_cell(d);
  auto [h, c] = recurrent_step(tape, make_tensor({d}, {1, 2, 3}), make_zeros({d}),
                               make_zeros({d}), cell);
  for (double v : h->values) CHECK(v == 0.0);
}

TEST_CASE("recurrent_step: saturated forget gate carries the cell state") {
  std::size_t d = 3;
  Tape tape;
  LstmDirParams cell = zero_cell(d);
  // Forget gate pinned open, input gate pinned shut.
  cell.forget.b = make_tensor({d}, {20, 20, 20});
  cell.input.b = make_tensor({d}, {-20, -20, -20});
  Var c_prev = make_tensor({d}, {0.5, -0.7, 0.2});
  auto [h, c] = recurrent_step(tape, make_tensor({d}, {1, 1, 1}), make_zeros({d}),
                               c_prev, cell);
  for (std::size_t i = 0; i < d; ++i)
    CHECK(std::fabs(c->values[i] - c_prev->values[i]) < 1e-6);
}

TEST_CASE("recurrent_step: single-step gradients match finite differences") {
  std::size_t d = 4;
  ParamStore store;
  Rng rng(51);
  init_text_encoder_params(store, "enc/", static_cast<int>(d), 6, rng);
  TextEncoderParams params = bind_text_encoder_params(store, "enc/");
  Var x = make_tensor({d}, {0.3, -0.2, 0.5, 0.1});
  Var h0 = make_tensor({d}, {0.1, 0.2, -0.1, 0.0});
  Var c0 = make_tensor({d}, {-0.3, 0.1, 0.2, 0.4});
  auto program = [&](Tape& t) {
    auto [h, c] = recurrent_step(t, x, h0, c0, params.fwd);
    return dot(t, h, c);
  };
  CHECK(grad_check(program, store, 1e-5, 1e-4).passed());
}

TEST_CASE("encode_bidirectional: single token is the sum of two one-step passes") {
  ParamStore store;
  Rng rng(53);
  init_text_encoder_params(store, "enc/", 4, 6, rng);
  TextEncoderParams params = bind_text_encoder_params(store, "enc/");
  TokenSequence seq{{3}, 1};

  Tape tape;
  EncodedText enc = encode_bidirectional(tape, seq, params);
  Var x = embed_lookup(tape, params.embedding, {3});
  auto [hf, cf] = recurrent_step(tape, row(tape, x, 0), make_zeros({4}),
                                 make_zeros({4}), params.fwd);
  auto [hb, cb] = recurrent_step(tape, row(tape, x, 0), make_zeros({4}),
                                 make_zeros({4}), params.bwd);
  for (std::size_t j = 0; j < 4; ++j)
    CHECK(enc.tokens[0]->values[j] == hf->values[j] + hb->values[j]);
}

TEST_CASE("encode_bidirectional: tied directions give reversal symmetry") {
  ParamStore store;
  Rng rng(57);
  init_text_encoder_params(store, "enc/", 5, 8, rng);
  TextEncoderParams params = bind_text_encoder_params(store, "enc/");
  params.bwd = params.fwd;  // tie the directions

  TokenSequence seq{{2, 5, 1, 7}, 4};
  TokenSequence rev{{7, 1, 5, 2}, 4};
  Tape tape;
  EncodedText a = encode_bidirectional(tape, seq, params);
  EncodedText b = encode_bidirectional(tape, rev, params);
  for (int t = 0; t < 4; ++t)
    for (std::size_t j = 0; j < 5; ++j)
      CHECK(std::fabs(a.tokens[t]->values[j] - b.tokens[3 - t]->values[j]) < 1e-10);
}

TEST_CASE("encode_bidirectional: padding isolation is exact") {
  ParamStore store;
  Rng rng(59);
  init_text_encoder_params(store, "enc/", 4, 10, rng);
  TextEncoderParams params = bind_text_encoder_params(store, "enc/");

  TokenSequence padded_a{{3, 5, 0, 0}, 2};
  TokenSequence padded_b{{3, 5, 7, 9}, 2};  // different ids in padding slots
  Tape tape;
  EncodedText a = encode_bidirectional(tape, padded_a, params);
  EncodedText b = encode_bidirectional(tape, padded_b, params);
  for (int t = 0; t < 2; ++t) CHECK(a.tokens[t]->values == b.tokens[t]->values);
  // Padded rows are exactly zero.
  for (std::size_t t = 2; t < 4; ++t)
    for (std::size_t j = 0; j < 4; ++j) CHECK(a.rows->values[t * 4 + j] == 0.0);
}

TEST_CASE("encode_bidirectional: padded positions receive zero gradient") {
  ParamStore store;
  Rng rng(61);
  init_text_encoder_params(store, "enc/", 4, 10, rng);
  TextEncoderParams params = bind_text_encoder_params(store, "enc/");

  TokenSequence seq{{3, 5, 0, 0}, 2};
  store.zero_grads();
  Tape tape;
  EncodedText enc = encode_bidirectional(tape, seq, params);
  Var sum = add(tape, enc.tokens[0], enc.tokens[1]);
  tape.backward(dot(tape, sum, sum));
  // The padding column of the embedding stays untouched.
  const Var& m = params.embedding;
  std::size_t vocab = m->cols();
  for (std::size_t j = 0; j < m->rows(); ++j) CHECK(m->grad[j * vocab + 0] == 0.0);

  CHECK_THROWS_AS(encode_bidirectional(tape, TokenSequence{{1, 2}, 0}, params),
                  ValueError);
}

TEST_CASE("encode_bidirectional: gradients match finite differences at d=8 T=5") {
  ParamStore store;
  Rng rng(63);
  init_text_encoder_params(store, "enc/", 8, 10, rng);
  TextEncoderParams params = bind_text_encoder_params(store, "enc/");
  TokenSequence seq{{1, 4, 2, 9, 7}, 5};
  auto program = [&](Tape& t) {
    EncodedText enc = encode_bidirectional(t, seq, params);
    Var total;
    for (int tok = 0; tok < 5; ++tok)
      total = total ? add(t, total, enc.tokens[tok]) : enc.tokens[tok];
    return dot(t, total, total);
  };
  GradCheckReport report = grad_check(program, store, 1e-5, 1e-4);
  INFO(report.summary());
  CHECK(report.passed());
}

TEST_CASE("encoder agrees with the straight-line reference") {
  ParamStore store;
  Rng rng(67);
  init_text_encoder_params(store, "enc/", 6, 12, rng);
  TextEncoderParams params = bind_text_encoder_params(store, "enc/");
  TokenSequence seq{{4, 11, 2, 6}, 4};
  Tape tape;
  EncodedText enc = encode_bidirectional(tape, seq, params);
  oracle::NamedParams p{&store, "enc/"};
  auto expect = oracle::encode_text(p, seq.ids, seq.valid_len, 6, 12);
  for (int t = 0; t < 4; ++t)
    for (std::size_t j = 0; j < 6; ++j)
      CHECK(enc.tokens[t]->values[j] == doctest::Approx(expect[t][j]).epsilon(1e-12));
}

TEST_CASE("vocab file round-trip") {
  std::vector<std::string> tokens{"<pad>", "what", "color", "is", "the", "fox"};
  std::string path = "/tmp/dan_vocab_test.txt";
  write_vocab_file(path, tokens);
  CHECK(read_vocab_file(path) == tokens);
}
