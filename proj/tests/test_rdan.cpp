#include <doctest.h>

#include <cmath>

#include "dan/eval.hpp"
#include "dan/grad_check.hpp"
#include "dan/rdan.hpp"
#include "oracles.hpp"

using namespace dan;

namespace {

ModelConfig toy_rdan_config(int d = 6, int dv = 6, int k = 2, int c = 5,
                            int vocab = 12) {
  ModelConfig cfg;
  cfg.kind = ModelKind::rdan;
  cfg.attention_steps = k;
  cfg.hidden_dim = d;
  cfg.region_dim = dv;
  cfg.answer_count = c;
  cfg.vocab_size = vocab;
  cfg.max_tokens = 8;
  cfg.dropout_rate = 0.0;
  return cfg;
}

struct RdanFixture {
  ParamStore store;
  ModelConfig cfg;
  RDanModel model;
  Rng rng{101};

  explicit RdanFixture(ModelConfig c = toy_rdan_config()) : cfg(c), model() {
    Rng init_rng(c.hidden_dim * 1000 + 5);
    init_model_params(store, cfg, init_rng);
    model = bind_rdan(store, cfg);
  }
  RegionSet regions(std::size_t n) {
    RegionSet r;
    r.count = n;
    r.dim = cfg.region_dim;
    r.features.resize(n * r.dim);
    for (double& v : r.features) v = rng.uniform(-1, 1);
    return r;
  }
  TokenSequence question(int t_len) {
    TokenSequence q;
    for (int t = 0; t < t_len; ++t)
      q.ids.push_back(1 + static_cast<int>(rng.bounded(cfg.vocab_size - 1)));
    q.valid_len = t_len;
    return q;
  }
};

}  // namespace

TEST_CASE("init_joint_memory: absorbing zero and multiplicative identity") {
  Tape tape;
  Var v0 = make_tensor({3}, {0.5, -0.2, 0.8});
  CHECK(init_joint_memory(tape, v0, make_zeros({3}))->values ==
        std::vector<double>{0, 0, 0});
  Var ones = make_tensor({3}, {1, 1, 1});
  CHECK(init_joint_memory(tape, v0, ones)->values == v0->values);

  // Composition of the two global-context references.
  RdanFixture f;
  RegionSet r = f.regions(3);
  TokenSequence q = f.question(3);
  Tape t2;
  EncodedText text = encode_bidirectional(t2, q, f.model.encoder);
  Var gv = global_visual_context(t2, region_var(r), f.model.p0, f.model.p0_b);
  Var gu = global_textual_context(t2, text);
  Var m0 = init_joint_memory(t2, gv, gu);

  oracle::NamedParams p{&f.store, "rdan/"};
  auto tokens = oracle::encode_text(p, q.ids, q.valid_len, f.cfg.hidden_dim,
                                    f.cfg.vocab_size);
  oracle::Vec expect = oracle::mul(
      oracle::global_visual(p, oracle::region_rows(r), f.cfg.hidden_dim,
                            f.cfg.region_dim),
      oracle::global_textual(tokens, f.cfg.hidden_dim));
  for (int j = 0; j < f.cfg.hidden_dim; ++j)
    CHECK(m0->values[j] == doctest::Approx(expect[j]).epsilon(1e-12));
}

TEST_CASE("rdan_step: zero textual context freezes the memory") {
  RdanFixture f;
  // Zero encoder weights force every u_t, and so u(k), to zero.
  for (const auto& [name, param] : f.store.entries())
    if (name.find("lstm") != std::string::npos || name.find("embed") != std::string::npos)
      std::fill(param->values.begin(), param->values.end(), 0.0);
  RegionSet r = f.regions(3);
  TokenSequence q = f.question(3);
  Tape tape;
  EncodedText text = encode_bidirectional(tape, q, f.model.encoder);
  Var memory = make_tensor({6}, {0.1, 0.2, 0.3, -0.1, -0.2, -0.3});
  RDanStepOut out = rdan_step(tape, memory, region_var(r), text, f.model.visual[0],
                              f.model.textual[0]);
  CHECK(out.memory->values == memory->values);
}

TEST_CASE("rdan_step: saturated visual context adds the textual context") {
  RdanFixture f;
  // P = 0 with a large bias drives tanh to exactly 1.0.
  std::fill(f.model.visual[0].p->values.begin(), f.model.visual[0].p->values.end(), 0.0);
  std::fill(f.model.visual[0].p_b->values.begin(), f.model.visual[0].p_b->values.end(),
            40.0);
  RegionSet r = f.regions(3);
  TokenSequence q = f.question(3);
  Tape tape;
  EncodedText text = encode_bidirectional(tape, q, f.model.encoder);
  Var memory = make_tensor({6}, {0.1, 0.2, 0.3, -0.1, -0.2, -0.3});
  RDanStepOut out = rdan_step(tape, memory, region_var(r), text, f.model.visual[0],
                              f.model.textual[0]);
  CHECK(out.visual.context->values == std::vector<double>(6, 1.0));
  for (int j = 0; j < 6; ++j)
    CHECK(out.memory->values[j] - memory->values[j] ==
          doctest::Approx(out.textual.context->values[j]).epsilon(1e-15));
}

TEST_CASE("rdan_forward: zero answer head gives the uniform distribution") {
  RdanFixture f;
  std::fill(f.model.ans_w->values.begin(), f.model.ans_w->values.end(), 0.0);
  std::fill(f.model.ans_b->values.begin(), f.model.ans_b->values.end(), 0.0);
  RegionSet r = f.regions(4);
  TokenSequence q = f.question(4);
  Tape tape;
  RDanForwardOut out = rdan_forward(tape, r, q, f.model);
  for (double v : out.probs->values)
    CHECK(v == doctest::Approx(1.0 / f.cfg.answer_count).epsilon(1e-14));
  Var loss = cross_entropy_loss(tape, out.logits, 2);
  CHECK(loss->values[0] ==
        doctest::Approx(std::log(static_cast<double>(f.cfg.answer_count)))
            .epsilon(1e-13));
}

TEST_CASE("rdan_forward: distribution sums to one and matches the reference") {
  RdanFixture f;
  for (int trial = 0; trial < 10; ++trial) {
    RegionSet r = f.regions(3);
    TokenSequence q = f.question(3);
    Tape tape;
    RDanForwardOut out = rdan_forward(tape, r, q, f.model);
    double sum = 0.0;
    for (double v : out.probs->values) sum += v;
    CHECK(std::fabs(sum - 1.0) <= 1e-12);

    oracle::RdanOut expect = oracle::rdan_forward(f.store, f.cfg, r, q);
    for (int c = 0; c < f.cfg.answer_count; ++c)
      CHECK(std::fabs(out.probs->values[c] - expect.probs[c]) < 1e-10);
    CHECK(out.trace.visual.size() == 2);
    for (int k = 0; k < 2; ++k)
      for (std::size_t n = 0; n < r.count; ++n)
        CHECK(std::fabs(out.trace.visual[k][n] - expect.visual_weights[k][n]) < 1e-10);
  }
}

TEST_CASE("rdan memory telescoping") {
  RdanFixture f;
  RegionSet r = f.regions(4);
  TokenSequence q = f.question(4);
  Tape tape;
  EncodedText text = encode_bidirectional(tape, q, f.model.encoder);
  Var region_mat = region_var(r);
  Var v0 = global_visual_context(tape, region_mat, f.model.p0, f.model.p0_b);
  Var u0 = global_textual_context(tape, text);
  Var memory = init_joint_memory(tape, v0, u0);
  std::vector<double> expected = memory->values;
  for (int k = 1; k <= f.cfg.attention_steps; ++k) {
    RDanStepOut step = rdan_step(tape, memory, region_mat, text,
                                 f.model.visual[k - 1], f.model.textual[k - 1]);
    for (int j = 0; j < f.cfg.hidden_dim; ++j)
      expected[j] += step.visual.context->values[j] * step.textual.context->values[j];
    memory = step.memory;
  }
  for (int j = 0; j < f.cfg.hidden_dim; ++j)
    CHECK(std::fabs(memory->values[j] - expected[j]) < 1e-12);
}

TEST_CASE("rdan_forward: region permutation leaves the answer unchanged") {
  RdanFixture f;
  RegionSet r = f.regions(5);
  TokenSequence q = f.question(4);
  std::vector<std::size_t> perm{3, 1, 4, 0, 2};
  RegionSet permuted;
  permuted.count = 5;
  permuted.dim = r.dim;
  permuted.features.resize(r.features.size());
  for (std::size_t i = 0; i < 5; ++i)
    std::copy(r.row_ptr(perm[i]), r.row_ptr(perm[i]) + r.dim,
              permuted.features.begin() + i * r.dim);

  Tape tape;
  RDanForwardOut base = rdan_forward(tape, r, q, f.model);
  RDanForwardOut moved = rdan_forward(tape, permuted, q, f.model);
  for (int c = 0; c < f.cfg.answer_count; ++c)
    CHECK(std::fabs(base.probs->values[c] - moved.probs->values[c]) < 1e-12);
  for (std::size_t k = 0; k < base.trace.visual.size(); ++k)
    for (std::size_t i = 0; i < 5; ++i)
      CHECK(std::fabs(moved.trace.visual[k][i] - base.trace.visual[k][perm[i]]) < 1e-12);
}

TEST_CASE("rdan full-model gradients match finite differences") {
  ModelConfig cfg = toy_rdan_config(6, 6, 2, 5, 10);
  RdanFixture f(cfg);
  RegionSet r = f.regions(3);
  TokenSequence q = f.question(4);
  auto program = [&](Tape& t) {
    RDanForwardOut out = rdan_forward(t, r, q, f.model);
    return cross_entropy_loss(t, out.logits, 3);
  };
  GradCheckReport report = grad_check(program, f.store, 1e-5, 1e-4);
  INFO(report.summary());
  CHECK(report.passed());
}

TEST_CASE("vqa_accuracy: clamped annotator counts") {
  CHECK(vqa_accuracy(7, {{3, 2}}) == 0.0);
  CHECK(vqa_accuracy(3, {{3, 2}}) == doctest::Approx(2.0 / 3));
  CHECK(vqa_accuracy(3, {{3, 5}}) == 1.0);
  CHECK(vqa_accuracy(3, {}) == 0.0);
}

TEST_CASE("predict_answer: argmax with lowest-index ties") {
  Tape tape;
  std::vector<std::uint8_t> all3(3, 1);
  Var p = make_tensor({3}, {0.1, 0.7, 0.2});
  CHECK(predict_answer(p) == 1);
  Var tie = make_tensor({2}, {0.5, 0.5});
  CHECK(predict_answer(tie) == 0);

  // Argmax is invariant under strictly monotone rescaling of the logits.
  Rng rng(107);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> logits(6);
    for (double& v : logits) v = rng.uniform(-3, 3);
    std::vector<double> doubled(6);
    for (int i = 0; i < 6; ++i) doubled[i] = 2.0 * logits[i];
    std::vector<std::uint8_t> mask(6, 1);
    Var p1 = softmax_masked(tape, make_tensor({6}, logits), mask);
    Var p2 = softmax_masked(tape, make_tensor({6}, doubled), mask);
    CHECK(predict_answer(p1) == predict_answer(p2));
  }
}

TEST_CASE("multiple-choice restriction never scores below open-ended") {
  Rng rng(109);
  Tape tape;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> logits(8);
    for (double& v : logits) v = rng.uniform(-2, 2);
    std::vector<std::uint8_t> mask(8, 1);
    Var p = softmax_masked(tape, make_tensor({8}, logits), mask);
    int gold = static_cast<int>(rng.bounded(8));
    std::vector<int> candidates{gold};
    for (int extra = 0; extra < 3; ++extra)
      candidates.push_back(static_cast<int>(rng.bounded(8)));
    double open = predict_answer(p) == gold ? 1.0 : 0.0;
    double restricted = predict_answer_restricted(p, candidates) == gold ? 1.0 : 0.0;
    CHECK(restricted >= open);
  }
}
