// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "kec/ad/ops.hpp"
#include "kec/model.hpp"
#include "kec/train.hpp"
#include "oracles.hpp"

using namespace kec;

namespace {

ModelConfig small_config() {
  ModelConfig c = toy_model_config();
  c.d_u = 8;
  c.d_e = 4;
  c.mlp_hidden = 6;
  c.encoder_dim = 6;
  c.encoder_buckets = 64;
  return c;
}

std::vector<double> values(const ad::Tensor& t) { return {t.value().begin(), t.value().end()}; }

KecGraph graph_of(const fixtures::World& w, int wc = 2, int wk = 2) {
  GraphOptions o;
  o.context_window = wc;
  o.knowledge.window = wk;
  return build_graph(w.conv, &w.store, &w.lex, o);
}

// Random MLP biases push probabilities off 0.5 so the comparison is not vacuous.
void perturb_biases(KecModel& m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (const char* n : {"h0.b", "mlp.b1", "mlp.b2", "mlp.b3"}) ad::uniform_fill(m.params().get(n), 0.5, rng);
}

const std::string& src_id(const fixtures::World& w, int k) { return w.conv.at(k).id; }

}  // namespace

TEST_CASE("forward matches the straight-line oracle") {
  std::mt19937_64 rng(31);
  std::vector<ModelConfig> variants;
  variants.push_back(small_config());
  {
    ModelConfig c = small_config();
    c.layers = 1;
    variants.push_back(c);
  }
  for (int v = 0; v < 6; ++v) {
    ModelConfig c = small_config();
    if (v == 0) c.direct_add = true;
    if (v == 1) c.use_csk = false;
    if (v == 2) c.use_gru_k = false;
    if (v == 3) c.use_gru_s = false;
    if (v == 4) c.use_emotion_emb = false;
    if (v == 5) c.layer_concat = LayerConcat::Last;
    variants.push_back(c);
  }
  for (std::size_t v = 0; v < variants.size(); ++v) {
    const ModelConfig& c = variants[v];
    for (int trial = 0; trial < 3; ++trial) {
      const fixtures::World w = fixtures::random_world(rng, 4);
      const KecGraph g = graph_of(w, 1 + trial, 2);
      KecModel m(c);
      m.initialize(100 + v * 10 + static_cast<std::uint64_t>(trial));
      perturb_biases(m, 7 + static_cast<std::uint64_t>(trial));
      ad::Tape tape(false);
      const ForwardResult r = m.forward(tape, g);
      const oracle::DagOutput o = oracle::dag_forward(c, m.params(), g);
      INFO("variant " << v << " trial " << trial);
      REQUIRE(r.states.size() == o.h.size());
      for (std::size_t l = 0; l < o.h.size(); ++l)
        for (std::size_t i = 0; i < 4; ++i) {
          const auto got = values(r.states[l][i]);
          for (std::size_t k = 0; k < c.d_u; ++k) {
            const double tol = l == 0 ? 1e-12 : 1e-10;
            CHECK(std::abs(got[k] - o.h[l][i][k]) <= tol);
          }
        }
      const auto p = values(r.probs);
      REQUIRE(p.size() == 10);
      for (std::size_t k = 0; k < p.size(); ++k) CHECK(std::abs(p[k] - o.probs[k]) <= 1e-10);
    }
  }
}

TEST_CASE("zero predictor gives one half everywhere; single utterance") {
  std::mt19937_64 rng(32);
  const fixtures::World w = fixtures::random_world(rng, 5);
  KecModel m(small_config());
  m.initialize(3);
  for (const char* n : {"mlp.w1", "mlp.w2", "mlp.w3", "mlp.b1", "mlp.b2", "mlp.b3"})
    std::fill(m.params().get(n).value().begin(), m.params().get(n).value().end(), 0.0);
  ad::Tape tape(false);
  for (double p : values(m.forward(tape, graph_of(w)).probs)) CHECK(p == 0.5);

  const fixtures::World one = fixtures::random_world(rng, 1);
  KecModel m1(small_config());
  m1.initialize(4);
  ad::Tape t1(false);
  const ForwardResult r = m1.forward(t1, graph_of(one));
  CHECK(r.probs.rows() == 1);
  CHECK(r.pairs.front().target_index == 1);
  CHECK(r.pairs.front().source_index == 1);
}

TEST_CASE("zero inputs give zero initial states") {
  std::mt19937_64 rng(33);
  const fixtures::World w = fixtures::random_world(rng, 3);
  KecModel m(small_config());
  m.initialize(5);
  for (const char* n : {"encoder.proj.w", "encoder.proj.b", "emotion.table", "h0.b"})
    std::fill(m.params().get(n).value().begin(), m.params().get(n).value().end(), 0.0);
  ad::Tape tape(false);
  for (const ad::Tensor& h : m.init_node_states(tape, graph_of(w)))
    for (double x : values(h)) CHECK(x == 0.0);
}

TEST_CASE("attention rows are normalized") {
  std::mt19937_64 rng(34);
  for (int trial = 0; trial < 20; ++trial) {
    const fixtures::World w = fixtures::random_world(rng, 2 + trial % 7);
    const KecGraph g = graph_of(w, 1 + trial % 3, 2);
    KecModel m(small_config());
    m.initialize(static_cast<std::uint64_t>(trial));
    ad::Tape tape(false);
    const ForwardResult r = m.forward(tape, g, {false, 0, true});
    REQUIRE(r.attention.size() == static_cast<std::size_t>(m.config().layers));
    for (const auto& layer : r.attention)
      for (int i = 1; i <= g.size(); ++i) {
        const AttentionRow& row = layer[static_cast<std::size_t>(i - 1)];
        CHECK(row.sources == g.a_c().neighbors(i));
        if (row.sources.empty()) continue;
        double s = 0.0;
        for (double a : row.weights) {
          CHECK(a >= 0.0);
          s += a;
        }
        CHECK(std::abs(s - 1.0) <= 1e-9);
      }
  }
}

TEST_CASE("future utterances do not affect earlier pairs") {
  std::mt19937_64 rng(35);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 3 + trial % 5;
    fixtures::World w = fixtures::random_world(rng, n);
    KecModel m(small_config());
    m.initialize(static_cast<std::uint64_t>(trial));
    const KecGraph g = graph_of(w);
    ad::Tape t1(false);
    const auto base = values(m.forward(t1, g).probs);

    const int cut = 2 + static_cast<int>(rng() % static_cast<std::uint64_t>(n - 1));
    const fixtures::World other = fixtures::random_world(rng, n);
    fixtures::World edited;
    edited.conv = w.conv;
    edited.lex = w.lex;
    for (int k = 1; k <= n; ++k) {
      auto& u = edited.conv.utterances[static_cast<std::size_t>(k - 1)];
      if (k >= cut) {
        const auto& src = other.conv.at(k);
        u.tokens = src.tokens;
        u.speaker = src.speaker;
        u.emotion = src.emotion;
      }
      for (CskRelation r : kAllRelations)
        edited.store.add(u.id, r, k < cut ? w.store.beams(u.id, r) : other.store.beams(src_id(other, k), r));
    }
    const KecGraph g2 = graph_of(edited);
    ad::Tape t2(false);
    const ForwardResult r2 = m.forward(t2, g2);
    const auto moved = values(r2.probs);
    for (std::size_t p = 0; p < r2.pairs.size(); ++p)
      if (r2.pairs[p].target_index < cut) CHECK(moved[p] == base[p]);
  }
}

TEST_CASE("ablated model has fewer parameters") {
  ModelConfig full = small_config();
  ModelConfig dag = full;
  dag.use_csk = false;
  dag.use_gru_k = false;
  dag.use_gru_s = false;
  KecModel a(full), b(dag);
  CHECK(b.parameter_count() < a.parameter_count());
  CHECK(b.params().find("layer1.gru_k.w_ih") == nullptr);
  CHECK(a.params().find("layer1.gru_s.w_ih") != nullptr);
}

TEST_CASE("emotion label reaches the initial state") {
  std::mt19937_64 rng(36);
  fixtures::World w = fixtures::random_world(rng, 3);
  w.conv.utterances[2].emotion = Emotion::Anger;
  KecModel m(small_config());
  m.initialize(9);
  ad::Tape t1(false);
  const auto before = values(m.init_node_states(t1, graph_of(w))[2]);
  w.conv.utterances[2].emotion = Emotion::Fear;
  ad::Tape t2(false);
  const auto after = values(m.init_node_states(t2, graph_of(w))[2]);
  CHECK(before != after);

  ModelConfig off = small_config();
  off.use_emotion_emb = false;
  KecModel m2(off);
  m2.initialize(9);
  ad::Tape t3(false);
  const auto x = values(m2.init_node_states(t3, graph_of(w))[2]);
  w.conv.utterances[2].emotion = Emotion::Anger;
  ad::Tape t4(false);
  CHECK(values(m2.init_node_states(t4, graph_of(w))[2]) == x);
}

TEST_CASE("encoder caching and determinism") {
  KecModel m(small_config());
  m.initialize(1);
  ad::Tape tape(false);
  EncoderProvider::Cache cache;
  const ad::Tensor a = m.encoder().encode_text(tape, "none", cache);
  const ad::Tensor b = m.encoder().encode_text(tape, "none", cache);
  CHECK(a.id() == b.id());
  EncoderProvider::Cache other;
  CHECK(values(m.encoder().encode_text(tape, "none", other)) == values(a));
}

TEST_CASE("pair loss") {
  ad::Tape tape(false);
  const std::vector<double> labels{1, 0, 0, 1, 0};
  const ad::Tensor half = tape.constant({5, 1}, std::vector<double>(5, 0.5));
  CHECK(pair_loss(half, labels).item() == doctest::Approx(5 * std::log(2.0)).epsilon(1e-15));
  const ad::Tensor exact = tape.constant({5, 1}, labels);
  CHECK(pair_loss(exact, labels).item() < 1e-5);

  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> p(7), y(7);
    for (std::size_t k = 0; k < 7; ++k) {
      p[k] = u(rng);
      y[k] = static_cast<double>(rng() % 2);
    }
    const double got = pair_loss(tape.constant({7, 1}, p), y).item();
    CHECK(std::abs(got - oracle::bce(p, y)) <= 1e-12);
  }
  CHECK_THROWS(pair_loss(half, std::vector<double>{1, 0}));
}

TEST_CASE("end-to-end gradient check on the toy") {
  for (std::uint64_t seed : {1, 2}) {
    const ad::GradCheckResult r = gradient_check_toy(toy_model_config(), seed);
    INFO(r.worst_param << " " << r.worst_analytic << " " << r.worst_numeric);
    CHECK(r.max_rel_error < 1e-4);
  }
  ModelConfig one = toy_model_config();
  one.layers = 1;
  CHECK(gradient_check_toy(one, 3).max_rel_error < 1e-4);
}
