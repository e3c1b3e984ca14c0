// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "kec/error.hpp"
#include "kec/knowledge.hpp"
#include "kec/util.hpp"
#include "oracles.hpp"

using namespace kec;

namespace {

// Beams [good t, bad t, plain t, bad t, plain t] with a zero-score tag word t,
// so each bucket's text is known by construction.
std::string tag(const std::string& utt, CskRelation r) { return utt + std::string(to_string(r)); }

Beams tagged_beams(const std::string& t) {
  return {"good " + t, "bad " + t, "plain " + t, "bad " + t, "plain " + t};
}

struct Hand {
  Conversation conv;
  KnowledgeStore store;
  Lexicon lex;
};

Hand hand_world() {
  Hand h;
  h.conv.id = "h";
  const std::array<const char*, 3> speakers{"A", "B", "A"};
  const std::array<Emotion, 3> emotions{Emotion::Neutral, Emotion::Sadness, Emotion::Sadness};
  h.lex.add("good", {1, 0, 0});
  h.lex.add("bad", {0, 1, 0});
  h.lex.add("plain", {0, 0, 1});
  for (int i = 1; i <= 3; ++i) {
    const std::string id = "h" + std::to_string(i);
    h.conv.utterances.push_back({id, "h", i, speakers[i - 1], emotions[i - 1], {"hello"}});
    for (CskRelation r : kAllRelations) {
      h.store.add(id, r, tagged_beams(to_lower(tag(id, r))));
      h.lex.add(to_lower(tag(id, r)), {0, 0, 0});
    }
  }
  return h;
}

std::string bucket(const std::string& id, CskRelation effect, CskRelation react, const std::string& word, int copies) {
  std::string out;
  for (CskRelation r : {effect, react})
    for (int c = 0; c < copies; ++c) out += (out.empty() ? "" : " [sep] ") + word + " " + to_lower(tag(id, r));
  return out;
}

}  // namespace

TEST_CASE("relation selection") {
  CHECK(select_relations("A", "A") == RelationPair{CskRelation::XEffect, CskRelation::XReact});
  CHECK(select_relations("A", "B") == RelationPair{CskRelation::OEffect, CskRelation::OReact});
}

TEST_CASE("hand trace on three utterances") {
  const Hand h = hand_world();
  const KnowledgeMatrix m = build_knowledge_matrix(h.conv, h.store, h.lex, {2, true});
  using R = CskRelation;
  const std::string o_neu = bucket("h1", R::OEffect, R::OReact, "plain", 2);
  const std::string o_neg = bucket("h1", R::OEffect, R::OReact, "bad", 2);
  const std::string x1_neu = bucket("h1", R::XEffect, R::XReact, "plain", 2);
  const std::string x1_neg = bucket("h1", R::XEffect, R::XReact, "bad", 2);
  CHECK_FALSE(m.at(1, 1).item);
  CHECK(m.at(1, 1).klg == "none");
  CHECK(m.at(2, 1).item);
  CHECK(m.at(2, 1).klg == o_neu + " [sep] " + o_neg);
  CHECK(m.at(2, 2).item);
  CHECK(m.at(2, 2).klg == bucket("h2", R::XEffect, R::XReact, "bad", 2));
  CHECK(m.at(3, 1).item);
  CHECK(m.at(3, 1).klg == x1_neu + " [sep] " + x1_neg);
  CHECK(m.at(3, 2).klg == bucket("h2", R::OEffect, R::OReact, "bad", 2));

  const KnowledgeMatrix plain = build_knowledge_matrix(h.conv, h.store, h.lex, {2, false});
  CHECK(plain.at(2, 1).klg == o_neg);
  const KnowledgeMatrix narrow = build_knowledge_matrix(h.conv, h.store, h.lex, {1, true});
  CHECK_FALSE(narrow.at(3, 1).item);
  CHECK(narrow.at(3, 1).klg == "none");
}

TEST_CASE("merged buckets drop none halves") {
  Lexicon lex;
  lex.add("good", {1, 0, 0});
  const Beams e{"good", "good", "good", "good", "good"};
  const Beams r{"x", "x", "x", "x", "x"};
  const KnowledgeBuckets k = merged_buckets(e, r, lex);
  CHECK(k.pos == "good [sep] good [sep] good [sep] good [sep] good");
  CHECK(k.neu == "x [sep] x [sep] x [sep] x [sep] x");
  CHECK(k.neg == "none");
}

TEST_CASE("all-neutral conversation has no knowledge edges") {
  std::mt19937_64 rng(3);
  fixtures::World w = fixtures::random_world(rng, 6);
  for (auto& u : w.conv.utterances) u.emotion = Emotion::Neutral;
  w.conv.causal_pairs.clear();
  const KnowledgeMatrix m = build_knowledge_matrix(w.conv, w.store, w.lex, {3, true});
  for (int i = 1; i <= 6; ++i)
    for (int j = 1; j <= i; ++j) CHECK(m.at(i, j) == KnowledgeMatrix::Cell{});
}

TEST_CASE("property: oracle equivalence and invariants") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 150; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 8);
    const fixtures::World w = fixtures::random_world(rng, n);
    const int wk = 1 + static_cast<int>(rng() % 3);
    for (bool nk : {true, false}) {
      const KnowledgeMatrix m = build_knowledge_matrix(w.conv, w.store, w.lex, {wk, nk});
      const auto ref = oracle::algorithm1(w.conv, w.beams, w.lexmap, wk, nk);
      for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= i; ++j) {
          const auto& c = m.at(i, j);
          const auto& o = ref[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)];
          CHECK(c.item == o.item);
          CHECK(c.klg == o.klg);
          if (c.item) {
            CHECK(i - j <= wk);
            CHECK(e2s(w.conv.at(i).emotion) != Sentiment::Neutral);
          } else {
            CHECK(c.klg == "none");
          }
        }
      const KnowledgeMatrix wider = build_knowledge_matrix(w.conv, w.store, w.lex, {wk + 1, nk});
      for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= i; ++j)
          if (m.at(i, j).item) CHECK(wider.at(i, j) == m.at(i, j));
      CHECK(build_knowledge_matrix(w.conv, w.store, w.lex, {wk, nk}) == m);
    }
  }
}

TEST_CASE("knowledge file loading") {
  const std::string five = R"("beams":["a","b","c","d","e"]})";
  std::string text;
  for (const char* u : {"u1", "u2"})
    for (const char* r : {"xEffect", "xReact", "oEffect", "oReact"})
      text += std::string(R"({"utterance_id":")") + u + R"(","relation":")" + r + R"(",)" + five + "\n";
  const KnowledgeStore s = parse_knowledge(text);
  CHECK(s.size() == 8);
  CHECK(parse_knowledge(serialize_knowledge(s)).entries() == s.entries());

  try {
    parse_knowledge(R"({"utterance_id":"u9","relation":"xReact","beams":["a","b","c","d"]})");
    FAIL("expected beam count error");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("u9") != std::string::npos);
    CHECK(msg.find("xReact") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_knowledge(text + text), Error);
  CHECK_THROWS_AS(parse_knowledge(R"({"utterance_id":"u1","relation":"xWant",)" + five), Error);

  Corpus corpus(1);
  corpus[0].id = "c";
  corpus[0].utterances.push_back({"u1", "c", 1, "A", Emotion::Neutral, {"hi"}});
  CHECK_NOTHROW(s.check_coverage(corpus));
  corpus[0].utterances.push_back({"u3", "c", 2, "A", Emotion::Neutral, {"hi"}});
  CHECK_THROWS_AS(s.check_coverage(corpus), ValidationError);
}
