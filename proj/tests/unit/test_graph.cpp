// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#include <doctest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "kec/error.hpp"
#include "kec/graph.hpp"

using namespace kec;

namespace {

Conversation speakers_conv(const std::vector<std::string>& speakers) {
  Conversation c;
  c.id = "g";
  for (std::size_t k = 0; k < speakers.size(); ++k) {
    const int i = static_cast<int>(k) + 1;
    c.utterances.push_back({"g" + std::to_string(i), "g", i, speakers[k], Emotion::Neutral, {"w"}});
  }
  return c;
}

}  // namespace

TEST_CASE("interaction matrix examples") {
  const InteractionMatrix one = build_interaction_matrix(speakers_conv({"A"}), 2);
  CHECK_FALSE(one.at(1, 1).item);
  CHECK(one.neighbors(1).empty());

  const InteractionMatrix m = build_interaction_matrix(speakers_conv({"A", "B", "A", "B"}), 2);
  std::vector<std::pair<int, int>> edges;
  for (int i = 1; i <= 4; ++i)
    for (int j = 1; j <= i; ++j)
      if (m.at(i, j).item) edges.emplace_back(i, j);
  CHECK(edges == std::vector<std::pair<int, int>>{{2, 1}, {3, 1}, {3, 2}, {4, 2}, {4, 3}});
  CHECK(m.at(3, 1).rel == RelationType::SD);
  CHECK(m.at(2, 1).rel == RelationType::ID);
  CHECK(m.neighbors(4) == std::vector<int>{2, 3});

  const InteractionMatrix full = build_interaction_matrix(speakers_conv({"A", "B", "A", "B", "B"}), 4);
  for (int i = 1; i <= 5; ++i)
    for (int j = 1; j < i; ++j) CHECK(full.at(i, j).item);
}

TEST_CASE("property: neighbor counts, relation types and widening") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 10);
    std::vector<std::string> sp;
    for (int i = 0; i < n; ++i) sp.push_back(rng() % 2 ? "A" : "B");
    const Conversation c = speakers_conv(sp);
    const int wc = 1 + static_cast<int>(rng() % 4);
    const InteractionMatrix m = build_interaction_matrix(c, wc);
    const InteractionMatrix wide = build_interaction_matrix(c, wc + 1);
    for (int i = 1; i <= n; ++i) {
      CHECK(m.neighbors(i).size() == static_cast<std::size_t>(std::min(i - 1, wc)));
      CHECK_FALSE(m.at(i, i).item);
      for (int j = 1; j <= i; ++j) {
        CHECK((m.at(i, j).rel == RelationType::SD) == (sp[static_cast<std::size_t>(i - 1)] == sp[static_cast<std::size_t>(j - 1)]));
        if (m.at(i, j).item) CHECK(wide.at(i, j).item);
      }
    }
  }
}

TEST_CASE("assemble rejects mismatched or empty inputs") {
  const Conversation c3 = speakers_conv({"A", "B", "A"});
  CHECK(assemble_kec(c3, InteractionMatrix(3), KnowledgeMatrix(3)).size() == 3);
  CHECK_THROWS_AS(assemble_kec(c3, InteractionMatrix(3), KnowledgeMatrix(4)), ShapeError);
  Conversation empty;
  empty.id = "e";
  CHECK_THROWS_AS(assemble_kec(empty, InteractionMatrix(0), KnowledgeMatrix(0)), ShapeError);
}

TEST_CASE("graph serialization") {
  std::mt19937_64 rng(4);
  std::vector<KecGraph> graphs;
  for (int k = 0; k < 5; ++k) {
    const fixtures::World w = fixtures::random_world(rng, 1 + k, "s" + std::to_string(k));
    GraphOptions o;
    o.context_window = 1 + k % 3;
    graphs.push_back(build_graph(w.conv, &w.store, &w.lex, o));
  }
  const auto bytes = serialize_graphs(graphs);
  CHECK(deserialize_graphs(bytes) == graphs);
  CHECK(deserialize_graphs({}).empty());
  CHECK(deserialize_graphs(serialize_graphs({})).empty());

  auto truncated = bytes;
  truncated.resize(bytes.size() - 3);
  CHECK_THROWS_AS(deserialize_graphs(truncated), CorruptionError);
  auto flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x40;
  CHECK_THROWS_AS(deserialize_graphs(flipped), CorruptionError);
  auto version = bytes;
  version[4] = 99;
  CHECK_THROWS_AS(deserialize_graphs(version), CorruptionError);

  const std::string dump = dump_graph(graphs[2]);
  CHECK(dump.find("N=3") != std::string::npos);
}

TEST_CASE("knowledge switch off leaves A_k empty") {
  std::mt19937_64 rng(8);
  const fixtures::World w = fixtures::random_world(rng, 5);
  GraphOptions o;
  o.use_knowledge = false;
  const KecGraph g = build_graph(w.conv, nullptr, nullptr, o);
  for (int i = 1; i <= 5; ++i)
    for (int j = 1; j <= i; ++j) CHECK(g.a_k().at(i, j) == KnowledgeMatrix::Cell{});
}
