// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

// Random conversations, lexicons and knowledge for property tests. Each world
// is mirrored into the plain containers the oracles read.

#pragma once

#include <cctype>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "kec/corpus.hpp"
#include "kec/knowledge.hpp"
#include "kec/sentiment.hpp"
#include "kec/util.hpp"
#include "oracles.hpp"

namespace fixtures {

inline const std::vector<std::string>& vocabulary() {
  static const std::vector<std::string> v{"happy", "Sad",   "glad!", "upset", "fine", "table", "calm,",
                                          "angry", "Great", "bad",   "ok",    "the",  "a",     "feels",
                                          "wants", "rest",  "cry",   "smile", "hope", "fear"};
  return v;
}

struct World {
  kec::Conversation conv;
  kec::KnowledgeStore store;
  kec::Lexicon lex;
  oracle::BeamMap beams;
  oracle::LexMap lexmap;
};

inline std::string random_text(std::mt19937_64& rng, int min_words, int max_words) {
  const auto& v = vocabulary();
  std::uniform_int_distribution<int> len(min_words, max_words);
  std::uniform_int_distribution<std::size_t> pick(0, v.size() - 1);
  std::string s;
  const int n = len(rng);
  for (int w = 0; w < n; ++w) s += (w ? " " : "") + v[pick(rng)];
  return s;
}

// Random lexicon over (lowercased, punctuation-free) vocabulary words; some
// words stay out of it so the (0, 0, 1) fallback is exercised.
inline void random_lexicon(std::mt19937_64& rng, kec::Lexicon& lex, oracle::LexMap& map) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::string w : vocabulary()) {
    std::string clean;
    for (char c : w)
      if (std::isalpha(static_cast<unsigned char>(c))) clean += static_cast<char>(std::tolower(c));
    if (map.count(clean) || u(rng) < 0.25) continue;
    // Quantized scores make exact ties between |pos - neg| and neu reachable.
    const oracle::Scores s{std::round(u(rng) * 4) / 4, std::round(u(rng) * 4) / 4, std::round(u(rng) * 4) / 4};
    lex.add(clean, {s[0], s[1], s[2]});
    map[clean] = s;
  }
}

inline World random_world(std::mt19937_64& rng, int n, const std::string& id = "c") {
  World w;
  random_lexicon(rng, w.lex, w.lexmap);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> emo(0, kec::kAllEmotions.size() - 1);
  w.conv.id = id;
  for (int i = 1; i <= n; ++i) {
    kec::Utterance utt;
    utt.id = id + "_" + std::to_string(i);
    utt.conv_id = id;
    utt.index = i;
    utt.speaker = u(rng) < 0.5 ? "A" : "B";
    utt.emotion = u(rng) < 0.35 ? kec::Emotion::Neutral : kec::kAllEmotions[emo(rng)];
    for (const std::string& t : kec::split_whitespace(random_text(rng, 1, 6))) utt.tokens.push_back(t);
    for (kec::CskRelation r : kec::kAllRelations) {
      kec::Beams b;
      std::vector<std::string> plain;
      for (auto& beam : b) {
        beam = random_text(rng, 1, 4);
        plain.push_back(beam);
      }
      w.store.add(utt.id, r, b);
      w.beams[{utt.id, std::string(kec::to_string(r))}] = plain;
    }
    w.conv.utterances.push_back(std::move(utt));
  }
  for (int i = 1; i <= n; ++i) {
    if (w.conv.at(i).emotion == kec::Emotion::Neutral) continue;
    for (int j = 1; j <= i; ++j)
      if (u(rng) < 0.2) w.conv.causal_pairs.push_back({i, j});
  }
  return w;
}

}  // namespace fixtures
