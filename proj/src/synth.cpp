// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#include "kec/synth.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <random>

#include "kec/error.hpp"
#include "kec/util.hpp"

namespace kec {
namespace {

constexpr std::array<const char*, 24> kFiller{
    "we",   "you",   "they",  "the",   "a",     "time",  "today", "tomorrow", "dinner", "movie", "train", "office",
    "call", "later", "maybe", "right", "think", "know",  "see",   "that",     "it",     "some",  "new",   "plan"};
constexpr std::array<const char*, 5> kPositive{"happy", "glad", "grateful", "relieved", "proud"};
constexpr std::array<const char*, 5> kNegative{"sad", "angry", "upset", "afraid", "annoyed"};
constexpr std::array<const char*, 5> kPlace{"work", "home", "bed", "store", "school"};
constexpr std::array<const char*, 3> kFunction{"feels", "is", "goes"};

template <typename A>
const char* pick(const A& arr, std::mt19937_64& rng) {
  return arr[std::uniform_int_distribution<std::size_t>(0, arr.size() - 1)(rng)];
}

// Two positive, two negative and one neutral beam, so every bucket is filled.
Beams make_beams(bool marked, std::mt19937_64& rng) {
  const std::string tail = marked ? " " + std::string(kCauseMarker) : "";
  Beams b;
  b[0] = std::string("feels ") + pick(kPositive, rng) + tail;
  b[1] = std::string("is ") + pick(kPositive, rng) + tail;
  b[2] = std::string("feels ") + pick(kNegative, rng) + tail;
  b[3] = std::string("is ") + pick(kNegative, rng) + tail;
  b[4] = std::string("goes to ") + pick(kPlace, rng) + tail;
  std::shuffle(b.begin(), b.end(), rng);
  return b;
}

}  // namespace

SynthData synth_corpus(const SynthOptions& o) {
  if (o.conversations < 1) throw ValidationError("synth: need at least one conversation");
  if (o.max_len < 2 || o.min_len < 1 || o.max_len < o.min_len)
    throw ValidationError("synth: need max_len >= 2 and 1 <= min_len <= max_len");
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> len_dist(o.min_len, o.max_len);
  std::uniform_int_distribution<int> words(3, 8);
  std::uniform_int_distribution<std::size_t> emo(1, kAllEmotions.size() - 1);

  SynthData out;
  for (std::size_t c = 0; c < o.conversations; ++c) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "synth-%04zu", c + 1);
    Conversation conv;
    conv.id = buf;
    const int n = len_dist(rng);
    std::vector<bool> marked;
    std::string speaker = unit(rng) < 0.5 ? "A" : "B";
    for (int i = 1; i <= n; ++i) {
      if (i > 1 && unit(rng) < 0.7) speaker = speaker == "A" ? "B" : "A";
      Utterance u;
      u.id = conv.id + "_u" + std::to_string(i);
      u.conv_id = conv.id;
      u.index = i;
      u.speaker = speaker;
      u.emotion = unit(rng) < o.neutral_rate ? Emotion::Neutral : kAllEmotions[emo(rng)];
      const int len = words(rng);
      for (int w = 0; w < len; ++w) u.tokens.emplace_back(pick(kFiller, rng));
      // Only utterances that cause at least their own emotion carry the marker.
      const bool m = unit(rng) < o.marker_rate && (!o.planted || u.emotion != Emotion::Neutral);
      marked.push_back(m);
      for (CskRelation r : kAllRelations) out.knowledge.add(u.id, r, make_beams(m, rng));
      conv.utterances.push_back(std::move(u));
    }
    for (int i = 1; i <= n; ++i) {
      if (conv.at(i).emotion == Emotion::Neutral) continue;
      if (o.planted) {
        for (int j = 1; j <= i; ++j)
          if (marked[static_cast<std::size_t>(j - 1)]) conv.causal_pairs.push_back({i, j});
      } else {
        const double u = unit(rng);
        if (u < 0.4) conv.causal_pairs.push_back({i, i});
        if (u >= 0.4 && u < 0.7 && i > 1) {
          const int j = std::uniform_int_distribution<int>(std::max(1, i - 2), i - 1)(rng);
          conv.causal_pairs.push_back({i, j});
        }
      }
    }
    std::sort(conv.causal_pairs.begin(), conv.causal_pairs.end());
    out.corpus.push_back(std::move(conv));
  }
  validate_corpus(out.corpus);
  return out;
}

SynthData toy_corpus(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SynthData out;
  Conversation conv;
  conv.id = "toy";
  const char* speakers[3] = {"A", "B", "A"};
  const Emotion emotions[3] = {Emotion::Happiness, Emotion::Neutral, Emotion::Sadness};
  const char* texts[3] = {"we got the new plan today", "that is some time", "maybe later then"};
  for (int i = 1; i <= 3; ++i) {
    Utterance u;
    u.id = "toy_u" + std::to_string(i);
    u.conv_id = conv.id;
    u.index = i;
    u.speaker = speakers[i - 1];
    u.emotion = emotions[i - 1];
    u.tokens = split_whitespace(texts[i - 1]);
    for (CskRelation r : kAllRelations) out.knowledge.add(u.id, r, make_beams(i != 2, rng));
    conv.utterances.push_back(std::move(u));
  }
  conv.causal_pairs = {{1, 1}, {3, 1}, {3, 3}};
  out.corpus.push_back(std::move(conv));
  validate_corpus(out.corpus);
  return out;
}

Lexicon synth_lexicon() {
  Lexicon lex;
  for (const char* w : kPositive) lex.add(w, {1, 0, 0});
  for (const char* w : kNegative) lex.add(w, {0, 1, 0});
  for (const char* w : kPlace) lex.add(w, {0, 0, 1});
  for (const char* w : kFunction) lex.add(w, {0, 0, 0});
  lex.add("to", {0, 0, 0});
  lex.add(kCauseMarker, {0, 0, 0});
  return lex;
}

}  // namespace kec
