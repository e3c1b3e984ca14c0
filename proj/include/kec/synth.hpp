// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#pragma once

#include <cstdint>

#include "kec/corpus.hpp"
#include "kec/knowledge.hpp"
#include "kec/sentiment.hpp"

namespace kec {

// Token that flags a cause. It appears only in knowledge beams, never in
// utterance text, and is sentiment-free in the synthetic lexicon.
inline constexpr std::string_view kCauseMarker = "zqcause";

struct SynthOptions {
  std::size_t conversations = 8;
  int min_len = 2;
  int max_len = 8;
  std::uint64_t seed = 1;
  // Planted: non-neutral utterances carry the marker with probability
  // marker_rate, and (i, j) is causal iff e_i is non-neutral and j is marked.
  // Otherwise causes are drawn at random and the marker is noise.
  bool planted = true;
  double marker_rate = 0.35;
  double neutral_rate = 0.45;
};

struct SynthData {
  Corpus corpus;
  KnowledgeStore knowledge;
};

SynthData synth_corpus(const SynthOptions& options);
// Fixed three-utterance conversation (happiness / neutral / sadness, speakers
// A, B, A) with seeded beams; the gradient-check toy.
SynthData toy_corpus(std::uint64_t seed = 7);

// Lexicon covering every beam word the generator emits.
Lexicon synth_lexicon();

}  // namespace kec
