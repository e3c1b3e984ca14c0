// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kec/corpus.hpp"

namespace kec {

enum class Sentiment : std::uint8_t { Positive, Negative, Neutral };

std::string_view to_string(Sentiment s);

struct WordScores {
  double pos = 0.0;
  double neg = 0.0;
  double neu = 1.0;

  bool operator==(const WordScores&) const = default;
};

// Word -> (pos, neg, neu). Keys are stored lowercased; absent words score (0, 0, 1).
class Lexicon {
 public:
  // Throws ValidationError on duplicates, negative or non-finite scores.
  void add(std::string_view word, WordScores scores);
  WordScores lookup(std::string_view word) const;
  std::size_t size() const { return entries_.size(); }

  const std::unordered_map<std::string, WordScores>& entries() const { return entries_; }

 private:
  std::unordered_map<std::string, WordScores> entries_;
};

// "word<TAB>pos<TAB>neg<TAB>neu" per line, '#' comment lines and blank lines skipped.
Lexicon parse_lexicon(std::string_view text, const std::string& source = "<lexicon>");
Lexicon load_lexicon(const std::filesystem::path& path);
std::string serialize_lexicon(const Lexicon& lex);

// Lowercased whitespace tokens with ASCII punctuation removed; tokens that
// become empty are dropped.
std::vector<std::string> scoring_tokens(std::string_view text);

// r_s = r_pos - r_neg when |r_pos - r_neg| > r_neu, else 0, where r_* are
// per-token averages. Throws ValidationError when no token survives.
double score_knowledge(std::string_view text, const Lexicon& lex);

inline Sentiment polarity(double r_s) {
  return r_s > 0.0 ? Sentiment::Positive : (r_s < 0.0 ? Sentiment::Negative : Sentiment::Neutral);
}

inline constexpr std::string_view kSeparator = " [sep] ";
inline constexpr std::string_view kNoneText = "none";
inline constexpr std::size_t kBeamCount = 5;

struct KnowledgeBuckets {
  std::string pos{kNoneText};
  std::string neg{kNoneText};
  std::string neu{kNoneText};

  const std::string& operator[](Sentiment s) const {
    return s == Sentiment::Positive ? pos : (s == Sentiment::Negative ? neg : neu);
  }
  bool operator==(const KnowledgeBuckets&) const = default;
};

// Buckets the beams by the sign of their score, joining each bucket with
// kSeparator in beam order. Empty buckets are "none". Requires exactly five beams.
KnowledgeBuckets split_knowledge(std::span<const std::string> beams, const Lexicon& lex);

// happiness -> positive, neutral -> neutral, everything else -> negative.
constexpr Sentiment e2s(Emotion e) {
  if (e == Emotion::Happiness) return Sentiment::Positive;
  if (e == Emotion::Neutral) return Sentiment::Neutral;
  return Sentiment::Negative;
}

}  // namespace kec
