// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#include "kec/sentiment.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>

#include "kec/error.hpp"
#include "kec/util.hpp"

namespace kec {

std::string_view to_string(Sentiment s) {
  switch (s) {
    case Sentiment::Positive: return "positive";
    case Sentiment::Negative: return "negative";
    case Sentiment::Neutral: return "neutral";
  }
  return "neutral";
}

void Lexicon::add(std::string_view word, WordScores scores) {
  std::string key = to_lower(word);
  if (key.empty()) throw ValidationError("lexicon entry with empty word");
  for (double v : {scores.pos, scores.neg, scores.neu}) {
    if (!std::isfinite(v) || v < 0.0)
      throw ValidationError("lexicon entry '" + key + "' has a negative or non-finite score");
  }
  if (!entries_.emplace(key, scores).second)
    throw ValidationError("duplicate lexicon word '" + key + "'");
}

WordScores Lexicon::lookup(std::string_view word) const {
  auto it = entries_.find(to_lower(word));
  return it == entries_.end() ? WordScores{} : it->second;
}

namespace {

double parse_score(const std::string& field, const std::string& source, std::size_t line) {
  double v = 0.0;
  const char* b = field.data();
  const char* e = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || ptr != e) throw ParseError(source, line, "bad score '" + field + "'");
  return v;
}

}  // namespace

Lexicon parse_lexicon(std::string_view text, const std::string& source) {
  Lexicon lex;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      std::size_t tab = line.find('\t', start);
      fields.push_back(trim(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start)));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 4) throw ParseError(source, line_no, "expected word<TAB>pos<TAB>neg<TAB>neu");
    WordScores s{parse_score(fields[1], source, line_no), parse_score(fields[2], source, line_no),
                 parse_score(fields[3], source, line_no)};
    try {
      lex.add(fields[0], s);
    } catch (const ValidationError& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  return lex;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  return parse_lexicon(read_file(path), path.string());
}

std::string serialize_lexicon(const Lexicon& lex) {
  std::map<std::string, WordScores> sorted(lex.entries().begin(), lex.entries().end());
  std::string out;
  char buf[64];
  for (const auto& [word, s] : sorted) {
    out += word;
    for (double v : {s.pos, s.neg, s.neu}) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
      out += '\t';
      out.append(buf, ptr);
    }
    out += '\n';
  }
  return out;
}

std::vector<std::string> scoring_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (std::string& tok : split_whitespace(text)) {
    std::string clean;
    clean.reserve(tok.size());
    for (unsigned char c : tok)
      if (!std::ispunct(c)) clean.push_back(static_cast<char>(std::tolower(c)));
    if (!clean.empty()) out.push_back(std::move(clean));
  }
  return out;
}

double score_knowledge(std::string_view text, const Lexicon& lex) {
  const std::vector<std::string> tokens = scoring_tokens(text);
  if (tokens.empty()) throw ValidationError("knowledge text '" + std::string(text) + "' has no scorable tokens");
  double pos = 0.0, neg = 0.0, neu = 0.0;
  for (const std::string& t : tokens) {
    const WordScores s = lex.lookup(t);
    pos += s.pos;
    neg += s.neg;
    neu += s.neu;
  }
  const double n = static_cast<double>(tokens.size());
  const double r_pos = pos / n, r_neg = neg / n, r_neu = neu / n;
  const double diff = r_pos - r_neg;
  return std::abs(diff) > r_neu ? diff : 0.0;
}

KnowledgeBuckets split_knowledge(std::span<const std::string> beams, const Lexicon& lex) {
  if (beams.size() != kBeamCount)
    throw ValidationError("expected " + std::to_string(kBeamCount) + " knowledge beams, got " +
                          std::to_string(beams.size()));
  std::vector<std::string> pos, neg, neu;
  for (const std::string& beam : beams) {
    switch (polarity(score_knowledge(beam, lex))) {
      case Sentiment::Positive: pos.push_back(beam); break;
      case Sentiment::Negative: neg.push_back(beam); break;
      case Sentiment::Neutral: neu.push_back(beam); break;
    }
  }
  auto bucket = [](const std::vector<std::string>& parts) {
    return parts.empty() ? std::string(kNoneText) : join(parts, kSeparator);
  };
  return {bucket(pos), bucket(neg), bucket(neu)};
}

}  // namespace kec
