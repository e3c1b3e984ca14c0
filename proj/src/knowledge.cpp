// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#include "kec/knowledge.hpp"

#include <algorithm>
#include <json.hpp>

#include "kec/error.hpp"
#include "kec/util.hpp"

namespace kec {

using nlohmann::json;

std::string_view to_string(CskRelation r) {
  switch (r) {
    case CskRelation::XEffect: return "xEffect";
    case CskRelation::XReact: return "xReact";
    case CskRelation::OEffect: return "oEffect";
    case CskRelation::OReact: return "oReact";
  }
  return "xEffect";
}

std::optional<CskRelation> parse_relation(std::string_view name) {
  for (CskRelation r : kAllRelations)
    if (to_string(r) == name) return r;
  return std::nullopt;
}

void KnowledgeStore::add(const std::string& utterance_id, CskRelation rel, Beams beams) {
  const std::string key = "'" + utterance_id + "'/" + std::string(to_string(rel));
  for (const std::string& b : beams)
    if (trim(b).empty()) throw ValidationError("empty knowledge beam for " + key);
  if (!entries_.emplace(std::make_pair(utterance_id, rel), std::move(beams)).second)
    throw ValidationError("duplicate knowledge record for " + key);
}

const Beams& KnowledgeStore::beams(const std::string& utterance_id, CskRelation rel) const {
  auto it = entries_.find({utterance_id, rel});
  if (it == entries_.end())
    throw ValidationError("missing knowledge for '" + utterance_id + "'/" + std::string(to_string(rel)));
  return it->second;
}

bool KnowledgeStore::contains(const std::string& utterance_id, CskRelation rel) const {
  return entries_.contains({utterance_id, rel});
}

void KnowledgeStore::check_coverage(const Corpus& corpus) const {
  for (const Conversation& c : corpus)
    for (const Utterance& u : c.utterances)
      for (CskRelation r : kAllRelations) (void)beams(u.id, r);
}

KnowledgeStore parse_knowledge(std::string_view text, const std::string& source) {
  KnowledgeStore store;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      const json rec = json::parse(line);
      const std::string id = rec.at("utterance_id").get<std::string>();
      const std::string rel_name = rec.at("relation").get<std::string>();
      auto rel = parse_relation(rel_name);
      if (!rel) throw ValidationError("unknown relation '" + rel_name + "'");
      const json& beams = rec.at("beams");
      if (!beams.is_array() || beams.size() != kBeamCount)
        throw ValidationError("'" + id + "'/" + rel_name + " has " +
                              std::to_string(beams.is_array() ? beams.size() : 0) + " beams, expected " +
                              std::to_string(kBeamCount));
      Beams b;
      for (std::size_t k = 0; k < kBeamCount; ++k) b[k] = beams[k].get<std::string>();
      store.add(id, *rel, std::move(b));
    } catch (const json::exception& e) {
      throw ParseError(source, line_no, std::string("malformed record: ") + e.what());
    } catch (const ValidationError& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  return store;
}

KnowledgeStore load_knowledge(const std::filesystem::path& path) {
  return parse_knowledge(read_file(path), path.string());
}

std::string serialize_knowledge(const KnowledgeStore& store) {
  std::string out;
  for (const auto& [key, beams] : store.entries()) {
    json rec{{"utterance_id", key.first},
             {"relation", std::string(to_string(key.second))},
             {"beams", json(std::vector<std::string>(beams.begin(), beams.end()))}};
    out += rec.dump();
    out += '\n';
  }
  return out;
}

RelationPair select_relations(std::string_view speaker_target, std::string_view speaker_source) {
  if (speaker_target == speaker_source) return {CskRelation::XEffect, CskRelation::XReact};
  return {CskRelation::OEffect, CskRelation::OReact};
}

KnowledgeBuckets merged_buckets(const Beams& effect, const Beams& react, const Lexicon& lex) {
  const KnowledgeBuckets e = split_knowledge(effect, lex);
  const KnowledgeBuckets r = split_knowledge(react, lex);
  auto merge = [](const std::string& a, const std::string& b) {
    if (a == kNoneText) return b;
    if (b == kNoneText) return a;
    return a + std::string(kSeparator) + b;
  };
  return {merge(e.pos, r.pos), merge(e.neg, r.neg), merge(e.neu, r.neu)};
}

KnowledgeMatrix::KnowledgeMatrix(int n) : n_(n) {
  if (n < 0) throw ShapeError("negative matrix size");
  cells_.resize(static_cast<std::size_t>(n) * (n + 1) / 2);
}

std::size_t KnowledgeMatrix::offset(int i, int j) const {
  if (i < 1 || i > n_ || j < 1 || j > i)
    throw ShapeError("knowledge cell (" + std::to_string(i) + "," + std::to_string(j) + ") outside lower triangle of size " +
                     std::to_string(n_));
  return static_cast<std::size_t>(i - 1) * i / 2 + static_cast<std::size_t>(j - 1);
}

KnowledgeMatrix build_knowledge_matrix(const Conversation& conv, const KnowledgeStore& store,
                                       const Lexicon& lex, const KnowledgeOptions& options) {
  if (options.window < 1) throw ValidationError("knowledge window must be >= 1");
  const int n = conv.size();
  KnowledgeMatrix ak(n);
  for (int j = 1; j <= n; ++j) {
    const Utterance& src = conv.at(j);
    const KnowledgeBuckets kx = merged_buckets(store.beams(src.id, CskRelation::XEffect),
                                               store.beams(src.id, CskRelation::XReact), lex);
    const KnowledgeBuckets ko = merged_buckets(store.beams(src.id, CskRelation::OEffect),
                                               store.beams(src.id, CskRelation::OReact), lex);
    const int last = std::min(j + options.window, n);
    for (int i = j; i <= last; ++i) {
      const Utterance& tgt = conv.at(i);
      const KnowledgeBuckets& k = tgt.speaker == src.speaker ? kx : ko;
      const Sentiment target_sent = e2s(tgt.emotion);
      if (target_sent == Sentiment::Neutral) continue;
      auto& cell = ak.at(i, j);
      cell.item = true;
      if (options.neutral_knowledge && e2s(src.emotion) == Sentiment::Neutral)
        cell.klg = k.neu + std::string(kSeparator) + k[target_sent];
      else
        cell.klg = k[target_sent];
    }
  }
  return ak;
}

}  // namespace kec
