// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kec/corpus.hpp"
#include "kec/sentiment.hpp"

namespace kec {

enum class CskRelation : std::uint8_t { XEffect, XReact, OEffect, OReact };

inline constexpr std::array<CskRelation, 4> kAllRelations{CskRelation::XEffect, CskRelation::XReact,
                                                          CskRelation::OEffect, CskRelation::OReact};

std::string_view to_string(CskRelation r);
std::optional<CskRelation> parse_relation(std::string_view name);

using Beams = std::array<std::string, kBeamCount>;

// Commonsense beams per (utterance id, relation).
class KnowledgeStore {
 public:
  // Throws ValidationError on duplicate keys or empty beams.
  void add(const std::string& utterance_id, CskRelation rel, Beams beams);
  // Throws ValidationError naming the missing key.
  const Beams& beams(const std::string& utterance_id, CskRelation rel) const;
  bool contains(const std::string& utterance_id, CskRelation rel) const;
  std::size_t size() const { return entries_.size(); }

  // Every utterance of the corpus must have all four relations.
  void check_coverage(const Corpus& corpus) const;

  const std::map<std::pair<std::string, CskRelation>, Beams>& entries() const { return entries_; }

 private:
  std::map<std::pair<std::string, CskRelation>, Beams> entries_;
};

// One JSON record per line: {"utterance_id", "relation", "beams": [5 strings]}.
KnowledgeStore parse_knowledge(std::string_view text, const std::string& source = "<knowledge>");
KnowledgeStore load_knowledge(const std::filesystem::path& path);
std::string serialize_knowledge(const KnowledgeStore& store);

struct RelationPair {
  CskRelation effect;
  CskRelation react;

  bool operator==(const RelationPair&) const = default;
};

// Same speaker -> (xEffect, xReact); otherwise (oEffect, oReact).
RelationPair select_relations(std::string_view speaker_target, std::string_view speaker_source);

// Splits effect and react beams separately and joins the matching buckets
// (effect + " [sep] " + react), dropping "none" halves.
KnowledgeBuckets merged_buckets(const Beams& effect, const Beams& react, const Lexicon& lex);

// Lower-triangular N x N matrix of knowledge passing. Indices are 1-based
// with j <= i (i: target, j: source).
class KnowledgeMatrix {
 public:
  struct Cell {
    bool item = false;
    std::string klg{kNoneText};

    bool operator==(const Cell&) const = default;
  };

  KnowledgeMatrix() = default;
  explicit KnowledgeMatrix(int n);

  int size() const { return n_; }
  const Cell& at(int i, int j) const { return cells_[offset(i, j)]; }
  Cell& at(int i, int j) { return cells_[offset(i, j)]; }

  bool operator==(const KnowledgeMatrix&) const = default;

 private:
  std::size_t offset(int i, int j) const;

  int n_ = 0;
  std::vector<Cell> cells_;
};

struct KnowledgeOptions {
  int window = 2;                 // w_k >= 1
  bool neutral_knowledge = true;  // prefix neutral bucket for neutral sources
};

KnowledgeMatrix build_knowledge_matrix(const Conversation& conv, const KnowledgeStore& store,
                                       const Lexicon& lex, const KnowledgeOptions& options);

}  // namespace kec
