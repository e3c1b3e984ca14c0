// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kec/corpus.hpp"
#include "kec/knowledge.hpp"

namespace kec {

// SD: same speaker, ID: inter-speaker.
enum class RelationType : std::uint8_t { SD, ID };

std::string_view to_string(RelationType r);

// Lower-triangular contextual adjacency; 1-based (i target, j source), j <= i.
// item[i, j] = 1 iff i - w_c <= j < i. The diagonal carries no contextual edge.
class InteractionMatrix {
 public:
  struct Cell {
    bool item = false;
    RelationType rel = RelationType::SD;

    bool operator==(const Cell&) const = default;
  };

  InteractionMatrix() = default;
  explicit InteractionMatrix(int n);

  int size() const { return n_; }
  const Cell& at(int i, int j) const { return cells_[offset(i, j)]; }
  Cell& at(int i, int j) { return cells_[offset(i, j)]; }

  // Sources j with item[i, j] = 1, ascending.
  std::vector<int> neighbors(int i) const;

  bool operator==(const InteractionMatrix&) const = default;

 private:
  std::size_t offset(int i, int j) const;

  int n_ = 0;
  std::vector<Cell> cells_;
};

InteractionMatrix build_interaction_matrix(const Conversation& conv, int window);

struct GraphNode {
  std::string utterance_id;
  std::string speaker;
  Emotion emotion = Emotion::Neutral;
  std::vector<std::string> tokens;

  bool operator==(const GraphNode&) const = default;
};

// G = (V, A_c, A_k) for one conversation. Immutable once assembled.
class KecGraph {
 public:
  KecGraph() = default;

  const std::string& conv_id() const { return conv_id_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const GraphNode& node(int i) const { return nodes_.at(static_cast<std::size_t>(i - 1)); }
  const std::vector<GraphNode>& nodes() const { return nodes_; }
  const InteractionMatrix& a_c() const { return a_c_; }
  const KnowledgeMatrix& a_k() const { return a_k_; }

  bool operator==(const KecGraph&) const = default;

 private:
  friend KecGraph assemble_kec(const Conversation&, InteractionMatrix, KnowledgeMatrix);
  friend std::vector<KecGraph> deserialize_graphs(std::span<const std::uint8_t>);

  std::string conv_id_;
  std::vector<GraphNode> nodes_;
  InteractionMatrix a_c_;
  KnowledgeMatrix a_k_;
};

// Throws ShapeError when the conversation is empty or the sizes disagree.
KecGraph assemble_kec(const Conversation& conv, InteractionMatrix a_c, KnowledgeMatrix a_k);

struct GraphOptions {
  int context_window = 2;
  KnowledgeOptions knowledge;
  bool use_knowledge = true;  // false: every A_k cell stays (0, "none")
};

// Builds A_c and A_k and assembles the graph. knowledge/lexicon may be null
// only when options.use_knowledge is false.
KecGraph build_graph(const Conversation& conv, const KnowledgeStore* store, const Lexicon* lex,
                     const GraphOptions& options);

// Versioned container: "KECG", u32 version, u64 count, then per graph a
// u64 length-prefixed payload followed by its CRC-32. An empty input decodes
// to an empty list.
inline constexpr std::uint32_t kGraphFormatVersion = 1;
std::vector<std::uint8_t> serialize_graphs(std::span<const KecGraph> graphs);
std::vector<KecGraph> deserialize_graphs(std::span<const std::uint8_t> bytes);

// Human-readable dump: N, then one line per lower-triangular cell with
// (i, j, A_c item, rel, A_k item, klg preview of at most 40 chars).
std::string dump_graph(const KecGraph& graph);

}  // namespace kec
