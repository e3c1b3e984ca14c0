// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#include "kec/graph.hpp"

#include <algorithm>
#include <sstream>

#include "kec/error.hpp"
#include "kec/util.hpp"

namespace kec {

std::string_view to_string(RelationType r) { return r == RelationType::SD ? "SD" : "ID"; }

InteractionMatrix::InteractionMatrix(int n) : n_(n) {
  if (n < 0) throw ShapeError("negative matrix size");
  cells_.resize(static_cast<std::size_t>(n) * (n + 1) / 2);
}

std::size_t InteractionMatrix::offset(int i, int j) const {
  if (i < 1 || i > n_ || j < 1 || j > i)
    throw ShapeError("interaction cell (" + std::to_string(i) + "," + std::to_string(j) +
                     ") outside lower triangle of size " + std::to_string(n_));
  return static_cast<std::size_t>(i - 1) * i / 2 + static_cast<std::size_t>(j - 1);
}

std::vector<int> InteractionMatrix::neighbors(int i) const {
  std::vector<int> out;
  for (int j = 1; j < i; ++j)
    if (at(i, j).item) out.push_back(j);
  return out;
}

InteractionMatrix build_interaction_matrix(const Conversation& conv, int window) {
  if (window < 1) throw ValidationError("context window must be >= 1");
  const int n = conv.size();
  InteractionMatrix ac(n);
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= i; ++j) {
      auto& cell = ac.at(i, j);
      cell.rel = conv.at(i).speaker == conv.at(j).speaker ? RelationType::SD : RelationType::ID;
      cell.item = j < i && i - j <= window;
    }
  }
  return ac;
}

KecGraph assemble_kec(const Conversation& conv, InteractionMatrix a_c, KnowledgeMatrix a_k) {
  if (conv.size() == 0) throw ShapeError("cannot assemble a graph with no nodes");
  if (a_c.size() != conv.size() || a_k.size() != conv.size())
    throw ShapeError("dimension mismatch: conversation N=" + std::to_string(conv.size()) +
                     ", A_c N=" + std::to_string(a_c.size()) + ", A_k N=" + std::to_string(a_k.size()));
  KecGraph g;
  g.conv_id_ = conv.id;
  for (const Utterance& u : conv.utterances) g.nodes_.push_back({u.id, u.speaker, u.emotion, u.tokens});
  g.a_c_ = std::move(a_c);
  g.a_k_ = std::move(a_k);
  return g;
}

KecGraph build_graph(const Conversation& conv, const KnowledgeStore* store, const Lexicon* lex,
                     const GraphOptions& options) {
  InteractionMatrix ac = build_interaction_matrix(conv, options.context_window);
  KnowledgeMatrix ak(conv.size());
  if (options.use_knowledge) {
    if (!store || !lex) throw ValidationError("knowledge and lexicon are required when knowledge is enabled");
    ak = build_knowledge_matrix(conv, *store, *lex, options.knowledge);
  }
  return assemble_kec(conv, std::move(ac), std::move(ak));
}

namespace {

constexpr std::uint8_t kMagic[4] = {'K', 'E', 'C', 'G'};

void write_graph(ByteWriter& w, const KecGraph& g) {
  w.str(g.conv_id());
  w.u32(static_cast<std::uint32_t>(g.size()));
  for (const GraphNode& n : g.nodes()) {
    w.str(n.utterance_id);
    w.str(n.speaker);
    w.u8(static_cast<std::uint8_t>(n.emotion));
    w.u32(static_cast<std::uint32_t>(n.tokens.size()));
    for (const std::string& t : n.tokens) w.str(t);
  }
  for (int i = 1; i <= g.size(); ++i) {
    for (int j = 1; j <= i; ++j) {
      const auto& c = g.a_c().at(i, j);
      const auto& k = g.a_k().at(i, j);
      w.u8(static_cast<std::uint8_t>((c.item ? 1 : 0) | (c.rel == RelationType::ID ? 2 : 0) | (k.item ? 4 : 0)));
      w.str(k.klg);
    }
  }
}

}  // namespace

std::vector<std::uint8_t> serialize_graphs(std::span<const KecGraph> graphs) {
  ByteWriter w;
  w.bytes(kMagic);
  w.u32(kGraphFormatVersion);
  w.u64(graphs.size());
  for (const KecGraph& g : graphs) {
    ByteWriter payload;
    write_graph(payload, g);
    w.u64(payload.data().size());
    w.bytes(payload.data());
    w.u32(crc32(payload.data()));
  }
  return w.take();
}

std::vector<KecGraph> deserialize_graphs(std::span<const std::uint8_t> bytes) {
  std::vector<KecGraph> out;
  if (bytes.empty()) return out;
  ByteReader r(bytes);
  auto magic = r.bytes(4);
  if (!std::equal(magic.begin(), magic.end(), kMagic)) throw CorruptionError("not a graph file (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != kGraphFormatVersion)
    throw CorruptionError("graph format version " + std::to_string(version) + " unsupported (expected " +
                          std::to_string(kGraphFormatVersion) + ")");
  const std::uint64_t count = r.u64();
  for (std::uint64_t k = 0; k < count; ++k) {
    const std::uint64_t len = r.u64();
    auto payload = r.bytes(len);
    if (r.u32() != crc32(payload)) throw CorruptionError("graph record " + std::to_string(k) + " failed checksum");
    ByteReader p(payload);
    KecGraph g;
    g.conv_id_ = p.str();
    const std::uint32_t n = p.u32();
    if (n == 0) throw CorruptionError("graph record with no nodes");
    for (std::uint32_t i = 0; i < n; ++i) {
      GraphNode node;
      node.utterance_id = p.str();
      node.speaker = p.str();
      const std::uint8_t emo = p.u8();
      if (emo >= kEmotionCount) throw CorruptionError("bad emotion code");
      node.emotion = static_cast<Emotion>(emo);
      const std::uint32_t nt = p.u32();
      for (std::uint32_t t = 0; t < nt; ++t) node.tokens.push_back(p.str());
      g.nodes_.push_back(std::move(node));
    }
    g.a_c_ = InteractionMatrix(static_cast<int>(n));
    g.a_k_ = KnowledgeMatrix(static_cast<int>(n));
    for (int i = 1; i <= static_cast<int>(n); ++i) {
      for (int j = 1; j <= i; ++j) {
        const std::uint8_t flags = p.u8();
        if (flags > 7) throw CorruptionError("bad cell flags");
        g.a_c_.at(i, j) = {(flags & 1) != 0, (flags & 2) ? RelationType::ID : RelationType::SD};
        g.a_k_.at(i, j) = {(flags & 4) != 0, p.str()};
      }
    }
    if (!p.done()) throw CorruptionError("trailing bytes in graph record");
    out.push_back(std::move(g));
  }
  if (!r.done()) throw CorruptionError("trailing bytes after graph records");
  return out;
}

std::string dump_graph(const KecGraph& g) {
  std::ostringstream os;
  os << "graph " << g.conv_id() << " N=" << g.size() << '\n';
  for (int i = 1; i <= g.size(); ++i) {
    for (int j = 1; j <= i; ++j) {
      const auto& c = g.a_c().at(i, j);
      const auto& k = g.a_k().at(i, j);
      std::string preview = k.klg.substr(0, 40);
      os << "  (" << i << ',' << j << ") ac=" << c.item << " rel=" << to_string(c.rel) << " ak=" << k.item
         << " klg=\"" << preview << (k.klg.size() > 40 ? "..." : "") << "\"\n";
    }
  }
  return os.str();
}

}  // namespace kec
