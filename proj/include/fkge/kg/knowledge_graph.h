/*
 * Copyright 2026 The FKGE Privacy Lab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FKGE_KG_KNOWLEDGE_GRAPH_H_
#define FKGE_KG_KNOWLEDGE_GRAPH_H_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace fkge::kg {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

struct Triple {
  EntityId head = 0;
  RelationId rel = 0;
  EntityId tail = 0;

  friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct TripleHash {
  std::size_t operator()(const Triple& t) const noexcept;
};

// Bidirectional token <-> id map. Ids are assigned densely in insertion
// order and never change.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> tokens);

  // Returns the existing id when the token is already present.
  std::uint32_t Add(std::string_view token);
  std::optional<std::uint32_t> Find(std::string_view token) const;
  const std::string& Token(std::uint32_t id) const { return tokens_[id]; }
  bool Contains(std::string_view token) const { return Find(token).has_value(); }
  std::size_t size() const { return tokens_.size(); }
  std::span<const std::string> tokens() const { return tokens_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

// Immutable-after-construction set of facts over two vocabularies. Triples
// keep insertion order; duplicates are rejected on insert.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;
  KnowledgeGraph(Vocabulary entities, Vocabulary relations);

  const Vocabulary& entities() const { return entities_; }
  const Vocabulary& relations() const { return relations_; }
  std::span<const Triple> triples() const { return triples_; }
  std::size_t num_entities() const { return entities_.size(); }
  std::size_t num_relations() const { return relations_.size(); }
  std::size_t num_triples() const { return triples_.size(); }

  bool Contains(const Triple& t) const { return index_.contains(t); }

  // Returns false (and leaves the graph unchanged) on duplicates. Throws
  // VocabularyError for ids outside the vocabularies.
  bool AddTriple(const Triple& t);

  // Name-level helpers used when ids from different graphs must be matched.
  std::optional<Triple> Resolve(std::string_view head, std::string_view rel,
                                std::string_view tail) const;

 private:
  Vocabulary entities_;
  Vocabulary relations_;
  std::vector<Triple> triples_;
  std::unordered_set<Triple, TripleHash> index_;
};

struct LoadResult {
  KnowledgeGraph graph;
  std::size_t duplicates = 0;
};

// Reads `head\trelation\ttail` lines. Without vocab files, vocabularies are
// built in first-appearance order. With vocab files (one token per line, line
// number = id) every token must already be present.
LoadResult LoadTriples(
    const std::filesystem::path& path,
    const std::optional<std::filesystem::path>& entity_vocab = std::nullopt,
    const std::optional<std::filesystem::path>& relation_vocab = std::nullopt);

Vocabulary LoadVocabulary(const std::filesystem::path& path);
void WriteTriples(const KnowledgeGraph& kg, std::span<const Triple> triples,
                  const std::filesystem::path& path);

// Entity-class annotations and the class-pair -> relation table an attacker
// may hold from public data in the same domain. Keys are names so the schema
// can be consulted against any client or server vocabulary.
class AuxSchema {
 public:
  void SetClass(std::string entity, int cls);
  // Throws ArgumentError when the class pair is already mapped elsewhere.
  void AddEntry(int head_class, std::string relation, int tail_class);

  std::optional<int> ClassOf(std::string_view entity) const;
  std::optional<std::string> Lookup(int head_class, int tail_class) const;
  std::size_t num_entries() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, int> classes_;
  std::unordered_map<std::uint64_t, std::string> entries_;
};

struct SyntheticKg {
  KnowledgeGraph graph;
  AuxSchema aux;
  std::vector<int> entity_class;  // indexed by entity id
};

// Clustered generator: entities fall into latent classes, every relation
// links one (head class, tail class) pair, and tails are drawn from the
// nearest class members of a planted translation, so the facts are learnable
// by translational models. Deterministic under `seed`.
SyntheticKg GenerateSynthetic(std::size_t n_entities, std::size_t n_relations,
                              std::size_t n_triples, std::uint64_t seed);

}  // namespace fkge::kg

#endif  // FKGE_KG_KNOWLEDGE_GRAPH_H_
