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

#include "fkge/kg/knowledge_graph.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "fkge/common/errors.h"
#include "fkge/common/rng.h"

namespace fkge::kg {

std::size_t TripleHash::operator()(const Triple& t) const noexcept {
  std::uint64_t h = MixSeed(t.head);
  h = MixSeed(h ^ (static_cast<std::uint64_t>(t.rel) << 32 | t.tail));
  return static_cast<std::size_t>(h);
}

Vocabulary::Vocabulary(std::vector<std::string> tokens) {
  for (auto& t : tokens) {
    if (index_.contains(t)) {
      throw VocabularyError("duplicate vocabulary token '" + t + "'");
    }
    index_.emplace(t, static_cast<std::uint32_t>(tokens_.size()));
    tokens_.push_back(std::move(t));
  }
}

std::uint32_t Vocabulary::Add(std::string_view token) {
  if (auto id = Find(token)) return *id;
  const auto id = static_cast<std::uint32_t>(tokens_.size());
  tokens_.emplace_back(token);
  index_.emplace(tokens_.back(), id);
  return id;
}

std::optional<std::uint32_t> Vocabulary::Find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

KnowledgeGraph::KnowledgeGraph(Vocabulary entities, Vocabulary relations)
    : entities_(std::move(entities)), relations_(std::move(relations)) {}

bool KnowledgeGraph::AddTriple(const Triple& t) {
  if (t.head >= entities_.size() || t.tail >= entities_.size() ||
      t.rel >= relations_.size()) {
    throw VocabularyError("triple references an id outside the vocabulary");
  }
  if (!index_.insert(t).second) return false;
  triples_.push_back(t);
  return true;
}

std::optional<Triple> KnowledgeGraph::Resolve(std::string_view head,
                                              std::string_view rel,
                                              std::string_view tail) const {
  auto h = entities_.Find(head);
  auto r = relations_.Find(rel);
  auto t = entities_.Find(tail);
  if (!h || !r || !t) return std::nullopt;
  return Triple{*h, *r, *t};
}

Vocabulary LoadVocabulary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open vocabulary file " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return Vocabulary(std::move(tokens));
}

namespace {

std::array<std::string_view, 3> SplitTriple(std::string_view line,
                                            std::size_t line_no) {
  std::array<std::string_view, 3> fields;
  std::size_t count = 0;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    const std::string_view field = line.substr(
        start, tab == std::string_view::npos ? std::string_view::npos
                                             : tab - start);
    if (count == 3) throw ParseError("expected 3 tab-separated fields", line_no);
    fields[count++] = field;
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  if (count != 3) throw ParseError("expected 3 tab-separated fields", line_no);
  return fields;
}

std::uint32_t LookupOrAdd(Vocabulary& vocab, bool fixed, std::string_view token,
                          std::size_t line_no, const char* kind) {
  if (!fixed) return vocab.Add(token);
  auto id = vocab.Find(token);
  if (!id) {
    throw VocabularyError(std::string(kind) + " '" + std::string(token) +
                          "' on line " + std::to_string(line_no) +
                          " is absent from the supplied vocabulary");
  }
  return *id;
}

}  // namespace

LoadResult LoadTriples(const std::filesystem::path& path,
                       const std::optional<std::filesystem::path>& entity_vocab,
                       const std::optional<std::filesystem::path>& relation_vocab) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open triple file " + path.string());

  Vocabulary entities = entity_vocab ? LoadVocabulary(*entity_vocab) : Vocabulary();
  Vocabulary relations =
      relation_vocab ? LoadVocabulary(*relation_vocab) : Vocabulary();

  // Ids are resolved before the graph exists because vocabularies may grow.
  std::vector<Triple> parsed;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = SplitTriple(line, line_no);
    Triple t;
    t.head = LookupOrAdd(entities, entity_vocab.has_value(), f[0], line_no, "entity");
    t.rel = LookupOrAdd(relations, relation_vocab.has_value(), f[1], line_no,
                        "relation");
    t.tail = LookupOrAdd(entities, entity_vocab.has_value(), f[2], line_no, "entity");
    parsed.push_back(t);
  }

  LoadResult result{KnowledgeGraph(std::move(entities), std::move(relations)), 0};
  for (const Triple& t : parsed) {
    if (!result.graph.AddTriple(t)) ++result.duplicates;
  }
  return result;
}

void WriteTriples(const KnowledgeGraph& kg, std::span<const Triple> triples,
                  const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot write " + path.string());
  for (const Triple& t : triples) {
    out << kg.entities().Token(t.head) << '\t' << kg.relations().Token(t.rel)
        << '\t' << kg.entities().Token(t.tail) << '\n';
  }
}

namespace {
std::uint64_t PairKey(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}
}  // namespace

void AuxSchema::SetClass(std::string entity, int cls) {
  classes_[std::move(entity)] = cls;
}

void AuxSchema::AddEntry(int head_class, std::string relation, int tail_class) {
  const auto key = PairKey(head_class, tail_class);
  auto it = entries_.find(key);
  if (it != entries_.end() && it->second != relation) {
    throw ArgumentError("class pair already mapped to relation " + it->second);
  }
  entries_[key] = std::move(relation);
}

std::optional<int> AuxSchema::ClassOf(std::string_view entity) const {
  auto it = classes_.find(std::string(entity));
  if (it == classes_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> AuxSchema::Lookup(int head_class, int tail_class) const {
  auto it = entries_.find(PairKey(head_class, tail_class));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

namespace {

constexpr std::size_t kLatentDim = 3;

}  // namespace

SyntheticKg GenerateSynthetic(std::size_t n_entities, std::size_t n_relations,
                              std::size_t n_triples, std::uint64_t seed) {
  const long double capacity = static_cast<long double>(n_entities) *
                               n_entities * static_cast<long double>(n_relations);
  if (static_cast<long double>(n_triples) > capacity) {
    throw ArgumentError("n_triples exceeds n_entities^2 * n_relations");
  }
  if (n_triples > 0 && (n_entities == 0 || n_relations == 0)) {
    throw ArgumentError("triples requested over an empty vocabulary");
  }

  Rng rng = MakeRng(seed, {0x5e7});
  Vocabulary entities;
  Vocabulary relations;
  for (std::size_t i = 0; i < n_entities; ++i) entities.Add("e" + std::to_string(i));
  for (std::size_t i = 0; i < n_relations; ++i) relations.Add("r" + std::to_string(i));

  SyntheticKg out;
  out.graph = KnowledgeGraph(std::move(entities), std::move(relations));
  if (n_entities == 0) return out;

  std::size_t n_classes = 1;
  while (n_classes * n_classes < n_relations) ++n_classes;
  n_classes = std::clamp<std::size_t>(n_classes, std::min<std::size_t>(2, n_entities),
                                      n_entities);

  // Balanced class assignment over a shuffled entity order.
  std::vector<EntityId> order(n_entities);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  out.entity_class.assign(n_entities, 0);
  std::vector<std::vector<EntityId>> members(n_classes);
  for (std::size_t i = 0; i < n_entities; ++i) {
    const int c = static_cast<int>(i % n_classes);
    out.entity_class[order[i]] = c;
    members[c].push_back(order[i]);
  }
  for (auto& m : members) std::sort(m.begin(), m.end());

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::array<double, kLatentDim>> latent(n_entities);
  for (auto& z : latent)
    for (double& v : z) v = unit(rng);

  std::vector<std::pair<int, int>> pairs;
  for (std::size_t a = 0; a < n_classes; ++a)
    for (std::size_t b = 0; b < n_classes; ++b)
      pairs.emplace_back(static_cast<int>(a), static_cast<int>(b));
  std::shuffle(pairs.begin(), pairs.end(), rng);

  struct PlantedRelation {
    int head_class;
    int tail_class;
    std::array<double, kLatentDim> offset;
    std::size_t fanout;
  };
  std::vector<PlantedRelation> planted(n_relations);
  const double per_relation =
      n_relations ? static_cast<double>(n_triples) / n_relations : 0.0;
  for (std::size_t r = 0; r < n_relations; ++r) {
    auto [hc, tc] = pairs[r % pairs.size()];
    PlantedRelation& p = planted[r];
    p.head_class = hc;
    p.tail_class = tc;
    for (double& v : p.offset) v = unit(rng) - 0.5;
    const double heads = static_cast<double>(members[hc].size());
    p.fanout = static_cast<std::size_t>(std::ceil(1.5 * per_relation / heads));
    p.fanout = std::clamp<std::size_t>(p.fanout, 1, members[tc].size());
    const std::string& name = out.graph.relations().Token(static_cast<RelationId>(r));
    out.aux.AddEntry(hc, name, tc);
  }
  for (std::size_t e = 0; e < n_entities; ++e) {
    out.aux.SetClass(out.graph.entities().Token(static_cast<EntityId>(e)),
                     out.entity_class[e]);
  }

  // Planted phase: tails come from the nearest class members of z_h + o_r.
  const std::size_t max_attempts = 50 * n_triples + 100;
  std::vector<std::pair<double, EntityId>> ranked;
  for (std::size_t attempt = 0;
       attempt < max_attempts && out.graph.num_triples() < n_triples; ++attempt) {
    const auto r = static_cast<RelationId>(UniformIndex(rng, n_relations));
    const PlantedRelation& p = planted[r];
    const auto& heads = members[p.head_class];
    const auto& tails = members[p.tail_class];
    const EntityId h = heads[UniformIndex(rng, heads.size())];
    std::array<double, kLatentDim> target;
    for (std::size_t k = 0; k < kLatentDim; ++k) target[k] = latent[h][k] + p.offset[k];
    ranked.clear();
    for (EntityId t : tails) {
      double d = 0.0;
      for (std::size_t k = 0; k < kLatentDim; ++k) {
        const double diff = latent[t][k] - target[k];
        d += diff * diff;
      }
      ranked.emplace_back(d, t);
    }
    std::partial_sort(ranked.begin(), ranked.begin() + p.fanout, ranked.end());
    const EntityId t = ranked[UniformIndex(rng, p.fanout)].second;
    out.graph.AddTriple({h, r, t});
  }

  // Fallback fill with uniform triples when the planted structure saturates.
  std::size_t misses = 0;
  while (out.graph.num_triples() < n_triples && misses < 100 * n_triples + 1000) {
    Triple t{static_cast<EntityId>(UniformIndex(rng, n_entities)),
             static_cast<RelationId>(UniformIndex(rng, n_relations)),
             static_cast<EntityId>(UniformIndex(rng, n_entities))};
    if (!out.graph.AddTriple(t)) ++misses;
  }
  if (out.graph.num_triples() < n_triples) {
    std::vector<Triple> remaining;
    for (EntityId h = 0; h < n_entities; ++h)
      for (RelationId r = 0; r < n_relations; ++r)
        for (EntityId t = 0; t < n_entities; ++t)
          if (!out.graph.Contains({h, r, t})) remaining.push_back({h, r, t});
    std::shuffle(remaining.begin(), remaining.end(), rng);
    for (const Triple& t : remaining) {
      if (out.graph.num_triples() >= n_triples) break;
      out.graph.AddTriple(t);
    }
  }
  return out;
}

}  // namespace fkge::kg
