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

#include "fkge/kg/federated.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include "fkge/common/errors.h"

namespace fkge::kg {

Partition PartitionFederated(const KnowledgeGraph& kg, int m, double overlap_frac,
                             const SplitFractions& split, std::uint64_t seed) {
  if (m < 2) throw ArgumentError("partition needs at least 2 clients");
  if (overlap_frac < 0.0 || overlap_frac > 1.0) {
    throw ArgumentError("overlap_frac must lie in [0, 1]");
  }
  for (double f : {split.train, split.valid, split.test}) {
    if (f < 0.0 || f > 1.0) throw ArgumentError("split fractions must lie in [0, 1]");
  }
  if (std::abs(split.train + split.valid + split.test - 1.0) > 1e-9) {
    throw ArgumentError("split fractions must sum to 1");
  }

  const std::size_t n = kg.num_entities();
  Rng rng = MakeRng(seed, {0xba7});

  std::vector<EntityId> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  Partition p;
  p.holders.assign(n, {});
  const auto n_shared =
      static_cast<std::size_t>(std::llround(overlap_frac * static_cast<double>(n)));
  std::vector<int> client_ids(m);
  std::iota(client_ids.begin(), client_ids.end(), 0);
  for (std::size_t i = 0; i < n_shared; ++i) {
    const auto k = 2 + UniformIndex(rng, static_cast<std::uint64_t>(m - 1));
    std::shuffle(client_ids.begin(), client_ids.end(), rng);
    std::vector<int> h(client_ids.begin(), client_ids.begin() + k);
    std::sort(h.begin(), h.end());
    p.holders[order[i]] = std::move(h);
  }
  const auto offset = UniformIndex(rng, static_cast<std::uint64_t>(m));
  for (std::size_t i = n_shared; i < n; ++i) {
    p.holders[order[i]] = {static_cast<int>((i + offset) % m)};
  }
  for (EntityId e = 0; e < n; ++e) {
    if (p.holders[e].size() >= 2) p.overlapping.push_back(e);
  }

  // Triple -> exactly one eligible client.
  std::vector<std::vector<Triple>> assigned(m);
  std::vector<int> eligible;
  for (const Triple& t : kg.triples()) {
    eligible.clear();
    std::set_intersection(p.holders[t.head].begin(), p.holders[t.head].end(),
                          p.holders[t.tail].begin(), p.holders[t.tail].end(),
                          std::back_inserter(eligible));
    if (eligible.empty()) continue;
    const int c = eligible.size() == 1 ? eligible[0]
                                       : eligible[UniformIndex(rng, eligible.size())];
    assigned[c].push_back(t);
  }

  for (int c = 0; c < m; ++c) {
    ClientDataset ds;
    ds.client_id = c;
    std::vector<std::uint32_t> entity_local(n, UINT32_MAX);
    Vocabulary ents;
    for (EntityId e = 0; e < n; ++e) {
      if (std::binary_search(p.holders[e].begin(), p.holders[e].end(), c)) {
        entity_local[e] = ents.Add(kg.entities().Token(e));
        ds.global_entity.push_back(e);
      }
    }
    std::vector<bool> rel_used(kg.num_relations(), false);
    for (const Triple& t : assigned[c]) rel_used[t.rel] = true;
    std::vector<std::uint32_t> rel_local(kg.num_relations(), UINT32_MAX);
    Vocabulary rels;
    for (RelationId r = 0; r < kg.num_relations(); ++r) {
      if (rel_used[r]) {
        rel_local[r] = rels.Add(kg.relations().Token(r));
        ds.global_relation.push_back(r);
      }
    }
    ds.graph = KnowledgeGraph(std::move(ents), std::move(rels));
    std::vector<Triple> local;
    local.reserve(assigned[c].size());
    for (const Triple& t : assigned[c]) {
      Triple lt{entity_local[t.head], rel_local[t.rel], entity_local[t.tail]};
      ds.graph.AddTriple(lt);
      local.push_back(lt);
    }
    Rng split_rng = MakeRng(seed, {0x5b1, static_cast<std::uint64_t>(c)});
    std::shuffle(local.begin(), local.end(), split_rng);
    const auto total = local.size();
    auto n_train = static_cast<std::size_t>(std::llround(split.train * total));
    auto n_valid = static_cast<std::size_t>(std::llround(split.valid * total));
    n_train = std::min(n_train, total);
    n_valid = std::min(n_valid, total - n_train);
    ds.train.assign(local.begin(), local.begin() + n_train);
    ds.valid.assign(local.begin() + n_train, local.begin() + n_train + n_valid);
    ds.test.assign(local.begin() + n_train + n_valid, local.end());
    if (ds.train.empty()) {
      throw PartitionError("client " + std::to_string(c) +
                           " received zero training triples; retry with a "
                           "different seed or a larger overlap_frac");
    }
    p.clients.push_back(std::move(ds));
  }
  return p;
}

void WritePartitionManifest(const Partition& p, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot write " + path.string());
  for (const ClientDataset& c : p.clients) {
    out << "[client " << c.client_id << "]\n";
    out << "train = " << c.train.size() << "\n";
    out << "valid = " << c.valid.size() << "\n";
    out << "test = " << c.test.size() << "\n";
    out << "entities =";
    for (EntityId e : c.global_entity) out << ' ' << e;
    out << "\n\n";
  }
  out << "[overlap]\nentities =";
  for (EntityId e : p.overlapping) out << ' ' << e;
  out << "\n";
}

std::vector<Triple> SampleBatch(const ClientDataset& client, double batch_size,
                                Rng& rng) {
  const double n = static_cast<double>(client.train.size());
  if (batch_size < 0.0 || batch_size > n) {
    throw ArgumentError("batch size must lie in [0, |train|]");
  }
  const double q = n > 0 ? batch_size / n : 0.0;
  std::vector<Triple> batch;
  if (q <= 0.0) return batch;
  if (q >= 1.0) return client.train;
  std::bernoulli_distribution keep(q);
  for (const Triple& t : client.train) {
    if (keep(rng)) batch.push_back(t);
  }
  return batch;
}

std::vector<Triple> NegativeSampleSelfAdv(const Triple& triple, std::size_t n,
                                          const KnowledgeGraph& kg, Rng& rng) {
  const std::size_t ne = kg.num_entities();
  if (ne < 2) throw ArgumentError("negative sampling needs at least 2 entities");
  if (n < 1) throw ArgumentError("negative count must be >= 1");
  std::vector<Triple> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    EntityId cand = triple.tail;
    for (int tries = 0; tries < 100; ++tries) {
      // Uniform over entities other than the true tail.
      auto e = static_cast<EntityId>(UniformIndex(rng, ne - 1));
      if (e >= triple.tail) ++e;
      cand = e;
      if (!kg.Contains({triple.head, triple.rel, cand})) break;
    }
    out.push_back({triple.head, triple.rel, cand});
  }
  return out;
}

std::vector<Triple> NegativeSampleRandom(std::span<const HeadRelationPair> public_pairs,
                                         std::size_t n, const KnowledgeGraph& kg,
                                         Rng& rng) {
  if (public_pairs.empty()) throw ArgumentError("public head-relation pairs are empty");
  const std::size_t ne = kg.num_entities();
  if (ne == 0) throw ArgumentError("random negatives need a nonempty entity set");
  std::vector<Triple> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& [h, r] = public_pairs[UniformIndex(rng, public_pairs.size())];
    out.push_back({h, r, static_cast<EntityId>(UniformIndex(rng, ne))});
  }
  return out;
}

std::size_t CandidateSet::num_members() const {
  return static_cast<std::size_t>(
      std::count_if(candidates.begin(), candidates.end(),
                    [](const Candidate& c) { return c.member; }));
}

CandidateSet BuildCandidateSet(const ClientDataset& victim, std::size_t n_members,
                               std::size_t n_nonmembers, std::uint64_t seed,
                               const CandidateOptions& options) {
  const KnowledgeGraph& g = victim.graph;
  std::vector<EntityId> pool;
  if (options.entity_pool) {
    pool = *options.entity_pool;
  } else {
    pool.resize(g.num_entities());
    std::iota(pool.begin(), pool.end(), 0);
  }
  std::vector<bool> in_pool(g.num_entities(), false);
  for (EntityId e : pool) {
    if (e >= g.num_entities()) throw ArgumentError("entity pool id out of range");
    in_pool[e] = true;
  }

  std::vector<Triple> eligible;
  for (const Triple& t : victim.train) {
    if (in_pool[t.head] && in_pool[t.tail]) eligible.push_back(t);
  }
  if (n_members > eligible.size()) {
    throw ArgumentError("requested " + std::to_string(n_members) +
                        " members but only " + std::to_string(eligible.size()) +
                        " eligible training triples exist");
  }

  Rng rng = MakeRng(seed, {0xca4d});
  CandidateSet out;
  std::vector<std::size_t> idx(eligible.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  auto name = [&](const Triple& t) {
    return Candidate{g.entities().Token(t.head), g.relations().Token(t.rel),
                     g.entities().Token(t.tail), false};
  };
  for (std::size_t i = 0; i < n_members; ++i) {
    Candidate c = name(eligible[idx[i]]);
    c.member = true;
    out.candidates.push_back(std::move(c));
  }

  if (n_nonmembers > 0 && (pool.empty() || g.num_relations() == 0)) {
    throw GenerationError("victim vocabulary cannot produce non-members");
  }
  std::unordered_set<Triple, TripleHash> chosen;
  const std::size_t max_tries = 1000 * std::max<std::size_t>(n_nonmembers, 1);
  std::size_t tries = 0;
  while (chosen.size() < n_nonmembers) {
    if (++tries > max_tries) {
      throw GenerationError("could not generate " + std::to_string(n_nonmembers) +
                            " distinct non-members");
    }
    Triple t{pool[UniformIndex(rng, pool.size())],
             static_cast<RelationId>(UniformIndex(rng, g.num_relations())),
             pool[UniformIndex(rng, pool.size())]};
    if (g.Contains(t) || chosen.contains(t)) continue;
    Candidate c = name(t);
    if (options.exclude && options.exclude->Resolve(c.head, c.rel, c.tail) &&
        options.exclude->Contains(*options.exclude->Resolve(c.head, c.rel, c.tail))) {
      continue;
    }
    chosen.insert(t);
    out.candidates.push_back(std::move(c));
  }
  std::shuffle(out.candidates.begin(), out.candidates.end(), rng);
  return out;
}

}  // namespace fkge::kg
