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

#include "fkge/fed/fkge.h"

#include <algorithm>
#include <cstring>
#include <set>
#include <string>

#include "fkge/common/errors.h"
#include "fkge/eval/metrics.h"

namespace fkge::fed {

ServerState AlignEntities(std::span<const kg::ClientDataset> clients, kge::ModelKind model,
                          std::size_t dim, std::uint64_t seed) {
  if (clients.size() < 2) throw ArgumentError("the protocol needs at least 2 clients");
  ServerState s;
  s.model = model;
  s.dim = dim;
  std::set<int> seen;
  for (const auto& c : clients) {
    if (!seen.insert(c.client_id).second) {
      throw ArgumentError("duplicate client id " + std::to_string(c.client_id));
    }
    s.client_ids.push_back(c.client_id);
  }
  for (const auto& c : clients) {
    for (const auto& name : c.graph.entities().tokens()) {
      const auto id = s.entities.Find(name) ? *s.entities.Find(name) : s.entities.Add(name);
      if (id >= s.holders.size()) s.holders.resize(id + 1);
      s.holders[id].push_back(c.client_id);
    }
  }
  for (auto& h : s.holders) std::sort(h.begin(), h.end());
  const std::size_t w = kge::RealWidth(model, dim);
  s.E = Matrix(s.entities.size(), w);
  Rng rng = MakeRng(seed, {0xa11});
  const double b = kge::InitBound(w);
  std::uniform_real_distribution<double> u(-b, b);
  for (double& v : s.E.data()) v = u(rng);
  return s;
}

ClientState MakeClient(kg::ClientDataset data, const ServerState& server,
                       const TrainParams& params, std::uint64_t seed) {
  ClientState c;
  Rng rng = MakeRng(seed, {0xc0de, static_cast<std::uint64_t>(data.client_id)});
  c.store = kge::EmbeddingStore::Random(server.model, data.graph.num_entities(),
                                        data.graph.num_relations(), server.dim, rng);
  for (std::size_t e = 0; e < data.graph.num_entities(); ++e) {
    const auto g = server.entities.Find(data.graph.entities().Token(e));
    if (!g) throw ProtocolError("client entity missing from the aligned vocabulary");
    c.global_row.push_back(*g);
    c.store.entities().SetRow(e, server.E.row(*g));
  }
  std::set<kg::HeadRelationPair> pairs;
  for (const auto& t : data.valid) pairs.insert({t.head, t.rel});
  c.public_pairs.assign(pairs.begin(), pairs.end());
  c.optimizer = kge::Optimizer(params.optimizer, params.lr, c.store);
  c.data = std::move(data);
  return c;
}

namespace {

double HonestIteration(ClientState& c, const TrainParams& p, Rng& rng) {
  const double B = std::min(p.batch_size, static_cast<double>(c.data.train.size()));
  const auto batch = kg::SampleBatch(c.data, B, rng);
  if (batch.empty()) return 0.0;
  kge::DenseGradient g(c.store);
  const double scale = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (const auto& t : batch) {
    loss += kge::AccumulatePositive(c.store, t, p.loss, scale, g);
    const auto negs = kg::NegativeSampleSelfAdv(t, p.loss.n_neg, c.data.graph, rng);
    loss += kge::AccumulateNegative(c.store, negs, p.loss, kge::NegativeMode::kSelfAdversarial,
                                    scale, g);
  }
  c.optimizer.Step(c.store, g);
  return loss * scale;
}

}  // namespace

Matrix ClientLocalUpdate(ClientState& c, const Matrix& broadcast, const TrainParams& params,
                         const dp::DpConfig* defense, int round, Rng& rng,
                         LocalUpdateInfo* info) {
  if (broadcast.cols() != c.store.entity_width()) {
    throw ArgumentError("broadcast width does not match the local model");
  }
  for (std::size_t e = 0; e < c.global_row.size(); ++e) {
    if (c.global_row[e] >= broadcast.rows()) throw ArgumentError("broadcast has too few rows");
    c.store.entities().SetRow(e, broadcast.row(c.global_row[e]));
  }
  if (defense && c.public_pairs.empty()) {
    throw ConfigError("client " + std::to_string(c.data.client_id) +
                      " has no public head-relation pairs for the private path");
  }
  LocalUpdateInfo local;
  double loss_sum = 0.0;
  for (int it = 0; it < params.local_iters; ++it) {
    if (!defense) {
      loss_sum += HonestIteration(c, params, rng);
      ++local.iterations;
      ++c.iterations;
      continue;
    }
    dp::DpTrainParams dtp{std::min(params.batch_size, static_cast<double>(c.data.train.size())),
                          params.loss};
    auto step = dp::DpIteration(c.store, c.data, *defense, c.sigma, dtp, c.public_pairs, rng);
    privacy::PrivacyLedger next = c.ledger;
    bool exhausted = false;
    try {
      for (auto& e : step.events) {
        e.client = c.data.client_id;
        e.round = round;
        e.iter = c.iterations + 1;
        next.Add(e);
      }
      exhausted = privacy::CheckBudget(next, defense->epsilon_budget, defense->delta) ==
                  privacy::BudgetStatus::kExhausted;
    } catch (const AccountingError&) {
      exhausted = true;
    }
    if (exhausted) {
      local.budget_exhausted = true;
      local.halt_iteration = c.iterations + 1;
      local.discarded_events = std::move(step.events);
      break;
    }
    c.ledger = std::move(next);
    c.store = std::move(step.updated);
    local.events.insert(local.events.end(), step.events.begin(), step.events.end());
    loss_sum += step.loss;
    ++local.iterations;
    ++c.iterations;
  }
  local.mean_loss = local.iterations ? loss_sum / local.iterations : 0.0;
  if (info) *info = std::move(local);

  Matrix upload = broadcast;
  for (std::size_t e = 0; e < c.global_row.size(); ++e) {
    upload.SetRow(c.global_row[e], c.store.entities().row(e));
  }
  return upload;
}

Matrix ServerAggregate(const ServerState& server, const std::map<int, Matrix>& uploads) {
  for (int id : server.client_ids) {
    const auto it = uploads.find(id);
    if (it == uploads.end()) throw ProtocolError("missing upload from client " + std::to_string(id));
    if (!it->second.SameShape(server.E)) {
      throw ProtocolError("upload from client " + std::to_string(id) + " has the wrong shape");
    }
  }
  Matrix out = server.E;
  const std::size_t w = server.E.cols();
  std::vector<double> acc(w);
  for (std::size_t e = 0; e < server.holders.size(); ++e) {
    const auto& h = server.holders[e];
    if (h.empty()) continue;
    const Matrix& first = uploads.at(h[0]);
    bool identical = true;
    for (std::size_t i = 1; i < h.size() && identical; ++i) {
      identical = first.RowBitEqual(e, uploads.at(h[i]));
    }
    if (identical) {
      out.SetRow(e, first.row(e));
      continue;
    }
    std::fill(acc.begin(), acc.end(), 0.0);
    for (int c : h) Axpy(1.0, uploads.at(c).row(e), acc);
    const double n = static_cast<double>(h.size());
    for (double& v : acc) v /= n;
    out.SetRow(e, acc);
  }
  return out;
}

double ValidationMrr(const ClientState& c) {
  if (c.data.valid.empty()) return 0.0;
  return eval::EvaluateLinkPrediction(c.store, c.data.valid, c.data.graph).mrr;
}

FkgeResult RunFkge(ServerState& server, std::vector<ClientState>& clients,
                   const RunOptions& options, std::span<RoundHook* const> hooks,
                   std::uint64_t seed) {
  if (options.rounds < 1) throw ArgumentError("rounds must be >= 1");
  if (options.defense) dp::ValidateDpConfig(*options.defense);
  kge::ValidateLossParams(options.train.loss);
  for (auto& c : clients) {
    if (options.defense && c.iterations == 0) c.sigma = options.defense->sigma;
  }
  const dp::DpConfig* defense = options.defense ? &*options.defense : nullptr;

  FkgeResult result;
  const auto n = static_cast<std::int64_t>(clients.size());
  for (int k = 1; k <= options.rounds; ++k) {
    ++server.round;
    const Matrix broadcast = server.E;
    std::vector<Matrix> uploads(clients.size());
    std::vector<LocalUpdateInfo> infos(clients.size());
    std::vector<double> mrr(clients.size());
    auto work = [&](std::int64_t i) {
      auto& c = clients[i];
      Rng rng = MakeRng(seed, {0xc11e, static_cast<std::uint64_t>(c.data.client_id),
                               static_cast<std::uint64_t>(server.round)});
      uploads[i] = ClientLocalUpdate(c, broadcast, options.train, defense, server.round, rng,
                                     &infos[i]);
      mrr[i] = ValidationMrr(c);
    };
    if (options.exec == parallel::Exec::kParallel) {
#pragma omp parallel for schedule(dynamic, 1)
      for (std::int64_t i = 0; i < n; ++i) work(i);
    } else {
      for (std::int64_t i = 0; i < n; ++i) work(i);
    }

    RoundRecord rec;
    rec.round = server.round;
    for (std::size_t i = 0; i < clients.size(); ++i) {
      auto& c = clients[i];
      if (c.role == Role::kAdversary) {
        for (RoundHook* h : hooks) h->OnUpload(server.round, c, uploads[i]);
      }
      rec.mrr[c.data.client_id] = mrr[i];
      rec.loss[c.data.client_id] = infos[i].mean_loss;
      rec.uploads.emplace(c.data.client_id, std::move(uploads[i]));
    }
    server.E = ServerAggregate(server, rec.uploads);
    rec.broadcast = server.E;

    bool exhausted = false;
    int halt_iter = 0;
    for (std::size_t i = 0; i < clients.size(); ++i) {
      if (infos[i].budget_exhausted) {
        exhausted = true;
        halt_iter = halt_iter == 0 ? infos[i].halt_iteration
                                   : std::min(halt_iter, infos[i].halt_iteration);
      }
    }
    if (defense && defense->adaptive && !exhausted &&
        server.round % defense->validation_interval == 0) {
      for (std::size_t i = 0; i < clients.size(); ++i) {
        auto& c = clients[i];
        if (c.last_mrr) c.sigma = dp::AdaptiveSigmaUpdate(c.sigma, mrr[i], *c.last_mrr, *defense);
        c.last_mrr = mrr[i];
      }
    }

    RoundView view{server.round, server, rec.uploads, rec.broadcast, clients};
    for (RoundHook* h : hooks) h->OnRound(view);
    result.rounds_completed = k;
    if (options.keep_history) result.history.push_back(std::move(rec));

    if (exhausted) {
      if (k == 1) {
        throw BudgetExhaustedError(
            "privacy budget exhausted during the first round (iteration " +
                std::to_string(halt_iter) + ")",
            server.round, halt_iter);
      }
      result.halted = true;
      result.halt_round = server.round;
      result.halt_iteration = halt_iter;
      break;
    }
  }
  result.final_entities = server.E;
  return result;
}

}  // namespace fkge::fed
