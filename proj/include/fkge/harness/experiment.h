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

#ifndef FKGE_HARNESS_EXPERIMENT_H_
#define FKGE_HARNESS_EXPERIMENT_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fkge/attacks/attacks.h"
#include "fkge/eval/metrics.h"
#include "fkge/fed/fkge.h"
#include "fkge/harness/config.h"
#include "fkge/kg/federated.h"
#include "fkge/privacy/rdp.h"

namespace fkge::harness {

inline constexpr const char* kVersion = "0.1.0";

// Everything a run derives from its config before training starts. Rebuilt
// bit for bit by the attack and eval commands.
struct Federation {
  kg::KnowledgeGraph source;
  std::optional<kg::AuxSchema> aux;
  kg::Partition partition;
  kg::CandidateSet candidates;
  std::size_t eligible_members = 0;
};

Federation BuildFederation(const ExperimentConfig& cfg);
fed::TrainParams MakeTrainParams(const ExperimentConfig& cfg);
std::vector<fed::ClientState> MakeClients(const ExperimentConfig& cfg, const Federation& fed,
                                          const fed::ServerState& server);
fed::ServerState MakeServer(const ExperimentConfig& cfg, const Federation& fed);

// Client stores with the given server rows written over their held entities.
std::vector<kge::EmbeddingStore> MergedStores(std::span<const fed::ClientState> clients,
                                              const Matrix& entities);

// Test-split link prediction pooled over clients, each filtered against its
// own graph.
eval::LinkPrediction EvaluateClients(std::span<const fed::ClientState> clients,
                                     std::span<const kge::EmbeddingStore> stores);

struct TrainReport {
  std::filesystem::path run_dir;
  eval::LinkPrediction trained;
  eval::LinkPrediction random;
  int rounds_completed = 0;
  bool halted = false;
  int halt_round = 0;
  int halt_iteration = 0;
  // Worst client guarantee; empty for undefended runs.
  std::optional<privacy::DpGuarantee> privacy;
  std::vector<int> checkpoint_rounds;
  std::size_t selection_events = 0;
  std::size_t gradient_events = 0;
};

// Runs the federation, writes the run directory and returns what was written.
TrainReport CmdTrain(const ExperimentConfig& cfg, const std::filesystem::path& run_dir);

struct AttackReport {
  std::string kind;
  std::vector<attacks::AttackTrace> traces;
  double best_f1 = 0.0;
  int best_round = 0;
  double auc = 0.0;
  std::size_t not_evaluable = 0;  // summed over rounds
  std::size_t no_aux = 0;
  bool fallback = false;  // no round had both labels among evaluable candidates
  std::vector<std::string> warnings;
};

// Replays the recorded observables of `run_dir` through one attack.
AttackReport CmdAttack(const std::filesystem::path& run_dir, const std::string& kind);

struct AccountRow {
  int iterations = 0;
  privacy::DpGuarantee guarantee;
};

// Offline accounting: every iteration emits one selection event and, when
// released, one gradient event; the first `released` iterations release.
std::vector<AccountRow> CmdAccount(const dp::DpConfig& cfg, double q,
                                   std::span<const int> iterations,
                                   std::optional<int> released = std::nullopt);

// Re-evaluates the final client checkpoints of a run.
eval::LinkPrediction CmdEval(const std::filesystem::path& run_dir);

std::string Hex64(std::uint64_t v);
std::uint64_t Fnv1a(std::string_view bytes);

}  // namespace fkge::harness

#endif  // FKGE_HARNESS_EXPERIMENT_H_
