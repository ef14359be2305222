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

#ifndef FKGE_FED_FKGE_H_
#define FKGE_FED_FKGE_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "fkge/common/matrix.h"
#include "fkge/common/rng.h"
#include "fkge/dp/dp_flames.h"
#include "fkge/kg/federated.h"
#include "fkge/kge/embedding_store.h"
#include "fkge/kge/optimizer.h"
#include "fkge/kge/scoring.h"
#include "fkge/parallel/kernels.h"
#include "fkge/privacy/rdp.h"

namespace fkge::fed {

struct ServerState {
  kg::Vocabulary entities;              // global entity names
  std::vector<std::vector<int>> holders;  // global row -> client ids, ascending
  std::vector<int> client_ids;
  Matrix E;
  int round = 0;
  kge::ModelKind model = kge::ModelKind::kTransE;
  std::size_t dim = 0;
};

// Union of client entity names (client order, then local order), holder
// lists, and a seeded uniform initialization in [-6/sqrt(d_real), 6/sqrt(d_real)].
ServerState AlignEntities(std::span<const kg::ClientDataset> clients, kge::ModelKind model,
                          std::size_t dim, std::uint64_t seed);

enum class Role { kHonest, kAdversary };

struct TrainParams {
  kge::LossParams loss;
  kge::OptimizerKind optimizer = kge::OptimizerKind::kAdam;
  double lr = 0.001;
  double batch_size = 64.0;
  int local_iters = 1;
};

struct ClientState {
  kg::ClientDataset data;
  kge::EmbeddingStore store;  // local entities and private relations
  kge::Optimizer optimizer;
  Role role = Role::kHonest;
  std::vector<std::uint32_t> global_row;  // local entity -> server row
  std::vector<kg::HeadRelationPair> public_pairs;
  double sigma = 1.0;
  std::optional<double> last_mrr;
  privacy::PrivacyLedger ledger;
  int iterations = 0;  // committed local iterations
};

// Local relations are drawn from a (seed, client) stream; entity rows start
// from the server's initialization. The (head, relation) pairs of the
// validation split serve as the public pairs of the private path.
ClientState MakeClient(kg::ClientDataset data, const ServerState& server,
                       const TrainParams& params, std::uint64_t seed);

struct LocalUpdateInfo {
  int iterations = 0;
  bool budget_exhausted = false;
  int halt_iteration = 0;  // 1-based client iteration that was discarded
  double mean_loss = 0.0;
  std::vector<privacy::PrivacyEvent> events;
  std::vector<privacy::PrivacyEvent> discarded_events;  // of the halting iteration
};

// Overwrites the client's held rows from the broadcast, runs T local
// iterations (Adam/SGD with self-adversarial negatives, or the private path
// when `defense` is set) and returns the broadcast with the held rows
// replaced by the client's rows. On the private path an iteration whose
// events would bring the ledger to the budget is discarded and training
// stops.
Matrix ClientLocalUpdate(ClientState& client, const Matrix& broadcast, const TrainParams& params,
                         const dp::DpConfig* defense, int round, Rng& rng,
                         LocalUpdateInfo* info = nullptr);

// Mean over holders; single-holder rows and rows uploaded identically by
// every holder are copied bit for bit.
Matrix ServerAggregate(const ServerState& server, const std::map<int, Matrix>& uploads);

struct RoundRecord {
  int round = 0;
  std::map<int, Matrix> uploads;
  Matrix broadcast;
  std::map<int, double> mrr;   // validation MRR of each local model
  std::map<int, double> loss;  // mean local training loss
};

struct RoundView {
  int round;
  const ServerState& server;
  const std::map<int, Matrix>& uploads;
  const Matrix& broadcast;
  std::span<const ClientState> clients;
};

class RoundHook {
 public:
  virtual ~RoundHook() = default;
  // After local training, before the upload leaves the client. Only an
  // adversarial client's own upload is ever passed here.
  virtual void OnUpload(int /*round*/, const ClientState& /*client*/, Matrix& /*upload*/) {}
  virtual void OnRound(const RoundView& /*view*/) {}
};

struct RunOptions {
  int rounds = 1;
  TrainParams train;
  std::optional<dp::DpConfig> defense;
  bool keep_history = true;
  parallel::Exec exec = parallel::Exec::kParallel;
};

struct FkgeResult {
  Matrix final_entities;
  std::vector<RoundRecord> history;
  bool halted = false;  // stopped by the privacy budget
  int halt_round = 0;
  int halt_iteration = 0;
  int rounds_completed = 0;
};

// Broadcast -> local update -> aggregate, K times. Throws
// BudgetExhaustedError when the budget runs out inside round 1.
FkgeResult RunFkge(ServerState& server, std::vector<ClientState>& clients,
                   const RunOptions& options, std::span<RoundHook* const> hooks,
                   std::uint64_t seed);

// Validation MRR of one client's local model.
double ValidationMrr(const ClientState& client);

}  // namespace fkge::fed

#endif  // FKGE_FED_FKGE_H_
