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

#ifndef FKGE_DP_DP_FLAMES_H_
#define FKGE_DP_DP_FLAMES_H_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fkge/common/matrix.h"
#include "fkge/common/rng.h"
#include "fkge/kg/federated.h"
#include "fkge/kge/embedding_store.h"
#include "fkge/kge/scoring.h"
#include "fkge/privacy/rdp.h"

namespace fkge::dp {

struct DpConfig {
  double sigma = 1.0;    // gradient noise multiplier
  double sigma_r = 1.0;  // report-noisy-max scale
  double sigma_p = 1.0;  // PTR noise multiplier
  double delta_t = 1e-5;
  double c1 = 1.2;
  double c2 = 0.8;
  double eta = 0.95;
  double delta_mrr = 0.001;
  double epsilon_budget = 16.0;
  double delta = 1e-5;
  int validation_interval = 1;  // rounds
  bool adaptive = true;
  double lr = 0.001;  // SGD step size on the private path
  privacy::Lemma1Denominator lemma1 = privacy::Lemma1Denominator::kSigma;

  friend bool operator==(const DpConfig&, const DpConfig&) = default;
};

void ValidateDpConfig(const DpConfig& cfg);

// Scales the entity rows jointly so their flattened norm is at most c1.
kge::SparseGradient ClipGlobal(kge::SparseGradient g, double c1);
// Clips every entity row to norm at most c2.
kge::SparseGradient ClipRows(kge::SparseGradient g, double c2);

// -beta * log(-log U), U uniform on (0, 1).
double Gumbel(double beta, Rng& rng);

struct SelectionOutcome {
  std::optional<std::vector<kg::EntityId>> released;  // descending norm order
  std::size_t k = 0;
  double d_k = 0.0;
  double d_hat = 0.0;
  bool passed = false;
  // n <= 2B: every row is selected without running the mechanism.
  bool trivial = false;
};

// Top-k row selection by report-noisy-max over adjacent norm gaps followed
// by a Gaussian propose-test-release check. `row_norms[i]` is the norm of
// entity row i in the summed clipped gradient.
SelectionOutcome PrivateSelection(std::span<const double> row_norms, double batch_size,
                                  const DpConfig& cfg, Rng& rng);

// (sum + N(0, sigma^2 c1^2)) / B for every coordinate of `selected_sum`.
Matrix NoisyGradient(const Matrix& selected_sum, double batch_size, const DpConfig& cfg,
                     Rng& rng);

struct DpTrainParams {
  double batch_size = 64.0;
  kge::LossParams loss;
};

// Gradient of the uniform-weight negative loss over round(B) groups of
// n_neg random negatives built from public pairs, scaled by 1/B. Reads no
// private triple.
kge::DenseGradient NegativeGradient(const kge::EmbeddingStore& store,
                                    std::span<const kg::HeadRelationPair> public_pairs,
                                    const DpTrainParams& params, Rng& rng,
                                    double* loss = nullptr);

struct DpStep {
  kge::EmbeddingStore updated;
  std::vector<privacy::PrivacyEvent> events;  // round/iter/client left to the caller
  SelectionOutcome selection;
  std::size_t batch_size = 0;
  std::size_t active_rows = 0;
  double loss = 0.0;
};

// One private training iteration on a copy of `store`.
DpStep DpIteration(const kge::EmbeddingStore& store, const kg::ClientDataset& data,
                   const DpConfig& cfg, double sigma, const DpTrainParams& params,
                   std::span<const kg::HeadRelationPair> public_pairs, Rng& rng);

double AdaptiveSigmaUpdate(double sigma, double mrr_t, double mrr_prev, const DpConfig& cfg);

}  // namespace fkge::dp

#endif  // FKGE_DP_DP_FLAMES_H_
