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

#include "fkge/dp/dp_flames.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fkge/common/errors.h"

namespace fkge::dp {

void ValidateDpConfig(const DpConfig& c) {
  if (!(c.sigma > 0 && c.sigma_r > 0 && c.sigma_p > 0)) {
    throw ConfigError("sigma, sigma_r and sigma_p must be positive");
  }
  if (!(c.c1 > 0 && c.c2 > 0)) throw ConfigError("clipping bounds must be positive");
  if (!(c.eta > 0 && c.eta < 1)) throw ConfigError("eta must lie in (0, 1)");
  if (!(c.delta_t > 0 && c.delta_t < 1)) throw ConfigError("delta_t must lie in (0, 1)");
  if (!(c.delta > 0 && c.delta < 1)) throw ConfigError("delta must lie in (0, 1)");
  if (!(c.epsilon_budget >= 0)) throw ConfigError("epsilon budget must be >= 0");
  if (c.validation_interval < 1) throw ConfigError("validation_interval must be >= 1");
  if (!(c.lr >= 0)) throw ConfigError("dp learning rate must be >= 0");
}

kge::SparseGradient ClipGlobal(kge::SparseGradient g, double c1) {
  const double n = g.EntityNorm();
  const double f = std::max(1.0, n / c1);
  if (f > 1.0) g.ScaleEntities(1.0 / f);
  return g;
}

kge::SparseGradient ClipRows(kge::SparseGradient g, double c2) {
  for (auto& [id, row] : g.rows) {
    const double f = std::max(1.0, Norm(row) / c2);
    if (f > 1.0) Scale(1.0 / f, row);
  }
  return g;
}

double Gumbel(double beta, Rng& rng) {
  return -beta * std::log(-std::log(UniformOpen(rng)));
}

SelectionOutcome PrivateSelection(std::span<const double> row_norms, double batch_size,
                                  const DpConfig& cfg, Rng& rng) {
  if (!(batch_size >= 1.0)) throw ArgumentError("selection needs B >= 1");
  const std::size_t n = row_norms.size();
  std::vector<kg::EntityId> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](kg::EntityId a, kg::EntityId b) {
    return row_norms[a] > row_norms[b];
  });

  SelectionOutcome out;
  if (static_cast<double>(n) <= 2.0 * batch_size) {
    out.trivial = true;
    out.passed = true;
    out.k = n;
    out.released = order;
    return out;
  }

  // Gaps j = 1..n-1 (1-based); only j in [B, 2B] can win.
  double best = -std::numeric_limits<double>::infinity();
  std::size_t k = 0;
  for (std::size_t j = 1; j + 1 <= n; ++j) {
    const double jd = static_cast<double>(j);
    if (jd < batch_size || jd > 2.0 * batch_size) continue;
    const double gap = row_norms[order[j - 1]] - row_norms[order[j]];
    const double v = gap + Gumbel(2.0 * cfg.c2 * cfg.sigma_r, rng);
    if (v > best) {
      best = v;
      k = j;
    }
  }
  if (k == 0) throw ArgumentError("no admissible gap index in [B, 2B]");
  out.k = k;
  out.d_k = row_norms[order[k - 1]] - (k < n ? row_norms[order[k]] : 0.0);
  out.d_hat = std::max(cfg.c2, out.d_k) + cfg.sigma_p * cfg.c2 * StandardNormal(rng) -
              cfg.sigma_p * cfg.c2 * std::sqrt(2.0 * std::log(1.0 / cfg.delta_t));
  out.passed = out.d_hat > cfg.c2;
  if (out.passed) out.released.emplace(order.begin(), order.begin() + k);
  return out;
}

Matrix NoisyGradient(const Matrix& selected_sum, double batch_size, const DpConfig& cfg,
                     Rng& rng) {
  Matrix out = selected_sum;
  const double sd = cfg.sigma * cfg.c1;
  for (double& v : out.data()) v = (v + sd * StandardNormal(rng)) / batch_size;
  return out;
}

kge::DenseGradient NegativeGradient(const kge::EmbeddingStore& store,
                                    std::span<const kg::HeadRelationPair> public_pairs,
                                    const DpTrainParams& params, Rng& rng, double* loss) {
  if (public_pairs.empty()) throw ConfigError("the private path needs public head-relation pairs");
  kge::DenseGradient g(store);
  // Only the entity count of the graph is read by the sampler.
  kg::Vocabulary ents;
  for (std::size_t i = 0; i < store.num_entities(); ++i) ents.Add(std::to_string(i));
  const kg::KnowledgeGraph shape(std::move(ents), kg::Vocabulary{});
  const auto groups = std::max<long long>(1, std::llround(params.batch_size));
  double total = 0.0;
  for (long long i = 0; i < groups; ++i) {
    const auto negs = kg::NegativeSampleRandom(public_pairs, params.loss.n_neg, shape, rng);
    total += kge::AccumulateNegative(store, negs, params.loss, kge::NegativeMode::kUniform,
                                     1.0 / params.batch_size, g);
  }
  if (loss) *loss = total / params.batch_size;
  return g;
}

DpStep DpIteration(const kge::EmbeddingStore& store, const kg::ClientDataset& data,
                   const DpConfig& cfg, double sigma, const DpTrainParams& params,
                   std::span<const kg::HeadRelationPair> public_pairs, Rng& rng) {
  if (public_pairs.empty()) throw ConfigError("the private path needs public head-relation pairs");
  const double n_train = static_cast<double>(data.train.size());
  const double B = params.batch_size;
  if (!(B > 0.0 && B <= n_train)) throw ConfigError("batch size must lie in (0, |train|]");
  const double q = B / n_train;
  DpConfig run_cfg = cfg;
  run_cfg.sigma = sigma;

  // Separate stream so the negative draws never depend on private data.
  Rng neg_rng(rng());

  DpStep step;
  const auto batch = kg::SampleBatch(data, B, rng);
  step.batch_size = batch.size();

  const auto bg = kge::BatchEntityGradient(store, batch, params.loss);
  step.active_rows = bg.active_rows.size();
  const std::size_t n = store.num_entities();
  const std::size_t w = store.entity_width();
  Matrix sum(n, w);
  for (const auto& ex : bg.per_example) {
    const auto clipped = ClipRows(ClipGlobal(ex, cfg.c1), cfg.c2);
    for (const auto& [id, row] : clipped.rows) Axpy(1.0, row, sum.row(id));
  }
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) norms[i] = Norm(sum.row(i));

  step.selection = PrivateSelection(norms, B, run_cfg, rng);
  {
    // Charged even in the trivial case, which keeps the count data-independent.
    privacy::PrivacyEvent e;
    e.kind = privacy::EventKind::kSelection;
    e.q = q;
    e.sigma_r = cfg.sigma_r;
    e.sigma_p = cfg.sigma_p;
    e.delta_t = cfg.delta_t;
    step.events.push_back(e);
  }

  step.updated = store;
  Matrix& E = step.updated.entities();
  if (step.selection.passed) {
    privacy::PrivacyEvent e;
    e.kind = privacy::EventKind::kGradient;
    e.q = q;
    e.sigma = sigma;
    step.events.push_back(e);
    const auto& idx = *step.selection.released;
    Matrix selected(idx.size(), w);
    for (std::size_t i = 0; i < idx.size(); ++i) selected.SetRow(i, sum.row(idx[i]));
    const Matrix noisy = NoisyGradient(selected, B, run_cfg, rng);
    for (std::size_t i = 0; i < idx.size(); ++i) Axpy(-cfg.lr, noisy.row(i), E.row(idx[i]));
  }

  double neg_loss = 0.0;
  const auto gn = NegativeGradient(store, public_pairs, params, neg_rng, &neg_loss);
  for (std::size_t i = 0; i < n; ++i) Axpy(-cfg.lr, gn.entities.row(i), E.row(i));

  // Relations stay on the client, so their update uses the raw gradients.
  kge::DenseGradient gp(store);
  double pos_loss = 0.0;
  for (const auto& t : batch) pos_loss += kge::AccumulatePositive(store, t, params.loss, 1.0 / B, gp);
  Matrix& R = step.updated.relation_params();
  for (std::size_t r = 0; r < R.rows(); ++r) {
    Axpy(-cfg.lr, gp.relations.row(r), R.row(r));
    Axpy(-cfg.lr, gn.relations.row(r), R.row(r));
  }
  step.loss = pos_loss / B + neg_loss;
  return step;
}

double AdaptiveSigmaUpdate(double sigma, double mrr_t, double mrr_prev, const DpConfig& cfg) {
  return mrr_t - mrr_prev < cfg.delta_mrr ? cfg.eta * sigma : sigma;
}

}  // namespace fkge::dp
