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

#include "fkge/kge/scoring.h"

#include <algorithm>
#include <cmath>

#include "fkge/common/errors.h"

namespace fkge::kge {

void ValidateLossParams(const LossParams& p) {
  if (!(p.gamma > 0.0)) throw ArgumentError("gamma must be positive");
  if (p.n_neg < 1) throw ArgumentError("n_neg must be >= 1");
  if (!(p.adv_temp >= 0.0)) throw ArgumentError("adv_temp must be >= 0");
}

double Softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

// Score and its partial derivatives with respect to the head row, the
// materialized relation row and the tail row. Output spans may be empty when
// only the score is needed.
double ScorePartials(ModelKind model, std::span<const double> h,
                     std::span<const double> r, std::span<const double> t,
                     std::span<double> dh, std::span<double> dr, std::span<double> dt) {
  const bool want = !dh.empty();
  const std::size_t w = h.size();
  switch (model) {
    case ModelKind::kTransE: {
      double n2 = 0.0;
      for (std::size_t k = 0; k < w; ++k) {
        const double d = h[k] + r[k] - t[k];
        n2 += d * d;
      }
      const double n = std::sqrt(n2);
      if (want) {
        // Subgradient 0 at the non-differentiable point.
        const double inv = n > 0.0 ? 1.0 / n : 0.0;
        for (std::size_t k = 0; k < w; ++k) {
          const double u = (h[k] + r[k] - t[k]) * inv;
          dh[k] = -u;
          dr[k] = -u;
          dt[k] = u;
        }
      }
      return -n;
    }
    case ModelKind::kRotatE: {
      const std::size_t d = w / 2;
      double n2 = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double re = h[k] * r[k] - h[d + k] * r[d + k] - t[k];
        const double im = h[k] * r[d + k] + h[d + k] * r[k] - t[d + k];
        n2 += re * re + im * im;
      }
      const double n = std::sqrt(n2);
      if (want) {
        const double inv = n > 0.0 ? 1.0 / n : 0.0;
        for (std::size_t k = 0; k < d; ++k) {
          const double hre = h[k], him = h[d + k];
          const double rre = r[k], rim = r[d + k];
          const double dre = (hre * rre - him * rim - t[k]) * inv;
          const double dim = (hre * rim + him * rre - t[d + k]) * inv;
          dh[k] = -(dre * rre + dim * rim);
          dh[d + k] = -(-dre * rim + dim * rre);
          dr[k] = -(dre * hre + dim * him);
          dr[d + k] = -(-dre * him + dim * hre);
          dt[k] = dre;
          dt[d + k] = dim;
        }
      }
      return -n;
    }
    case ModelKind::kDistMult: {
      double f = 0.0;
      for (std::size_t k = 0; k < w; ++k) {
        f += h[k] * r[k] * t[k];
        if (want) {
          dh[k] = r[k] * t[k];
          dr[k] = h[k] * t[k];
          dt[k] = h[k] * r[k];
        }
      }
      return f;
    }
    case ModelKind::kComplEx: {
      const std::size_t d = w / 2;
      double f = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double hre = h[k], him = h[d + k];
        const double rre = r[k], rim = r[d + k];
        const double tre = t[k], tim = t[d + k];
        f += (hre * rre - him * rim) * tre + (hre * rim + him * rre) * tim;
        if (want) {
          dh[k] = rre * tre + rim * tim;
          dh[d + k] = -rim * tre + rre * tim;
          dr[k] = hre * tre + him * tim;
          dr[d + k] = -him * tre + hre * tim;
          dt[k] = hre * rre - him * rim;
          dt[d + k] = hre * rim + him * rre;
        }
      }
      return f;
    }
  }
  return 0.0;
}

// Computes dL/df-scaled partials for one triple and hands them to `sink`.
// Relation partials are converted to parameter space (phases for RotatE).
template <typename Sink>
double TripleGradient(const EmbeddingStore& store, const Triple& tr,
                      double (*dloss_df)(double, const void*), const void* ctx,
                      Sink&& sink) {
  const std::size_t w = store.entity_width();
  std::vector<double> buf(5 * w);
  std::span<double> r(buf.data(), w), dh(buf.data() + w, w), dr(buf.data() + 2 * w, w),
      dt(buf.data() + 3 * w, w), dparam(buf.data() + 4 * w, w);
  store.RelationRow(tr.rel, r);
  const double f = ScorePartials(store.model(), store.entities().row(tr.head), r,
                                 store.entities().row(tr.tail), dh, dr, dt);
  const double g = dloss_df(f, ctx);
  std::span<const double> rel_grad = dr;
  if (store.model() == ModelKind::kRotatE) {
    const std::size_t d = store.dim();
    for (std::size_t k = 0; k < d; ++k) {
      dparam[k] = -dr[k] * r[d + k] + dr[d + k] * r[k];
    }
    rel_grad = dparam.subspan(0, d);
  }
  sink(tr, g, std::span<const double>(dh), rel_grad, std::span<const double>(dt));
  return f;
}

struct PositiveCtx {
  ModelKind model;
  const LossParams* params;
};

double PositiveDlossDf(double f, const void* p) {
  const auto* c = static_cast<const PositiveCtx*>(p);
  return -Sigmoid(-PositiveLogit(c->model, f, *c->params));
}

struct NegativeCtx {
  ModelKind model;
  const LossParams* params;
  double weight;
};

double NegativeDlossDf(double f, const void* p) {
  const auto* c = static_cast<const NegativeCtx*>(p);
  return c->weight * Sigmoid(-NegativeLogit(c->model, f, *c->params));
}

struct SparseSink {
  SparseGradient* out;
  bool relations = true;
  void operator()(const Triple& tr, double g, std::span<const double> dh,
                  std::span<const double> dr, std::span<const double> dt) const {
    out->AddEntity(tr.head, g, dh);
    out->AddEntity(tr.tail, g, dt);
    if (relations) out->AddRelation(tr.rel, g, dr);
  }
};

struct DenseSink {
  DenseGradient* out;
  double scale;
  void operator()(const Triple& tr, double g, std::span<const double> dh,
                  std::span<const double> dr, std::span<const double> dt) const {
    Axpy(scale * g, dh, out->entities.row(tr.head));
    Axpy(scale * g, dt, out->entities.row(tr.tail));
    Axpy(scale * g, dr, out->relations.row(tr.rel));
  }
};

}  // namespace

double ScoreRows(ModelKind model, std::span<const double> head,
                 std::span<const double> rel, std::span<const double> tail) {
  return ScorePartials(model, head, rel, tail, {}, {}, {});
}

double Score(const EmbeddingStore& store, const Triple& triple) {
  std::vector<double> r(store.entity_width());
  store.RelationRow(triple.rel, r);
  return ScoreRows(store.model(), store.entities().row(triple.head), r,
                   store.entities().row(triple.tail));
}

double PositiveLogit(ModelKind model, double score, const LossParams& p) {
  if (p.margin == MarginConvention::kDistance && IsTranslational(model)) {
    return score + p.gamma;
  }
  return score - p.gamma;
}

double NegativeLogit(ModelKind model, double score, const LossParams& p) {
  if (p.margin == MarginConvention::kDistance && IsTranslational(model)) {
    return -p.gamma - score;
  }
  return p.gamma - score;
}

double LossPositive(const EmbeddingStore& store, const Triple& triple,
                    const LossParams& params) {
  return Softplus(-PositiveLogit(store.model(), Score(store, triple), params));
}

std::vector<double> NegativeWeights(const EmbeddingStore& store,
                                    std::span<const Triple> negatives,
                                    const LossParams& params, NegativeMode mode) {
  const std::size_t n = negatives.size();
  std::vector<double> w(n, n ? 1.0 / static_cast<double>(n) : 0.0);
  if (mode == NegativeMode::kUniform || n == 0) return w;
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = params.adv_temp * Score(store, negatives[i]);
    mx = std::max(mx, w[i]);
  }
  double z = 0.0;
  for (double& v : w) {
    v = std::exp(v - mx);
    z += v;
  }
  for (double& v : w) v /= z;
  return w;
}

double LossNegative(const EmbeddingStore& store, const std::optional<Triple>& /*pos*/,
                    std::span<const Triple> negatives, const LossParams& params,
                    NegativeMode mode) {
  if (negatives.empty()) throw ArgumentError("negative list is empty");
  const auto w = NegativeWeights(store, negatives, params, mode);
  double loss = 0.0;
  for (std::size_t i = 0; i < negatives.size(); ++i) {
    loss += w[i] * Softplus(-NegativeLogit(store.model(), Score(store, negatives[i]), params));
  }
  return loss;
}

void SparseGradient::AddEntity(EntityId id, double scale, std::span<const double> g) {
  auto [it, inserted] = rows.try_emplace(id, g.size(), 0.0);
  Axpy(scale, g, it->second);
}

void SparseGradient::AddRelation(RelationId id, double scale, std::span<const double> g) {
  auto [it, inserted] = rel_rows.try_emplace(id, g.size(), 0.0);
  Axpy(scale, g, it->second);
}

double SparseGradient::EntityNorm() const {
  double s = 0.0;
  for (const auto& [id, v] : rows) s += SquaredNorm(v);
  return std::sqrt(s);
}

void SparseGradient::ScaleEntities(double s) {
  for (auto& [id, v] : rows) Scale(s, v);
}

SparseGradient GradPositive(const EmbeddingStore& store, const Triple& triple,
                            const LossParams& params) {
  SparseGradient g;
  PositiveCtx ctx{store.model(), &params};
  TripleGradient(store, triple, &PositiveDlossDf, &ctx, SparseSink{&g});
  return g;
}

SparseGradient GradNegative(const EmbeddingStore& store, const std::optional<Triple>& /*pos*/,
                            std::span<const Triple> negatives, const LossParams& params,
                            NegativeMode mode) {
  if (negatives.empty()) throw ArgumentError("negative list is empty");
  const auto w = NegativeWeights(store, negatives, params, mode);
  SparseGradient g;
  for (std::size_t i = 0; i < negatives.size(); ++i) {
    NegativeCtx ctx{store.model(), &params, w[i]};
    TripleGradient(store, negatives[i], &NegativeDlossDf, &ctx, SparseSink{&g});
  }
  return g;
}

BatchGradient BatchEntityGradient(const EmbeddingStore& store,
                                  std::span<const Triple> batch,
                                  const LossParams& params) {
  BatchGradient out;
  out.per_example.reserve(batch.size());
  PositiveCtx ctx{store.model(), &params};
  for (const Triple& t : batch) {
    SparseGradient g;
    TripleGradient(store, t, &PositiveDlossDf, &ctx, SparseSink{&g, false});
    for (const auto& [id, row] : g.rows) out.active_rows.insert(id);
    out.per_example.push_back(std::move(g));
  }
  return out;
}

void DenseGradient::Zero() {
  std::fill(entities.data().begin(), entities.data().end(), 0.0);
  std::fill(relations.data().begin(), relations.data().end(), 0.0);
}

double AccumulatePositive(const EmbeddingStore& store, const Triple& triple,
                          const LossParams& params, double scale, DenseGradient& grad) {
  PositiveCtx ctx{store.model(), &params};
  const double f =
      TripleGradient(store, triple, &PositiveDlossDf, &ctx, DenseSink{&grad, scale});
  return Softplus(-PositiveLogit(store.model(), f, params));
}

double AccumulateNegative(const EmbeddingStore& store, std::span<const Triple> negatives,
                          const LossParams& params, NegativeMode mode, double scale,
                          DenseGradient& grad) {
  if (negatives.empty()) return 0.0;
  const auto w = NegativeWeights(store, negatives, params, mode);
  double loss = 0.0;
  for (std::size_t i = 0; i < negatives.size(); ++i) {
    NegativeCtx ctx{store.model(), &params, w[i]};
    const double f = TripleGradient(store, negatives[i], &NegativeDlossDf, &ctx,
                                    DenseSink{&grad, scale});
    loss += w[i] * Softplus(-NegativeLogit(store.model(), f, params));
  }
  return loss;
}

}  // namespace fkge::kge
