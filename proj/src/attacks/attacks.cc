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

#include "fkge/attacks/attacks.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "fkge/common/errors.h"
#include "fkge/kge/scoring.h"

namespace fkge::attacks {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kGuard = 1e-12;

std::optional<std::uint32_t> Row(const kg::Vocabulary* names, const std::string& token) {
  if (!names) throw ArgumentError("observables lack the aligned entity vocabulary");
  return names->Find(token);
}

}  // namespace

double RatioStatistic(double num, double den) {
  if (std::abs(den) < kGuard) {
    if (num == 0.0) return 1.0;
    return std::copysign(kInf, num) * (den < 0 ? -1.0 : 1.0);
  }
  return num / den;
}

// --------------------------------------------------------------------- SI

std::vector<double> EntityToRelation(kge::ModelKind model, std::size_t dim,
                                     std::span<const double> h, std::span<const double> t) {
  std::vector<double> out(h.size());
  if (model == kge::ModelKind::kRotatE) {
    bool divisible = true;
    for (std::size_t k = 0; k < dim && divisible; ++k) {
      divisible = std::hypot(h[k], h[dim + k]) > 1e-8;
    }
    if (divisible) {
      for (std::size_t k = 0; k < dim; ++k) {
        const double a = t[k], b = t[dim + k], c = h[k], d = h[dim + k];
        const double m = c * c + d * d;
        out[k] = (a * c + b * d) / m;
        out[dim + k] = (b * c - a * d) / m;
      }
      return out;
    }
  }
  for (std::size_t k = 0; k < h.size(); ++k) out[k] = t[k] - h[k];
  return out;
}

RelationCandidates SiEnumerateRelations(const Matrix& E, std::span<const std::uint32_t> rows,
                                        kge::ModelKind model, std::size_t dim,
                                        std::optional<std::size_t> cap, Rng& rng) {
  if (!kge::IsTranslational(model)) {
    throw UnsupportedModelError("the server-side attack only applies to translational models, not " +
                                std::string(kge::ModelName(model)));
  }
  const std::uint64_t n = rows.size();
  if (n < 2) throw ArgumentError("relation enumeration needs at least 2 victim entities");
  const std::uint64_t total = n * (n - 1);
  std::vector<std::uint64_t> picks;
  if (cap && *cap < total) {
    // Floyd's sampling of `cap` distinct pair indices.
    std::unordered_set<std::uint64_t> chosen;
    for (std::uint64_t j = total - *cap; j < total; ++j) {
      const std::uint64_t v = UniformIndex(rng, j + 1);
      chosen.insert(chosen.contains(v) ? j : v);
    }
    picks.assign(chosen.begin(), chosen.end());
    std::sort(picks.begin(), picks.end());
  } else {
    picks.resize(total);
    std::iota(picks.begin(), picks.end(), 0);
  }
  RelationCandidates out;
  out.embeddings = Matrix(picks.size(), E.cols());
  out.pairs.reserve(picks.size());
  for (std::size_t i = 0; i < picks.size(); ++i) {
    const auto j = picks[i] / (n - 1);
    auto k = picks[i] % (n - 1);
    if (k >= j) ++k;
    const auto hj = rows[j], tk = rows[k];
    out.pairs.emplace_back(hj, tk);
    out.embeddings.SetRow(i, EntityToRelation(model, dim, E.row(hj), E.row(tk)));
  }
  return out;
}

namespace {

Matrix KMeansPlusPlus(const Matrix& x, std::size_t k, Rng& rng) {
  const std::size_t n = x.rows();
  Matrix centers(k, x.cols());
  std::vector<double> d2(n, kInf);
  std::size_t pick = UniformIndex(rng, n);
  for (std::size_t c = 0; c < k; ++c) {
    centers.SetRow(c, x.row(pick));
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], SquaredDistance(x.row(i), centers.row(c)));
      total += d2[i];
    }
    if (c + 1 == k) break;
    if (total <= 0.0) {
      pick = UniformIndex(rng, n);
      continue;
    }
    double u = UniformOpen(rng) * total;
    pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      u -= d2[i];
      if (u <= 0.0 && d2[i] > 0.0) {
        pick = i;
        break;
      }
    }
  }
  return centers;
}

SiClusters Lloyd(const Matrix& x, Matrix centers, parallel::Exec exec) {
  const std::size_t n = x.rows(), k = centers.rows(), w = x.cols();
  std::vector<std::uint32_t> assign(n, UINT32_MAX), prev(n);
  std::vector<double> dist2(n);
  SiClusters out;
  for (int it = 0; it < 100; ++it) {
    prev = assign;
    parallel::AssignClusters(exec, x, centers, assign, dist2);
    out.iterations = it + 1;
    if (assign == prev) break;
    Matrix sum(k, w);
    std::vector<std::size_t> cnt(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      Axpy(1.0, x.row(i), sum.row(assign[i]));
      ++cnt[assign[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (cnt[c] == 0) continue;  // keep the old center
      Scale(1.0 / static_cast<double>(cnt[c]), sum.row(c));
      centers.SetRow(c, sum.row(c));
    }
  }
  out.centers = std::move(centers);
  out.sizes.assign(k, 0);
  out.radii.assign(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    ++out.sizes[assign[i]];
    out.radii[assign[i]] += std::sqrt(dist2[i]);
  }
  for (std::size_t c = 0; c < k; ++c) {
    out.radii[c] = out.sizes[c] ? out.radii[c] / static_cast<double>(out.sizes[c]) : kInf;
  }
  return out;
}

}  // namespace

SiClusters SiCluster(const Matrix& candidates, std::size_t n_r, std::uint64_t seed,
                     double quantile, parallel::Exec exec) {
  const std::size_t k = 2 * n_r;
  if (k == 0) throw ArgumentError("relation count must be positive");
  if (candidates.rows() < k) throw ArgumentError("fewer relation candidates than clusters");
  if (!(quantile >= 0.0 && quantile <= 1.0)) throw ArgumentError("quantile must lie in [0, 1]");
  Rng rng = MakeRng(seed, {0x5c1});
  SiClusters out = Lloyd(candidates, KMeansPlusPlus(candidates, k, rng), exec);
  if (std::find(out.sizes.begin(), out.sizes.end(), 0u) != out.sizes.end()) {
    Rng again = MakeRng(seed, {0x5c1, 1});
    out = Lloyd(candidates, KMeansPlusPlus(candidates, k, again), exec);
  }
  std::vector<double> sorted = out.radii;
  std::sort(sorted.begin(), sorted.end());
  const double pos = quantile * static_cast<double>(k - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  double thr = sorted[lo];
  if (frac > 0.0) thr = std::isinf(sorted[hi]) ? kInf : sorted[lo] + frac * (sorted[hi] - sorted[lo]);
  out.concentrated.resize(k);
  for (std::size_t c = 0; c < k; ++c) out.concentrated[c] = out.radii[c] < thr;
  return out;
}

SiDecision SiInfer(const kg::Candidate& cand, const SiObservables& obs, const SiClusters& cl) {
  SiDecision d;
  const auto h = Row(obs.entity_names, cand.head);
  const auto t = Row(obs.entity_names, cand.tail);
  const auto held = [&](std::optional<std::uint32_t> r) {
    return r && std::binary_search(obs.victim_rows.begin(), obs.victim_rows.end(), *r);
  };
  if (!held(h) || !held(t)) {
    d.evaluable = false;
    return d;
  }
  const auto v = EntityToRelation(obs.model, obs.dim, obs.victim_upload.row(*h),
                                  obs.victim_upload.row(*t));
  double best = kInf;
  std::size_t arg = 0;
  for (std::size_t c = 0; c < cl.centers.rows(); ++c) {
    const double dd = SquaredDistance(v, cl.centers.row(c));
    if (dd < best) {
      best = dd;
      arg = c;
    }
  }
  d.in_cluster = cl.concentrated[arg] && std::sqrt(best) <= cl.radii[arg];
  const auto ch = obs.aux->ClassOf(cand.head);
  const auto ct = obs.aux->ClassOf(cand.tail);
  if (!ch || !ct) {
    d.no_aux = true;
    return d;
  }
  const auto rel = obs.aux->Lookup(*ch, *ct);
  d.exist = d.in_cluster && rel && *rel == cand.rel;
  return d;
}

std::vector<SiDecision> SiAttack(const SiObservables& obs, std::span<const kg::Candidate> candidates,
                                 std::optional<std::size_t> cap, std::uint64_t seed,
                                 double quantile) {
  if (!obs.aux) throw ArgumentError("the server-side attack needs an auxiliary schema");
  std::vector<std::uint32_t> rows = obs.victim_rows;
  std::sort(rows.begin(), rows.end());
  SiObservables sorted = obs;
  sorted.victim_rows = rows;
  Rng rng = MakeRng(seed, {0x5e});
  const auto cands = SiEnumerateRelations(obs.victim_upload, rows, obs.model, obs.dim, cap, rng);
  const auto clusters = SiCluster(cands.embeddings, obs.n_relations, seed, quantile);
  std::vector<SiDecision> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) out.push_back(SiInfer(c, sorted, clusters));
  return out;
}

// --------------------------------------------------------------------- CIP

std::vector<std::uint32_t> CipDetectOverlap(const Matrix& own_upload, const Matrix& broadcast,
                                            const std::vector<bool>& held) {
  if (!own_upload.SameShape(broadcast)) throw ArgumentError("upload and broadcast differ in shape");
  if (!held.empty() && held.size() != own_upload.rows()) {
    throw ArgumentError("held mask does not match the upload");
  }
  std::vector<std::uint32_t> out;
  for (std::size_t r = 0; r < own_upload.rows(); ++r) {
    if (!held.empty() && !held[r]) continue;
    if (!own_upload.RowBitEqual(r, broadcast)) out.push_back(static_cast<std::uint32_t>(r));
  }
  return out;
}

Matrix CipExtract(const Matrix& broadcast, const Matrix& own_upload, int n,
                  const std::vector<bool>& held) {
  if (n < 2) throw ArgumentError("extraction needs an advertised client count >= 2");
  if (!own_upload.SameShape(broadcast)) throw ArgumentError("upload and broadcast differ in shape");
  Matrix out = broadcast;
  const double nd = n;
  for (std::uint32_t r : CipDetectOverlap(own_upload, broadcast, held)) {
    auto o = out.row(r);
    const auto b = broadcast.row(r);
    const auto u = own_upload.row(r);
    for (std::size_t k = 0; k < o.size(); ++k) o[k] = (nd * b[k] - u[k]) / (nd - 1.0);
  }
  return out;
}

double CipStatistic(kge::ModelKind model, std::span<const double> rel,
                    std::span<const double> h1, std::span<const double> t1,
                    std::span<const double> h2, std::span<const double> t2) {
  const double f1 = kge::ScoreRows(model, h1, rel, t1);
  const double f2 = kge::ScoreRows(model, h2, rel, t2);
  return RatioStatistic(f1, f2);
}

Decision CipInfer(double statistic, double tau) { return {statistic >= tau, statistic}; }

std::vector<std::optional<double>> CipAttack(const CipObservables& obs,
                                             std::span<const kg::Candidate> candidates) {
  if (!obs.own_model || !obs.own_relations) throw ArgumentError("observables lack the local model");
  const auto overlap = CipDetectOverlap(obs.own_upload, obs.broadcast, obs.held);
  const Matrix extracted =
      CipExtract(obs.broadcast, obs.own_upload, obs.advertised_clients, obs.held);
  std::vector<double> rel(obs.own_model->entity_width());
  std::vector<std::optional<double>> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    const auto h = Row(obs.entity_names, c.head);
    const auto t = Row(obs.entity_names, c.tail);
    const auto r = obs.own_relations->Find(c.rel);
    const auto in_overlap = [&](std::optional<std::uint32_t> x) {
      return x && std::binary_search(overlap.begin(), overlap.end(), *x);
    };
    if (!r || !in_overlap(h) || !in_overlap(t)) {
      out.emplace_back();
      continue;
    }
    obs.own_model->RelationRow(*r, rel);
    out.emplace_back(CipStatistic(obs.own_model->model(), rel, extracted.row(*h), extracted.row(*t),
                                  obs.own_upload.row(*h), obs.own_upload.row(*t)));
  }
  return out;
}

// --------------------------------------------------------------------- CIA

Matrix CiaReverse(const Matrix& upload, std::span<const std::uint32_t> targets,
                  const std::vector<bool>& held) {
  Matrix out = upload;
  std::unordered_set<std::uint32_t> done;
  for (std::uint32_t r : targets) {
    if (r >= upload.rows() || r >= held.size() || !held[r]) {
      throw ArgumentError("reversal target " + std::to_string(r) + " is not held by the adversary");
    }
    if (!done.insert(r).second) continue;
    for (double& v : out.row(r)) v = -v;
  }
  return out;
}

double CiaScore(kge::ModelKind model, std::span<const double> rel, std::span<const double> h,
                std::span<const double> t) {
  return -kge::ScoreRows(model, h, rel, t);
}

Decision CiaInfer(double s1, double s2, double tau) {
  const double stat = RatioStatistic(s1, s2);
  return {stat >= tau, stat};
}

std::vector<std::optional<double>> CiaScores(const CiaObservables& obs,
                                             std::span<const kg::Candidate> candidates) {
  if (!obs.own_model || !obs.own_relations) throw ArgumentError("observables lack the local model");
  std::vector<double> rel(obs.own_model->entity_width());
  std::vector<std::optional<double>> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    const auto h = Row(obs.entity_names, c.head);
    const auto t = Row(obs.entity_names, c.tail);
    const auto r = obs.own_relations->Find(c.rel);
    if (!h || !t || !r) {
      out.emplace_back();
      continue;
    }
    obs.own_model->RelationRow(*r, rel);
    out.emplace_back(CiaScore(obs.own_model->model(), rel, obs.broadcast.row(*h),
                              obs.broadcast.row(*t)));
  }
  return out;
}

}  // namespace fkge::attacks
