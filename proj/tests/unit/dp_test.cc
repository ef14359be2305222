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

#include <cmath>
#include <numeric>

#include "fkge/common/errors.h"
#include "fkge/dp/dp_flames.h"
#include "test_util.h"

namespace fkge::dp {
namespace {

kge::SparseGradient Grad(std::map<kg::EntityId, std::vector<double>> rows) {
  kge::SparseGradient g;
  g.rows = std::move(rows);
  return g;
}

TEST(Clip, GlobalExamples) {
  auto g = ClipGlobal(Grad({{0, {1.2, 0}}, {3, {0, 1.6}}}), 1.0);  // norm 2
  EXPECT_DOUBLE_EQ(g.rows[0][0], 0.6);
  EXPECT_DOUBLE_EQ(g.rows[3][1], 0.8);
  auto small = Grad({{1, {0.3, 0.4}}});
  EXPECT_EQ(ClipGlobal(small, 1.0).rows, small.rows);
  auto zero = Grad({{1, {0.0, 0.0}}});
  EXPECT_EQ(ClipGlobal(zero, 1.0).rows, zero.rows);
}

TEST(Clip, RowExamples) {
  auto g = ClipRows(Grad({{0, {0.0, 1.6}}, {1, {0.3, 0.4}}}), 0.8);
  EXPECT_DOUBLE_EQ(g.rows[0][1], 0.8);
  EXPECT_DOUBLE_EQ(g.rows[1][0], 0.3);
  EXPECT_DOUBLE_EQ(g.rows[1][1], 0.4);
}

TEST(Clip, NormBoundsOnRandomGradients) {
  Rng rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    kge::SparseGradient g;
    const int rows = 1 + static_cast<int>(UniformIndex(rng, 6));
    for (int r = 0; r < rows; ++r) {
      std::vector<double> v(5);
      const double scale = std::exp(4.0 * StandardNormal(rng));
      for (double& x : v) x = scale * StandardNormal(rng);
      g.rows[static_cast<kg::EntityId>(r * 3)] = v;
    }
    const auto a = ClipGlobal(g, 1.2);
    EXPECT_LE(a.EntityNorm(), 1.2 * (1 + 1e-12));
    const auto b = ClipRows(a, 0.8);
    for (const auto& [id, row] : b.rows) EXPECT_LE(Norm(row), 0.8 * (1 + 1e-12));
    EXPECT_LE(b.EntityNorm(), std::sqrt(static_cast<double>(rows)) * 0.8 * (1 + 1e-12));
  }
}

TEST(Gumbel, MeanIsEulerGammaTimesScale) {
  Rng rng(3);
  double s = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) s += Gumbel(2.0, rng);
  // Var = pi^2/6 * beta^2, so the standard error is about 0.0057.
  EXPECT_NEAR(s / n, 2.0 * 0.5772156649, 0.03);
}

DpConfig Noiseless() {
  DpConfig c;
  c.sigma_r = 1e-12;
  c.sigma_p = 1e-12;
  c.delta_t = 1.0 - 1e-12;
  return c;
}

TEST(Selection, NoiselessExample) {
  const std::vector<double> norms{0, 5, 0, 4.9, 0, 5, 0, 0};
  Rng rng(1);
  const auto out = PrivateSelection(norms, 2.0, Noiseless(), rng);
  EXPECT_FALSE(out.trivial);
  EXPECT_EQ(out.k, 3u);
  EXPECT_NEAR(out.d_k, 4.9, 1e-12);
  ASSERT_TRUE(out.passed);
  ASSERT_TRUE(out.released.has_value());
  // Ties broken by id ascending.
  EXPECT_EQ(*out.released, (std::vector<kg::EntityId>{1, 5, 3}));
}

TEST(Selection, TrivialWhenFewRows) {
  const std::vector<double> norms{1, 3, 2};
  Rng rng(1);
  const auto out = PrivateSelection(norms, 2.0, DpConfig{}, rng);
  EXPECT_TRUE(out.trivial);
  EXPECT_EQ(*out.released, (std::vector<kg::EntityId>{1, 2, 0}));
  EXPECT_THROW(PrivateSelection(norms, 0.5, DpConfig{}, rng), ArgumentError);
}

TEST(Selection, AllEqualNormsRarelyRelease) {
  DpConfig cfg;
  cfg.delta_t = 1e-3;
  const std::vector<double> norms(100, 0.7);
  Rng rng(7);
  const int trials = 10000;
  int released = 0;
  for (int i = 0; i < trials; ++i) {
    const auto out = PrivateSelection(norms, 10.0, cfg, rng);
    EXPECT_EQ(out.d_k, 0.0);
    EXPECT_EQ(out.passed, out.released.has_value());
    released += out.passed;
  }
  const double se = std::sqrt(cfg.delta_t * (1 - cfg.delta_t) / trials);
  EXPECT_LE(static_cast<double>(released) / trials, cfg.delta_t + 3 * se);
}

TEST(Selection, LargeGapAlmostAlwaysReleases) {
  DpConfig cfg;
  cfg.sigma_p = 1.0;
  cfg.sigma_r = 1e-9;  // pins k = B so that d_k = 10 C2
  cfg.delta_t = 1e-4;
  std::vector<double> norms(60, 0.0);
  for (int i = 0; i < 8; ++i) norms[i * 7] = 10.0 * cfg.c2;
  Rng rng(8);
  int released = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto out = PrivateSelection(norms, 8.0, cfg, rng);
    ASSERT_NEAR(out.d_k, 10.0 * cfg.c2, 1e-12);
    released += out.passed;
  }
  // P(N(0,1) > sqrt(2 ln 1e4) - 9) = 0.9999988.
  EXPECT_GE(released, 9990);
}

TEST(Selection, ReleasedCountWithinRegularizerRange) {
  DpConfig cfg;
  cfg.delta_t = 0.5;  // releases often enough to exercise the property
  cfg.sigma_p = 0.1;
  Rng rng(21);
  int released = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double B = 1.0 + static_cast<double>(UniformIndex(rng, 20));
    const std::size_t n = static_cast<std::size_t>(2 * B) + 1 + UniformIndex(rng, 50);
    std::vector<double> norms(n);
    for (double& x : norms) x = UniformIndex(rng, 3) == 0 ? 0.0 : 10.0 * UniformOpen(rng);
    const auto out = PrivateSelection(norms, B, cfg, rng);
    EXPECT_GE(static_cast<double>(out.k), B);
    EXPECT_LE(static_cast<double>(out.k), 2 * B);
    EXPECT_EQ(out.passed, out.released.has_value());
    if (out.passed) {
      ++released;
      EXPECT_EQ(out.released->size(), out.k);
    }
  }
  EXPECT_GT(released, 50);
}

TEST(Noise, StandardDeviationMatchesSigmaC1OverB) {
  DpConfig cfg;
  cfg.sigma = 1.0;
  cfg.c1 = 1.2;
  Rng rng(4);
  const Matrix out = NoisyGradient(Matrix(1000, 100), 16.0, cfg, rng);
  double ss = 0.0, s = 0.0;
  for (double v : out.data()) {
    s += v;
    ss += v * v;
  }
  const double n = static_cast<double>(out.data().size());
  const double sd = std::sqrt(ss / n - (s / n) * (s / n));
  EXPECT_NEAR(sd, 0.075, 0.075 * 0.05);
}

TEST(Noise, ZeroSigmaIsTheExactMean) {
  DpConfig cfg;
  cfg.sigma = 0.0;
  Matrix sum(2, 3);
  for (std::size_t i = 0; i < 6; ++i) sum.data()[i] = static_cast<double>(i) - 2.5;
  Rng rng(1);
  const Matrix out = NoisyGradient(sum, 4.0, cfg, rng);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(out.data()[i], sum.data()[i] / 4.0);
}

TEST(Adaptive, DecayRule) {
  DpConfig cfg;
  EXPECT_DOUBLE_EQ(AdaptiveSigmaUpdate(1.0, 0.2005, 0.2, cfg), 0.95);
  EXPECT_EQ(AdaptiveSigmaUpdate(1.0, 0.202, 0.2, cfg), 1.0);
  EXPECT_EQ(AdaptiveSigmaUpdate(1.0, 0.201, 0.2, cfg), 1.0);
  double s = 1.0;
  for (int t = 1; t <= 200; ++t) {
    const double next = AdaptiveSigmaUpdate(s, 0.1, 0.1, cfg);
    EXPECT_LT(next, s);
    EXPECT_GT(next, 0.0);
    EXPECT_NEAR(next, std::pow(0.95, t), 1e-12 * std::pow(0.95, t));
    s = next;
  }
}

TEST(Config, Validation) {
  EXPECT_NO_THROW(ValidateDpConfig(DpConfig{}));
  auto bad = [](auto mutate) {
    DpConfig c;
    mutate(c);
    EXPECT_THROW(ValidateDpConfig(c), ConfigError);
  };
  bad([](DpConfig& c) { c.sigma = 0; });
  bad([](DpConfig& c) { c.c2 = -1; });
  bad([](DpConfig& c) { c.eta = 1.0; });
  bad([](DpConfig& c) { c.delta_t = 0.0; });
  bad([](DpConfig& c) { c.validation_interval = 0; });
}

// 25 entities, 2 relations; pairs (i, 10+i) for i < 5 are linked by both
// relations, so each of the 10 active rows collects two parallel clipped
// contributions of norm C2.
struct Toy {
  kg::ClientDataset data;
  kge::EmbeddingStore store;
  std::vector<kg::HeadRelationPair> pairs;
};

Toy MakeToy() {
  Toy t;
  t.data.graph = testing::Graph(25, 2);
  for (kg::EntityId i = 0; i < 5; ++i) {
    for (kg::RelationId r = 0; r < 2; ++r) {
      const kg::Triple tr{i, r, i + 10};
      t.data.graph.AddTriple(tr);
      t.data.train.push_back(tr);
    }
  }
  t.store = kge::EmbeddingStore(kge::ModelKind::kTransE, 25, 2, 4);
  Rng rng(2);
  for (double& v : t.store.entities().data()) v = 0.1 * StandardNormal(rng);
  for (kg::EntityId i = 0; i < 5; ++i) {
    t.store.entities().SetRow(i, std::vector<double>(4, 1.0));
    t.store.entities().SetRow(i + 10, std::vector<double>(4, -1.0));
  }
  t.store.relation_params().SetRow(0, std::vector<double>(4, 0.01));
  t.store.relation_params().SetRow(1, std::vector<double>(4, 0.02));
  for (kg::EntityId i = 0; i < 25; ++i) t.pairs.push_back({i, 0});
  return t;
}

TEST(DpIteration, NoiselessMatchesClippedSgd) {
  const auto toy = MakeToy();
  DpConfig cfg = Noiseless();
  cfg.c1 = 10.0;
  cfg.c2 = 0.1;
  cfg.lr = 0.5;
  DpTrainParams params;
  params.batch_size = 10.0;
  params.loss.n_neg = 4;
  params.loss.gamma = 1.0;  // keeps every row gradient above C2

  Rng rng(99);
  Rng probe = rng;
  Rng neg_rng(probe());
  const auto gn = NegativeGradient(toy.store, toy.pairs, params, neg_rng);

  const auto step = DpIteration(toy.store, toy.data, cfg, 0.0, params, toy.pairs, rng);
  ASSERT_TRUE(step.selection.passed);
  EXPECT_EQ(step.selection.k, 10u);
  EXPECT_NEAR(step.selection.d_k, 2 * cfg.c2, 1e-12);
  ASSERT_EQ(step.events.size(), 2u);
  EXPECT_EQ(step.events[1].kind, privacy::EventKind::kGradient);
  EXPECT_EQ(step.events[1].q, 1.0);

  // Each head row gets 2 * C2 * (1,1,1,1)/2 over B; tails the opposite.
  for (kg::EntityId e = 0; e < 25; ++e) {
    const double pos = e < 5 ? cfg.c2 / 10.0 : (e >= 10 && e < 15 ? -cfg.c2 / 10.0 : 0.0);
    for (std::size_t j = 0; j < 4; ++j) {
      const double expect = toy.store.entities()(e, j) - cfg.lr * (pos + gn.entities(e, j));
      EXPECT_NEAR(step.updated.entities()(e, j), expect, 1e-12) << "row " << e;
    }
  }
}

DpConfig AlwaysBottom() {
  DpConfig cfg;
  cfg.sigma_p = 100.0;
  cfg.delta_t = 1e-9;
  cfg.lr = 0.1;
  return cfg;
}

TEST(DpIteration, BottomChargesOnlySelection) {
  const auto toy = MakeToy();
  DpTrainParams params;
  params.batch_size = 5.0;
  Rng rng(1);
  const auto step = DpIteration(toy.store, toy.data, AlwaysBottom(), 1.0, params, toy.pairs, rng);
  EXPECT_FALSE(step.selection.passed);
  ASSERT_EQ(step.events.size(), 1u);
  EXPECT_EQ(step.events[0].kind, privacy::EventKind::kSelection);
  EXPECT_DOUBLE_EQ(step.events[0].q, 0.5);
}

TEST(DpIteration, NegativeUpdateIgnoresPrivateTriples) {
  auto a = MakeToy();
  auto b = MakeToy();
  b.data.train = {{20, 0, 21}, {22, 1, 23}, {3, 0, 24}, {4, 1, 5}, {6, 0, 7},
                  {8, 1, 9},   {1, 0, 2},   {2, 1, 3},  {5, 0, 6}, {7, 1, 8}};
  DpTrainParams params;
  params.batch_size = 5.0;
  Rng ra(77), rb(77);
  const auto sa = DpIteration(a.store, a.data, AlwaysBottom(), 1.0, params, a.pairs, ra);
  const auto sb = DpIteration(b.store, b.data, AlwaysBottom(), 1.0, params, b.pairs, rb);
  ASSERT_FALSE(sa.selection.passed);
  ASSERT_FALSE(sb.selection.passed);
  EXPECT_EQ(sa.updated.entities(), sb.updated.entities());

  Rng n1(5), n2(5);
  EXPECT_EQ(NegativeGradient(a.store, a.pairs, params, n1).entities,
            NegativeGradient(b.store, b.pairs, params, n2).entities);
}

TEST(DpIteration, UntouchedRowsAreBitIdentical) {
  const auto toy = MakeToy();
  DpTrainParams params;
  params.batch_size = 5.0;
  params.loss.n_neg = 1;
  std::vector<kg::HeadRelationPair> pairs{{0, 0}};
  Rng rng(3);
  Rng probe = rng;
  Rng neg_rng(probe());
  const auto gn = NegativeGradient(toy.store, pairs, params, neg_rng);
  const auto step = DpIteration(toy.store, toy.data, Noiseless(), 0.5, params, pairs, rng);
  int untouched = 0;
  for (kg::EntityId e = 15; e < 25; ++e) {
    bool zero = true;
    for (double v : gn.entities.row(e)) zero = zero && v == 0.0;
    if (!zero) continue;
    ++untouched;
    EXPECT_TRUE(step.updated.entities().RowBitEqual(e, toy.store.entities()));
  }
  EXPECT_GT(untouched, 0);
}

TEST(DpIteration, Preconditions) {
  const auto toy = MakeToy();
  DpTrainParams params;
  Rng rng(1);
  EXPECT_THROW(DpIteration(toy.store, toy.data, DpConfig{}, 1.0, params, {}, rng), ConfigError);
  params.batch_size = 11.0;
  EXPECT_THROW(DpIteration(toy.store, toy.data, DpConfig{}, 1.0, params, toy.pairs, rng),
               ConfigError);
}

TEST(DpIteration, LossDecreasesWithSmallNoise) {
  const auto syn = kg::GenerateSynthetic(120, 4, 1200, 6);
  const auto part = kg::PartitionFederated(syn.graph, 2, 0.3, {}, 6);
  const auto& data = part.clients[0];
  Rng init(1);
  auto store = kge::EmbeddingStore::Random(kge::ModelKind::kTransE, data.graph.num_entities(),
                                           data.graph.num_relations(), 16, init);
  std::vector<kg::HeadRelationPair> pairs;
  for (const auto& t : data.valid) pairs.push_back({t.head, t.rel});
  DpConfig cfg;
  cfg.sigma = 0.1;
  cfg.lr = 0.1;
  DpTrainParams params;
  params.batch_size = 32.0;
  Rng rng(2);
  std::vector<double> losses;
  for (int i = 0; i < 300; ++i) {
    auto step = DpIteration(store, data, cfg, cfg.sigma, params, pairs, rng);
    losses.push_back(step.loss);
    store = std::move(step.updated);
  }
  const double first = std::accumulate(losses.begin(), losses.begin() + 30, 0.0);
  const double last = std::accumulate(losses.end() - 30, losses.end(), 0.0);
  EXPECT_LT(last, first);
}

}  // namespace
}  // namespace fkge::dp
