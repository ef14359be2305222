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

#include <fstream>
#include <sstream>

#include "fkge/common/errors.h"
#include "fkge/harness/config.h"
#include "fkge/harness/experiment.h"
#include "test_util.h"

namespace fkge::harness {
namespace {

std::string Slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig Tiny() {
  ExperimentConfig c;
  c.n_entities = 100;
  c.n_relations = 4;
  c.n_triples = 900;
  c.clients = 2;
  c.rounds = 4;
  c.dim = 8;
  c.n_neg = 16;
  c.lr = 0.05;
  c.attack_every = 2;
  c.candidates = 40;
  return c;
}

TEST(Config, RoundTrip) {
  auto c = Tiny();
  c.model = kge::ModelKind::kComplEx;
  c.defense = true;
  c.dp.sigma = 0.37;
  c.dp.lemma1 = privacy::Lemma1Denominator::kSigmaSquared;
  c.attacks = {"cip"};
  c.seed = 12345678901ULL;
  c.lr = 0.1 + 0.2;  // not exactly representable in short form
  EXPECT_EQ(ParseConfig(EmitConfig(c)), c);
  EXPECT_EQ(ParseConfig(EmitConfig(ExperimentConfig{})), ExperimentConfig{});
}

TEST(Config, ParsingErrors) {
  EXPECT_THROW(ParseConfig("[model]\nwidth = 3\n"), ConfigError);
  EXPECT_THROW(ParseConfig("[nosuch]\ndim = 3\n"), ConfigError);
  try {
    ParseConfig("# comment\n[model]\ndim = 8\nthis is not a pair\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
  EXPECT_THROW(ParseConfig("[model]\ndim = eight\n"), ConfigError);
}

TEST(Config, ValidationAndOverrides) {
  auto c = Tiny();
  ApplyOverride(c, "model.dim=16");
  ApplyOverride(c, "defense.enabled=true");
  ApplyOverride(c, "attack.attacks=si,cia");
  EXPECT_EQ(c.dim, 16u);
  EXPECT_TRUE(c.defense);
  EXPECT_EQ(c.attacks, (std::vector<std::string>{"si", "cia"}));
  EXPECT_THROW(ApplyOverride(c, "model.dim"), ConfigError);
  EXPECT_THROW(ApplyOverride(c, "attack.attacks=si,xyz"), ConfigError);

  auto bad = Tiny();
  bad.victim = bad.adversary;
  EXPECT_THROW(ValidateConfig(bad), ConfigError);
  bad = Tiny();
  bad.clients = 1;
  EXPECT_THROW(ValidateConfig(bad), ConfigError);
  bad = Tiny();
  bad.source = "files";
  EXPECT_THROW(ValidateConfig(bad), ConfigError);
  bad = Tiny();
  bad.defense = true;
  bad.dp.eta = 1.5;
  EXPECT_THROW(ValidateConfig(bad), ConfigError);
  EXPECT_NO_THROW(ValidateConfig(Tiny()));
}

TEST(Account, ZeroIterationsAndGrowth) {
  dp::DpConfig cfg;
  const std::vector<int> ts{0, 50, 100};
  const auto rows = CmdAccount(cfg, 0.01, ts);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].guarantee.epsilon, 0.0);
  EXPECT_EQ(rows[0].guarantee.delta_total, cfg.delta);
  EXPECT_GT(rows[2].guarantee.epsilon, rows[1].guarantee.epsilon);
  EXPECT_NEAR(rows[2].guarantee.delta_total, cfg.delta + 100 * cfg.delta_t, 1e-15);

  const std::vector<int> hundred{100};
  const auto none = CmdAccount(cfg, 0.01, hundred, 0);
  EXPECT_LT(none[0].guarantee.epsilon, rows[2].guarantee.epsilon);
  EXPECT_THROW(CmdAccount(cfg, 1.5, hundred), ConfigError);
}

TEST(Account, MatchesAHandBuiltLedger) {
  dp::DpConfig cfg;
  cfg.sigma = 4.0;
  const std::vector<int> t{100};
  const auto row = CmdAccount(cfg, 0.02, t, 30)[0];
  privacy::PrivacyLedger l;
  for (int i = 1; i <= 100; ++i) {
    privacy::PrivacyEvent s;
    s.kind = privacy::EventKind::kSelection;
    s.q = 0.02;
    s.delta_t = cfg.delta_t;
    l.Add(s);
    if (i <= 30) {
      privacy::PrivacyEvent g;
      g.kind = privacy::EventKind::kGradient;
      g.q = 0.02;
      g.sigma = 4.0;
      l.Add(g);
    }
  }
  EXPECT_DOUBLE_EQ(row.guarantee.epsilon, l.Convert(cfg.delta).epsilon);
}

TEST(Hash, Fnv1aReferenceValues) {
  EXPECT_EQ(Fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(Fnv1a("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(Hex64(0xab), "00000000000000ab");
}

TEST(Train, DeterministicArtifacts) {
  const auto cfg = Tiny();
  const auto a = testing::TempDir("train_a");
  const auto b = testing::TempDir("train_b");
  const auto ra = CmdTrain(cfg, a);
  const auto rb = CmdTrain(cfg, b);
  EXPECT_EQ(ra.rounds_completed, 4);
  EXPECT_EQ(ra.checkpoint_rounds, (std::vector<int>{2, 4}));
  EXPECT_EQ(Slurp(a / "metrics"), Slurp(b / "metrics"));
  EXPECT_EQ(Slurp(a / "rounds.tsv"), Slurp(b / "rounds.tsv"));
  EXPECT_EQ(Slurp(a / "checkpoints/final_client0.fkge"), Slurp(b / "checkpoints/final_client0.fkge"));
  for (const char* f : {"config", "partition", "candidates.tsv", "manifest",
                        "checkpoints/round_2_broadcast.fkge",
                        "checkpoints/round_4_upload_client1.fkge",
                        "checkpoints/round_2_local_client0.fkge", "checkpoints/final_client0.fkge", "attacks/cia_scores_round_2.tsv"}) {
    EXPECT_TRUE(std::filesystem::exists(a / f)) << f;
  }
  EXPECT_EQ(ParseConfig(Slurp(a / "config")), cfg);

  const auto ev = CmdEval(a);
  EXPECT_NEAR(ev.mrr, ra.trained.mrr, 1e-12);
}

TEST(Attack, CommandsOnATinyRun) {
  auto cfg = Tiny();
  const auto dir = testing::TempDir("attack_run");
  CmdTrain(cfg, dir);
  for (const char* kind : {"si", "cip", "cia"}) {
    const auto rep = CmdAttack(dir, kind);
    EXPECT_EQ(rep.kind, kind);
    EXPECT_GE(rep.best_f1, 0.0);
    EXPECT_LE(rep.best_f1, 1.0);
    EXPECT_TRUE(std::filesystem::exists(dir / "attacks" / (std::string(kind) + "_summary")));
  }
  EXPECT_THROW(CmdAttack(dir, "nope"), ArgumentError);
  EXPECT_THROW(CmdAttack(testing::TempDir("no_run"), "si"), std::exception);
}

TEST(Attack, ServerAttackRejectsBilinearModels) {
  auto cfg = Tiny();
  cfg.model = kge::ModelKind::kDistMult;
  const auto dir = testing::TempDir("attack_distmult");
  CmdTrain(cfg, dir);
  EXPECT_THROW(CmdAttack(dir, "si"), UnsupportedModelError);
  const auto cia = CmdAttack(dir, "cia");
  EXPECT_FALSE(cia.warnings.empty());
}

TEST(Train, BudgetExhaustedInFirstRoundAborts) {
  auto cfg = Tiny();
  cfg.defense = true;
  cfg.dp.epsilon_budget = 1.0;
  cfg.local_iters = 5;
  EXPECT_THROW(CmdTrain(cfg, testing::TempDir("tiny_budget")), BudgetExhaustedError);
}

}  // namespace
}  // namespace fkge::harness
