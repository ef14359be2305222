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

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "fkge/common/errors.h"
#include "fkge/harness/config.h"
#include "fkge/harness/experiment.h"

namespace fs = std::filesystem;
using namespace fkge;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitBudget = 4;

harness::ExperimentConfig LoadWithOverrides(const std::string& path,
                                            const std::vector<std::string>& sets) {
  harness::ExperimentConfig cfg = path.empty() ? harness::ExperimentConfig{}
                                               : harness::LoadConfig(path);
  for (const auto& s : sets) harness::ApplyOverride(cfg, s);
  harness::ValidateConfig(cfg);
  return cfg;
}

fs::path OutputRoot() {
  if (const char* env = std::getenv("FKGE_OUTPUT_ROOT"); env && *env) return env;
  return "runs";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated knowledge graph embedding: training, inference attacks, DP accounting"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> sets;

  auto* train = app.add_subcommand("train", "train a federation and record attack observables");
  std::string name, out_dir;
  train->add_option("-c,--config", config_path, "config file")->check(CLI::ExistingFile);
  train->add_option("-s,--set", sets, "override, e.g. model.dim=32");
  train->add_option("-n,--name", name, "run name under $FKGE_OUTPUT_ROOT (default runs/)");
  train->add_option("-o,--out", out_dir, "explicit run directory");

  auto* attack = app.add_subcommand("attack", "replay a run through an inference attack");
  std::string run_dir;
  std::string kind = "all";
  attack->add_option("run", run_dir, "run directory")->required()->check(CLI::ExistingDirectory);
  attack->add_option("-a,--attack", kind, "si, cip, cia or all")
      ->check(CLI::IsMember({"si", "cip", "cia", "all"}));

  auto* account = app.add_subcommand("account", "offline privacy accounting");
  std::vector<int> iterations{0, 100};
  double q = -1.0;
  int released = -1;
  account->add_option("-c,--config", config_path, "config file")->check(CLI::ExistingFile);
  account->add_option("-s,--set", sets, "override, e.g. defense.sigma=2");
  account->add_option("-T,--iterations", iterations, "iteration counts")->delimiter(',');
  account->add_option("-q,--rate", q, "sampling rate (default: batch / smallest train split)");
  account->add_option("-r,--released", released,
                      "iterations that release a gradient (default: all)");

  auto* evaluate = app.add_subcommand("eval", "re-evaluate a run's final checkpoints");
  evaluate->add_option("run", run_dir, "run directory")->required()->check(CLI::ExistingDirectory);

  auto* show = app.add_subcommand("config", "print the effective configuration");
  show->add_option("-c,--config", config_path, "config file")->check(CLI::ExistingFile);
  show->add_option("-s,--set", sets, "override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*train) {
      const auto cfg = LoadWithOverrides(config_path, sets);
      fs::path dir = out_dir;
      if (dir.empty()) {
        if (name.empty()) {
          name = "run-" + harness::Hex64(harness::Fnv1a(harness::EmitConfig(cfg))).substr(0, 8);
        }
        dir = OutputRoot() / name;
      }
      const auto rep = harness::CmdTrain(cfg, dir);
      fmt::print("run_dir\t{}\n", dir.string());
      fmt::print("rounds\t{}{}\n", rep.rounds_completed,
                 rep.halted ? fmt::format(" (budget reached at round {}, iteration {})",
                                          rep.halt_round, rep.halt_iteration)
                            : "");
      fmt::print("mrr\t{:.4f}\thits1\t{:.4f}\thits10\t{:.4f}\n", rep.trained.mrr, rep.trained.hits1,
                 rep.trained.hits10);
      fmt::print("random_mrr\t{:.4f}\n", rep.random.mrr);
      if (rep.privacy) {
        fmt::print("epsilon\t{:.4f}\tdelta_total\t{:.3g}\n", rep.privacy->epsilon,
                   rep.privacy->delta_total);
      }
    } else if (*attack) {
      std::vector<std::string> kinds =
          kind == "all" ? std::vector<std::string>{"si", "cip", "cia"} : std::vector<std::string>{kind};
      for (const auto& k : kinds) {
        try {
          const auto rep = harness::CmdAttack(run_dir, k);
          for (const auto& w : rep.warnings) fmt::print(stderr, "warning: {}: {}\n", k, w);
          fmt::print("{}\tbest_f1\t{:.4f}\tround\t{}\tauc\t{:.4f}\n", k, rep.best_f1,
                     rep.best_round, rep.auc);
        } catch (const UnsupportedModelError& e) {
          if (kind != "all") throw;
          fmt::print(stderr, "skipping {}: {}\n", k, e.what());
        }
      }
    } else if (*account) {
      auto cfg = LoadWithOverrides(config_path, sets);
      if (q < 0.0) {
        const auto f = harness::BuildFederation(cfg);
        std::size_t smallest = 0;
        for (const auto& c : f.partition.clients) {
          if (smallest == 0 || c.train.size() < smallest) smallest = c.train.size();
        }
        q = std::min(1.0, cfg.batch_size / static_cast<double>(smallest));
      }
      const auto rows = harness::CmdAccount(
          cfg.dp, q, iterations, released >= 0 ? std::optional<int>(released) : std::nullopt);
      fmt::print("# q = {:.6g}, lemma1_denominator = {}\n", q,
                 privacy::Lemma1DenominatorName(cfg.dp.lemma1));
      fmt::print("iterations\tepsilon\tdelta_total\talpha\n");
      for (const auto& r : rows) {
        fmt::print("{}\t{:.6g}\t{:.6g}\t{:.6g}\n", r.iterations, r.guarantee.epsilon,
                   r.guarantee.delta_total, r.guarantee.alpha);
      }
    } else if (*evaluate) {
      const auto lp = harness::CmdEval(run_dir);
      fmt::print("mrr\t{:.4f}\thits1\t{:.4f}\thits3\t{:.4f}\thits10\t{:.4f}\tqueries\t{}\n", lp.mrr,
                 lp.hits1, lp.hits3, lp.hits10, lp.queries);
    } else if (*show) {
      std::cout << harness::EmitConfig(LoadWithOverrides(config_path, sets));
    }
  } catch (const BudgetExhaustedError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitBudget;
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kExitConfig;
  } catch (const ArgumentError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitConfig;
  } catch (const ParseError& e) {
    fmt::print(stderr, "parse error: {}\n", e.what());
    return kExitConfig;
  } catch (const UnsupportedModelError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitRuntime;
  }
  return 0;
}
