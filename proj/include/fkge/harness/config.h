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

#ifndef FKGE_HARNESS_CONFIG_H_
#define FKGE_HARNESS_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fkge/dp/dp_flames.h"
#include "fkge/kge/embedding_store.h"
#include "fkge/kge/optimizer.h"
#include "fkge/kge/scoring.h"

namespace fkge::harness {

// Every experiment default lives here and nowhere else.
struct ExperimentConfig {
  // [dataset]
  std::string source = "synthetic";  // synthetic | files
  std::size_t n_entities = 300;
  std::size_t n_relations = 12;
  std::size_t n_triples = 4000;
  std::string triples_path;
  std::string entity_vocab;
  std::string relation_vocab;

  // [federation]
  int clients = 3;
  double overlap_frac = 0.3;
  double train_frac = 0.8;
  double valid_frac = 0.1;
  double test_frac = 0.1;
  int rounds = 50;

  // [model]
  kge::ModelKind model = kge::ModelKind::kTransE;
  std::size_t dim = 128;
  double gamma = 10.0;
  double adv_temp = 1.0;
  std::size_t n_neg = 256;
  kge::MarginConvention margin = kge::MarginConvention::kDistance;

  // [training]
  kge::OptimizerKind optimizer = kge::OptimizerKind::kAdam;
  double lr = 0.001;
  double batch_size = 64.0;
  int local_iters = 1;

  // [defense]
  bool defense = false;
  dp::DpConfig dp;

  // [attack]
  std::vector<std::string> attacks = {"si", "cip", "cia"};
  int attack_every = 5;
  int adversary = 0;
  int victim = 1;
  std::size_t candidates = 200;  // total, balanced
  int cia_gap = 1;
  std::size_t si_cap = 0;  // 0 = every ordered pair
  double si_quantile = 0.5;

  // [run]
  std::uint64_t seed = 1;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

void ValidateConfig(const ExperimentConfig& c);

// `[section]` headers and `key = value` lines; `#` starts a comment.
ExperimentConfig ParseConfig(const std::string& text);
ExperimentConfig LoadConfig(const std::filesystem::path& path);
std::string EmitConfig(const ExperimentConfig& c);

// Applies one `section.key=value` override.
void ApplyOverride(ExperimentConfig& c, const std::string& assignment);

}  // namespace fkge::harness

#endif  // FKGE_HARNESS_CONFIG_H_
