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

#include "fkge/harness/config.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "fkge/common/errors.h"

namespace fkge::harness {

namespace {

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double ToDouble(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  }
}

template <typename Int>
Int ToInt(const std::string& key, const std::string& v) {
  Int out{};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError("'" + key + "' expects an integer, got '" + v + "'");
  }
  return out;
}

bool ToBool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + v + "'");
}

std::string Num(double d) { return fmt::format("{:.17g}", d); }

struct Field {
  std::string section;
  std::string key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

#define FKGE_DOUBLE(sec, name, member)                                            \
  Field{sec, name, [](const ExperimentConfig& c) { return Num(c.member); },       \
        [](ExperimentConfig& c, const std::string& v) { c.member = ToDouble(name, v); }}
#define FKGE_INT(sec, name, member)                                                     \
  Field{sec, name, [](const ExperimentConfig& c) { return std::to_string(c.member); }, \
        [](ExperimentConfig& c, const std::string& v) {                                 \
          c.member = ToInt<decltype(c.member)>(name, v);                                \
        }}
#define FKGE_STR(sec, name, member)                                 \
  Field{sec, name, [](const ExperimentConfig& c) { return c.member; }, \
        [](ExperimentConfig& c, const std::string& v) { c.member = v; }}
#define FKGE_BOOL(sec, name, member)                                                     \
  Field{sec, name, [](const ExperimentConfig& c) { return std::string(c.member ? "true" : "false"); }, \
        [](ExperimentConfig& c, const std::string& v) { c.member = ToBool(name, v); }}

const std::vector<Field>& Fields() {
  static const std::vector<Field> fields = {
      FKGE_STR("dataset", "source", source),
      FKGE_INT("dataset", "entities", n_entities),
      FKGE_INT("dataset", "relations", n_relations),
      FKGE_INT("dataset", "triples", n_triples),
      FKGE_STR("dataset", "triples_path", triples_path),
      FKGE_STR("dataset", "entity_vocab", entity_vocab),
      FKGE_STR("dataset", "relation_vocab", relation_vocab),

      FKGE_INT("federation", "clients", clients),
      FKGE_DOUBLE("federation", "overlap_frac", overlap_frac),
      FKGE_DOUBLE("federation", "train_frac", train_frac),
      FKGE_DOUBLE("federation", "valid_frac", valid_frac),
      FKGE_DOUBLE("federation", "test_frac", test_frac),
      FKGE_INT("federation", "rounds", rounds),

      Field{"model", "model",
            [](const ExperimentConfig& c) { return std::string(kge::ModelName(c.model)); },
            [](ExperimentConfig& c, const std::string& v) {
              try {
                c.model = kge::ParseModel(v);
              } catch (const ArgumentError& e) {
                throw ConfigError(e.what());
              }
            }},
      FKGE_INT("model", "dim", dim),
      FKGE_DOUBLE("model", "gamma", gamma),
      FKGE_DOUBLE("model", "adv_temp", adv_temp),
      FKGE_INT("model", "n_neg", n_neg),
      Field{"model", "margin",
            [](const ExperimentConfig& c) {
              return std::string(c.margin == kge::MarginConvention::kDistance ? "distance"
                                                                              : "verbatim");
            },
            [](ExperimentConfig& c, const std::string& v) {
              if (v == "distance") {
                c.margin = kge::MarginConvention::kDistance;
              } else if (v == "verbatim") {
                c.margin = kge::MarginConvention::kVerbatim;
              } else {
                throw ConfigError("margin must be distance or verbatim");
              }
            }},

      Field{"training", "optimizer",
            [](const ExperimentConfig& c) { return std::string(kge::OptimizerName(c.optimizer)); },
            [](ExperimentConfig& c, const std::string& v) {
              try {
                c.optimizer = kge::ParseOptimizer(v);
              } catch (const ArgumentError& e) {
                throw ConfigError(e.what());
              }
            }},
      FKGE_DOUBLE("training", "lr", lr),
      FKGE_DOUBLE("training", "batch_size", batch_size),
      FKGE_INT("training", "local_iters", local_iters),

      FKGE_BOOL("defense", "enabled", defense),
      FKGE_DOUBLE("defense", "sigma", dp.sigma),
      FKGE_DOUBLE("defense", "sigma_r", dp.sigma_r),
      FKGE_DOUBLE("defense", "sigma_p", dp.sigma_p),
      FKGE_DOUBLE("defense", "delta_t", dp.delta_t),
      FKGE_DOUBLE("defense", "c1", dp.c1),
      FKGE_DOUBLE("defense", "c2", dp.c2),
      FKGE_DOUBLE("defense", "eta", dp.eta),
      FKGE_DOUBLE("defense", "delta_mrr", dp.delta_mrr),
      FKGE_DOUBLE("defense", "epsilon", dp.epsilon_budget),
      FKGE_DOUBLE("defense", "delta", dp.delta),
      FKGE_INT("defense", "validation_interval", dp.validation_interval),
      FKGE_BOOL("defense", "adaptive", dp.adaptive),
      FKGE_DOUBLE("defense", "lr", dp.lr),
      Field{"defense", "lemma1_denominator",
            [](const ExperimentConfig& c) {
              return std::string(privacy::Lemma1DenominatorName(c.dp.lemma1));
            },
            [](ExperimentConfig& c, const std::string& v) {
              try {
                c.dp.lemma1 = privacy::ParseLemma1Denominator(v);
              } catch (const ArgumentError& e) {
                throw ConfigError(e.what());
              }
            }},

      Field{"attack", "attacks",
            [](const ExperimentConfig& c) { return fmt::format("{}", fmt::join(c.attacks, ",")); },
            [](ExperimentConfig& c, const std::string& v) {
              c.attacks.clear();
              std::stringstream ss(v);
              std::string item;
              while (std::getline(ss, item, ',')) {
                item = Trim(item);
                if (item.empty()) continue;
                if (item != "si" && item != "cip" && item != "cia") {
                  throw ConfigError("unknown attack '" + item + "'");
                }
                c.attacks.push_back(item);
              }
            }},
      FKGE_INT("attack", "every", attack_every),
      FKGE_INT("attack", "adversary", adversary),
      FKGE_INT("attack", "victim", victim),
      FKGE_INT("attack", "candidates", candidates),
      FKGE_INT("attack", "cia_gap", cia_gap),
      FKGE_INT("attack", "si_cap", si_cap),
      FKGE_DOUBLE("attack", "si_quantile", si_quantile),

      FKGE_INT("run", "seed", seed),
  };
  return fields;
}

#undef FKGE_DOUBLE
#undef FKGE_INT
#undef FKGE_STR
#undef FKGE_BOOL

const Field& FindField(const std::string& section, const std::string& key) {
  for (const auto& f : Fields()) {
    if (f.section == section && f.key == key) return f;
  }
  throw ConfigError("unknown config key '" + section + "." + key + "'");
}

}  // namespace

void ValidateConfig(const ExperimentConfig& c) {
  if (c.source != "synthetic" && c.source != "files") {
    throw ConfigError("dataset.source must be synthetic or files");
  }
  if (c.source == "files" && c.triples_path.empty()) {
    throw ConfigError("dataset.triples_path is required for file datasets");
  }
  if (c.clients < 2) throw ConfigError("federation.clients must be >= 2");
  if (c.rounds < 1) throw ConfigError("federation.rounds must be >= 1");
  if (c.dim < 1) throw ConfigError("model.dim must be >= 1");
  if (!(c.gamma > 0)) throw ConfigError("model.gamma must be positive");
  if (c.n_neg < 1) throw ConfigError("model.n_neg must be >= 1");
  if (!(c.adv_temp >= 0)) throw ConfigError("model.adv_temp must be >= 0");
  if (!(c.lr >= 0)) throw ConfigError("training.lr must be >= 0");
  if (!(c.batch_size > 0)) throw ConfigError("training.batch_size must be positive");
  if (c.local_iters < 0) throw ConfigError("training.local_iters must be >= 0");
  if (c.attack_every < 1) throw ConfigError("attack.every must be >= 1");
  if (c.cia_gap < 1) throw ConfigError("attack.cia_gap must be >= 1");
  if (c.adversary == c.victim) throw ConfigError("adversary and victim must differ");
  if (c.adversary < 0 || c.adversary >= c.clients || c.victim < 0 || c.victim >= c.clients) {
    throw ConfigError("adversary/victim must name existing clients");
  }
  if (c.candidates < 2) throw ConfigError("attack.candidates must be >= 2");
  if (c.defense) dp::ValidateDpConfig(c.dp);
}

ExperimentConfig ParseConfig(const std::string& text) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = Trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("unterminated section header", lineno);
      section = Trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", lineno);
    if (section.empty()) throw ParseError("key outside of any section", lineno);
    const auto key = Trim(std::string_view(line).substr(0, eq));
    const auto value = Trim(std::string_view(line).substr(eq + 1));
    FindField(section, key).set(c, value);
  }
  return c;
}

ExperimentConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseConfig(ss.str());
}

std::string EmitConfig(const ExperimentConfig& c) {
  std::string out;
  std::string section;
  for (const auto& f : Fields()) {
    if (f.section != section) {
      if (!section.empty()) out += "\n";
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += f.key + " = " + f.get(c) + "\n";
  }
  return out;
}

void ApplyOverride(ExperimentConfig& c, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw ConfigError("override must look like section.key=value");
  }
  FindField(Trim(assignment.substr(0, dot)), Trim(assignment.substr(dot + 1, eq - dot - 1)))
      .set(c, Trim(assignment.substr(eq + 1)));
}

}  // namespace fkge::harness
