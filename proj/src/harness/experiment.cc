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

#include "fkge/harness/experiment.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "fkge/common/errors.h"

namespace fkge::harness {

namespace fs = std::filesystem;

std::uint64_t Fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string Hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

namespace {

std::string Num(double d) {
  if (std::isnan(d)) return "nan";
  return fmt::format("{:.17g}", d);
}

std::ofstream OpenOut(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("missing " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path UploadPath(int round, int client) {
  return fs::path("checkpoints") / fmt::format("round_{}_upload_client{}.fkge", round, client);
}
fs::path BroadcastPath(int round) {
  return fs::path("checkpoints") / fmt::format("round_{}_broadcast.fkge", round);
}
fs::path LocalPath(int round, int client) {
  return fs::path("checkpoints") / fmt::format("round_{}_local_client{}.fkge", round, client);
}
fs::path FinalPath(int client) {
  return fs::path("checkpoints") / fmt::format("final_client{}.fkge", client);
}
fs::path CiaScoresPath(int round) {
  return fs::path("attacks") / fmt::format("cia_scores_round_{}.tsv", round);
}

bool Wants(const ExperimentConfig& cfg, std::string_view kind) {
  return std::find(cfg.attacks.begin(), cfg.attacks.end(), kind) != cfg.attacks.end();
}

std::vector<std::uint32_t> HeldRows(const fed::ServerState& server, int client) {
  std::vector<std::uint32_t> rows;
  for (std::size_t r = 0; r < server.holders.size(); ++r) {
    const auto& h = server.holders[r];
    if (std::find(h.begin(), h.end(), client) != h.end()) rows.push_back(static_cast<std::uint32_t>(r));
  }
  return rows;
}

// Writes the observables of attack rounds, keeping the latest round in
// memory so the final round can be flushed after training stops.
class CheckpointHook : public fed::RoundHook {
 public:
  CheckpointHook(const ExperimentConfig& cfg, fs::path run_dir)
      : cfg_(cfg), dir_(std::move(run_dir)) {}

  void OnRound(const fed::RoundView& v) override {
    last_round_ = v.round;
    last_uploads_ = v.uploads;
    last_broadcast_ = v.broadcast;
    for (const auto& c : v.clients) {
      if (c.data.client_id == cfg_.adversary) last_local_ = c.store;
    }
    if (v.round % cfg_.attack_every == 0) Flush();
  }

  void FlushFinal() {
    if (last_round_ > 0 && (written_.empty() || written_.back().round != last_round_)) Flush();
  }

  struct Entry {
    int round;
    int client;  // -1 for the server broadcast
    std::string kind;
    fs::path path;
  };
  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<int> rounds() const {
    std::vector<int> out;
    for (const auto& w : written_) out.push_back(w.round);
    return out;
  }

 private:
  struct Written {
    int round;
  };

  void Flush() {
    const auto model = cfg_.model;
    for (const auto& [client, upload] : last_uploads_) {
      const auto rel = UploadPath(last_round_, client);
      kge::WriteEntityCheckpoint(model, cfg_.dim, upload, dir_ / rel);
      entries_.push_back({last_round_, client, "upload", rel});
    }
    const auto b = BroadcastPath(last_round_);
    kge::WriteEntityCheckpoint(model, cfg_.dim, last_broadcast_, dir_ / b);
    entries_.push_back({last_round_, -1, "broadcast", b});
    const auto l = LocalPath(last_round_, cfg_.adversary);
    kge::WriteCheckpoint(last_local_, dir_ / l);
    entries_.push_back({last_round_, cfg_.adversary, "local", l});
    written_.push_back({last_round_});
  }

  const ExperimentConfig& cfg_;
  fs::path dir_;
  int last_round_ = 0;
  std::map<int, Matrix> last_uploads_;
  Matrix last_broadcast_;
  kge::EmbeddingStore last_local_;
  std::vector<Entry> entries_;
  std::vector<Written> written_;
};

// Active attack: the adversary negates the candidate tails in its upload at
// each attack round and scores the candidates on the broadcast right after
// (s1) and `cia_gap` rounds later (s2).
class CiaHook : public fed::RoundHook {
 public:
  CiaHook(const ExperimentConfig& cfg, const fed::ServerState& server,
          const kg::CandidateSet& candidates)
      : cfg_(cfg), server_(server), candidates_(candidates) {
    held_.assign(server.E.rows(), false);
    for (auto r : HeldRows(server, cfg.adversary)) held_[r] = true;
    std::set<std::uint32_t> targets;
    for (const auto& c : candidates.candidates) {
      if (auto t = server.entities.Find(c.tail); t && held_[*t]) targets.insert(*t);
    }
    targets_.assign(targets.begin(), targets.end());
  }

  bool IsAttackRound(int round) const {
    return round % cfg_.attack_every == 0 && round + cfg_.cia_gap <= cfg_.rounds;
  }
  int LastRoundNeeded() const {
    int last = 0;
    for (int k = 1; k <= cfg_.rounds; ++k) {
      if (IsAttackRound(k)) last = k + cfg_.cia_gap;
    }
    return last;
  }

  void OnUpload(int round, const fed::ClientState& client, Matrix& upload) override {
    if (client.data.client_id != cfg_.adversary || !IsAttackRound(round)) return;
    upload = attacks::CiaReverse(upload, targets_, held_);
  }

  void OnRound(const fed::RoundView& v) override {
    const fed::ClientState* adv = nullptr;
    for (const auto& c : v.clients) {
      if (c.data.client_id == cfg_.adversary) adv = &c;
    }
    if (adv == nullptr) return;
    if (IsAttackRound(v.round)) {
      Pending p;
      p.model = adv->store;
      p.s1 = Scores(v.broadcast, p.model, *adv);
      pending_.emplace(v.round + cfg_.cia_gap, Attack{v.round, std::move(p)});
    }
    auto it = pending_.find(v.round);
    if (it != pending_.end()) {
      auto& a = it->second;
      Result r;
      r.round = a.round;
      r.s1 = std::move(a.pending.s1);
      r.s2 = Scores(v.broadcast, a.pending.model, *adv);
      results_.push_back(std::move(r));
      pending_.erase(it);
    }
  }

  struct Result {
    int round = 0;
    std::vector<std::optional<double>> s1, s2;
  };
  const std::vector<Result>& results() const { return results_; }

 private:
  struct Pending {
    kge::EmbeddingStore model;
    std::vector<std::optional<double>> s1;
  };
  struct Attack {
    int round;
    Pending pending;
  };

  std::vector<std::optional<double>> Scores(const Matrix& broadcast,
                                            const kge::EmbeddingStore& model,
                                            const fed::ClientState& adv) const {
    attacks::CiaObservables obs{broadcast, &model, &adv.data.graph.relations(),
                                &server_.entities};
    return attacks::CiaScores(obs, candidates_.candidates);
  }

  const ExperimentConfig& cfg_;
  const fed::ServerState& server_;
  const kg::CandidateSet& candidates_;
  std::vector<bool> held_;
  std::vector<std::uint32_t> targets_;
  std::map<int, Attack> pending_;
  std::vector<Result> results_;
};

void WriteCandidates(const kg::CandidateSet& set, const fs::path& path) {
  auto out = OpenOut(path);
  for (const auto& c : set.candidates) {
    out << c.head << '\t' << c.rel << '\t' << c.tail << '\t' << (c.member ? 1 : 0) << '\n';
  }
}

std::string SettingName(const ExperimentConfig& cfg) {
  if (!cfg.defense) return "fkge";
  return cfg.dp.adaptive ? "dp-flames-adp" : "dp-flames";
}

void WriteMetricsRow(std::ostream& out, const ExperimentConfig& cfg, std::string_view setting,
                     const eval::LinkPrediction& lp, std::optional<double> eps) {
  out << kge::ModelName(cfg.model) << '\t' << setting << '\t' << Num(lp.mrr) << '\t'
      << Num(lp.hits1) << '\t' << Num(lp.hits10) << '\t'
      << (eps ? Num(*eps) : std::string("inf")) << '\n';
}

// Rounds listed in the manifest's checkpoint table.
std::vector<int> CheckpointRounds(const fs::path& run_dir) {
  std::istringstream in(ReadFile(run_dir / "manifest"));
  std::string line;
  bool table = false;
  std::set<int> rounds;
  while (std::getline(in, line)) {
    if (line == "[checkpoints]") {
      table = true;
      std::getline(in, line);  // header
      continue;
    }
    if (!table || line.empty()) continue;
    if (line.front() == '[') break;
    std::istringstream row(line);
    int round = 0;
    row >> round;
    rounds.insert(round);
  }
  return {rounds.begin(), rounds.end()};
}

}  // namespace

Federation BuildFederation(const ExperimentConfig& cfg) {
  ValidateConfig(cfg);
  Federation f;
  if (cfg.source == "synthetic") {
    auto syn = kg::GenerateSynthetic(cfg.n_entities, cfg.n_relations, cfg.n_triples,
                                     DeriveSeed(cfg.seed, {0xda7a}));
    f.source = std::move(syn.graph);
    f.aux = std::move(syn.aux);
  } else {
    std::optional<fs::path> ev, rv;
    if (!cfg.entity_vocab.empty()) ev = cfg.entity_vocab;
    if (!cfg.relation_vocab.empty()) rv = cfg.relation_vocab;
    f.source = kg::LoadTriples(cfg.triples_path, ev, rv).graph;
  }
  f.partition = kg::PartitionFederated(
      f.source, cfg.clients, cfg.overlap_frac,
      kg::SplitFractions{cfg.train_frac, cfg.valid_frac, cfg.test_frac},
      DeriveSeed(cfg.seed, {0x9a27}));

  const auto& victim = f.partition.clients.at(cfg.victim);
  std::vector<kg::EntityId> pool;
  for (std::size_t i = 0; i < victim.global_entity.size(); ++i) {
    const auto& h = f.partition.holders[victim.global_entity[i]];
    if (std::find(h.begin(), h.end(), cfg.adversary) != h.end()) {
      pool.push_back(static_cast<kg::EntityId>(i));
    }
  }
  std::vector<bool> in_pool(victim.graph.num_entities(), false);
  for (auto e : pool) in_pool[e] = true;
  for (const auto& t : victim.train) {
    if (in_pool[t.head] && in_pool[t.tail]) ++f.eligible_members;
  }
  const std::size_t n = std::min(cfg.candidates / 2, f.eligible_members);
  if (n == 0) {
    throw GenerationError("victim and adversary share no training triple to use as a candidate");
  }
  kg::CandidateOptions opts;
  opts.entity_pool = pool;
  opts.exclude = &f.source;
  f.candidates = kg::BuildCandidateSet(victim, n, n, DeriveSeed(cfg.seed, {0xca4d}), opts);
  return f;
}

fed::TrainParams MakeTrainParams(const ExperimentConfig& cfg) {
  fed::TrainParams p;
  p.loss.gamma = cfg.gamma;
  p.loss.n_neg = cfg.n_neg;
  p.loss.adv_temp = cfg.adv_temp;
  p.loss.margin = cfg.margin;
  p.optimizer = cfg.optimizer;
  p.lr = cfg.lr;
  p.batch_size = cfg.batch_size;
  p.local_iters = cfg.local_iters;
  return p;
}

fed::ServerState MakeServer(const ExperimentConfig& cfg, const Federation& f) {
  return fed::AlignEntities(f.partition.clients, cfg.model, cfg.dim, cfg.seed);
}

std::vector<fed::ClientState> MakeClients(const ExperimentConfig& cfg, const Federation& f,
                                          const fed::ServerState& server) {
  const auto params = MakeTrainParams(cfg);
  std::vector<fed::ClientState> out;
  for (const auto& data : f.partition.clients) {
    auto c = fed::MakeClient(data, server, params, cfg.seed);
    c.ledger = privacy::PrivacyLedger(privacy::DefaultAlphaGrid(), cfg.dp.lemma1);
    if (data.client_id == cfg.adversary) c.role = fed::Role::kAdversary;
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<kge::EmbeddingStore> MergedStores(std::span<const fed::ClientState> clients,
                                              const Matrix& entities) {
  std::vector<kge::EmbeddingStore> out;
  out.reserve(clients.size());
  for (const auto& c : clients) {
    kge::EmbeddingStore s = c.store;
    for (std::size_t i = 0; i < c.global_row.size(); ++i) {
      s.entities().SetRow(i, entities.row(c.global_row[i]));
    }
    out.push_back(std::move(s));
  }
  return out;
}

eval::LinkPrediction EvaluateClients(std::span<const fed::ClientState> clients,
                                     std::span<const kge::EmbeddingStore> stores) {
  eval::LinkPrediction total;
  for (std::size_t i = 0; i < clients.size(); ++i) {
    if (clients[i].data.test.empty()) continue;
    const auto lp = eval::EvaluateLinkPrediction(stores[i], clients[i].data.test,
                                                 clients[i].data.graph);
    const double w = static_cast<double>(lp.queries);
    total.mrr += w * lp.mrr;
    total.hits1 += w * lp.hits1;
    total.hits3 += w * lp.hits3;
    total.hits10 += w * lp.hits10;
    total.queries += lp.queries;
  }
  if (total.queries == 0) throw ArgumentError("no client has a test split to evaluate");
  const double n = static_cast<double>(total.queries);
  total.mrr /= n;
  total.hits1 /= n;
  total.hits3 /= n;
  total.hits10 /= n;
  return total;
}

TrainReport CmdTrain(const ExperimentConfig& cfg, const fs::path& run_dir) {
  const Federation f = BuildFederation(cfg);
  fs::create_directories(run_dir / "checkpoints");
  fs::create_directories(run_dir / "attacks");

  const std::string config_text = EmitConfig(cfg);
  OpenOut(run_dir / "config") << config_text;
  kg::WritePartitionManifest(f.partition, run_dir / "partition");
  WriteCandidates(f.candidates, run_dir / "candidates.tsv");

  fed::RunOptions opts;
  opts.rounds = cfg.rounds;
  opts.train = MakeTrainParams(cfg);
  if (cfg.defense) opts.defense = cfg.dp;

  TrainReport report;
  report.run_dir = run_dir;

  fed::ServerState server = MakeServer(cfg, f);
  std::vector<fed::ClientState> clients = MakeClients(cfg, f, server);
  {
    const auto init = MergedStores(clients, server.E);
    report.random = EvaluateClients(clients, init);
  }

  CheckpointHook ckpt(cfg, run_dir);
  fed::RoundHook* hooks[] = {&ckpt};
  const fed::FkgeResult result = fed::RunFkge(server, clients, opts, hooks, cfg.seed);
  ckpt.FlushFinal();

  report.rounds_completed = result.rounds_completed;
  report.halted = result.halted;
  report.halt_round = result.halt_round;
  report.halt_iteration = result.halt_iteration;
  report.checkpoint_rounds = ckpt.rounds();

  const auto final_stores = MergedStores(clients, result.final_entities);
  report.trained = EvaluateClients(clients, final_stores);
  for (std::size_t i = 0; i < clients.size(); ++i) {
    kge::WriteCheckpoint(final_stores[i], run_dir / FinalPath(clients[i].data.client_id));
  }

  if (cfg.defense) {
    std::size_t worst = 0;
    for (std::size_t i = 0; i < clients.size(); ++i) {
      const auto g = clients[i].ledger.Convert(cfg.dp.delta);
      privacy::WriteLedger(clients[i].ledger, cfg.dp.delta,
                           run_dir / fmt::format("ledger_client{}", clients[i].data.client_id));
      if (!report.privacy || g.epsilon > report.privacy->epsilon) {
        report.privacy = g;
        worst = i;
      }
      for (const auto& e : clients[i].ledger.events()) {
        (e.kind == privacy::EventKind::kSelection ? report.selection_events
                                                  : report.gradient_events)++;
      }
    }
    privacy::WriteLedger(clients[worst].ledger, cfg.dp.delta, run_dir / "ledger");
  }

  // Per-round training curves.
  {
    auto out = OpenOut(run_dir / "rounds.tsv");
    out << "round\tclient\tvalid_mrr\tloss\n";
    for (const auto& rec : result.history) {
      for (const auto& [c, m] : rec.mrr) {
        out << rec.round << '\t' << c << '\t' << Num(m) << '\t' << Num(rec.loss.at(c)) << '\n';
      }
    }
  }

  if (Wants(cfg, "cia")) {
    fed::ServerState cia_server = MakeServer(cfg, f);
    std::vector<fed::ClientState> cia_clients = MakeClients(cfg, f, cia_server);
    CiaHook cia(cfg, cia_server, f.candidates);
    const int last = cia.LastRoundNeeded();
    if (last > 0) {
      fed::RunOptions copts = opts;
      copts.rounds = last;
      copts.keep_history = false;
      fed::RoundHook* chooks[] = {&cia};
      try {
        fed::RunFkge(cia_server, cia_clients, copts, chooks, cfg.seed);
      } catch (const BudgetExhaustedError&) {
        // Same stream as the main run, which already completed round 1.
      }
      for (const auto& r : cia.results()) {
        auto out = OpenOut(run_dir / CiaScoresPath(r.round));
        out << "head\trel\ttail\tlabel\ts1\ts2\n";
        for (std::size_t i = 0; i < f.candidates.candidates.size(); ++i) {
          const auto& c = f.candidates.candidates[i];
          out << c.head << '\t' << c.rel << '\t' << c.tail << '\t' << (c.member ? 1 : 0) << '\t'
              << (r.s1[i] ? Num(*r.s1[i]) : "nan") << '\t' << (r.s2[i] ? Num(*r.s2[i]) : "nan")
              << '\n';
        }
      }
    }
  }

  {
    auto out = OpenOut(run_dir / "metrics");
    out << "model\tsetting\tmrr\thits1\thits10\tepsilon\n";
    WriteMetricsRow(out, cfg, SettingName(cfg), report.trained,
                    report.privacy ? std::optional<double>(report.privacy->epsilon)
                                   : std::nullopt);
    WriteMetricsRow(out, cfg, "random", report.random, std::nullopt);
    out << "\n[notes]\nranking = filtered, pessimistic ties, head and tail\n";
  }

  {
    auto out = OpenOut(run_dir / "manifest");
    out << "[run]\n";
    out << "version = " << kVersion << '\n';
    out << "seed = " << cfg.seed << '\n';
    out << "config_fnv1a64 = " << Hex64(Fnv1a(config_text)) << '\n';
    out << "rounds_completed = " << report.rounds_completed << '\n';
    out << "halted = " << (report.halted ? "true" : "false") << '\n';
    out << "halt_round = " << report.halt_round << '\n';
    out << "halt_iteration = " << report.halt_iteration << '\n';
    out << "candidates = " << f.candidates.candidates.size() << '\n';
    out << "candidate_members = " << f.candidates.num_members() << '\n';
    out << "\n[checkpoints]\nround\tclient\tkind\tpath\tvalid_mrr\n";
    std::map<int, const fed::RoundRecord*> by_round;
    for (const auto& rec : result.history) by_round[rec.round] = &rec;
    for (const auto& e : ckpt.entries()) {
      std::string mrr = "nan";
      if (e.client >= 0) {
        if (auto it = by_round.find(e.round); it != by_round.end()) {
          mrr = Num(it->second->mrr.at(e.client));
        }
      }
      out << e.round << '\t' << (e.client < 0 ? std::string("server") : std::to_string(e.client))
          << '\t' << e.kind << '\t' << e.path.generic_string() << '\t' << mrr << '\n';
    }
  }
  return report;
}

namespace {

struct RoundObservation {
  int round = 0;
  std::vector<std::optional<double>> stats;
};

std::vector<std::optional<double>> ReadCiaRatios(const fs::path& path) {
  std::istringstream in(ReadFile(path));
  std::string line;
  std::getline(in, line);
  std::vector<std::optional<double>> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, '\t')) cols.push_back(col);
    if (cols.size() != 6) throw ParseError("malformed CIA score row", out.size() + 2);
    if (cols[4] == "nan" || cols[5] == "nan") {
      out.emplace_back();
      continue;
    }
    out.emplace_back(attacks::RatioStatistic(std::stod(cols[4]), std::stod(cols[5])));
  }
  return out;
}

}  // namespace

AttackReport CmdAttack(const fs::path& run_dir, const std::string& kind) {
  if (kind != "si" && kind != "cip" && kind != "cia") {
    throw ArgumentError("unknown attack '" + kind + "' (si, cip, cia)");
  }
  const ExperimentConfig cfg = LoadConfig(run_dir / "config");
  const Federation f = BuildFederation(cfg);
  const fed::ServerState server = MakeServer(cfg, f);
  const auto& cands = f.candidates.candidates;

  AttackReport rep;
  rep.kind = kind;
  std::vector<RoundObservation> obs;

  if (kind == "si") {
    if (!kge::IsTranslational(cfg.model)) {
      throw UnsupportedModelError("the server-side attack only applies to translational models");
    }
    if (!f.aux) throw ArgumentError("the server-side attack needs an auxiliary schema");
    const auto victim_rows = HeldRows(server, cfg.victim);
    for (int round : CheckpointRounds(run_dir)) {
      const auto upload = kge::ReadCheckpoint(run_dir / UploadPath(round, cfg.victim));
      attacks::SiObservables o;
      o.victim_upload = upload.entities();
      o.victim_rows = victim_rows;
      o.entity_names = &server.entities;
      o.aux = &*f.aux;
      o.model = cfg.model;
      o.dim = cfg.dim;
      o.n_relations = f.source.num_relations();
      const std::optional<std::size_t> cap =
          cfg.si_cap > 0 ? std::optional<std::size_t>(cfg.si_cap) : std::nullopt;
      const auto decisions =
          attacks::SiAttack(o, cands, cap, DeriveSeed(cfg.seed, {0x51, static_cast<std::uint64_t>(round)}),
                            cfg.si_quantile);
      RoundObservation ro{round, {}};
      for (const auto& d : decisions) {
        if (d.no_aux) ++rep.no_aux;
        ro.stats.push_back(d.evaluable ? std::optional<double>(d.exist ? 1.0 : 0.0) : std::nullopt);
      }
      obs.push_back(std::move(ro));
    }
  } else if (kind == "cip") {
    const auto& adv = f.partition.clients.at(cfg.adversary);
    std::vector<bool> held(server.holders.size(), false);
    for (auto r : HeldRows(server, cfg.adversary)) held[r] = true;
    for (int round : CheckpointRounds(run_dir)) {
      const auto own = kge::ReadCheckpoint(run_dir / UploadPath(round, cfg.adversary));
      const auto bc = kge::ReadCheckpoint(run_dir / BroadcastPath(round));
      const auto local = kge::ReadCheckpoint(run_dir / LocalPath(round, cfg.adversary));
      attacks::CipObservables o{own.entities(), bc.entities(), cfg.clients, &local,
                                &adv.graph.relations(), &server.entities, held};
      obs.push_back({round, attacks::CipAttack(o, cands)});
    }
  } else {
    if (!kge::IsTranslational(cfg.model)) {
      rep.warnings.push_back(
          "bilinear score functions barely react to a reversed tail; expect a weak signal");
    }
    std::vector<int> rounds;
    for (int k = 1; k <= cfg.rounds; ++k) {
      if (fs::exists(run_dir / CiaScoresPath(k))) rounds.push_back(k);
    }
    if (rounds.empty()) {
      throw ArgumentError("run has no recorded active-attack scores (attacks/cia_scores_round_*.tsv)");
    }
    for (int k : rounds) obs.push_back({k, ReadCiaRatios(run_dir / CiaScoresPath(k))});
  }

  if (obs.empty()) throw ArgumentError("run has no checkpointed rounds");

  bool any = false;
  for (const auto& ro : obs) {
    if (ro.stats.size() != cands.size()) throw ArgumentError("observation count mismatch");
    std::vector<double> stats;
    std::vector<bool> labels;
    std::vector<kg::Candidate> used;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      if (!ro.stats[i]) {
        ++rep.not_evaluable;
        continue;
      }
      stats.push_back(*ro.stats[i]);
      labels.push_back(cands[i].member);
      used.push_back(cands[i]);
    }
    const auto pos = std::count(labels.begin(), labels.end(), true);
    if (pos == 0 || pos == static_cast<std::ptrdiff_t>(labels.size())) continue;
    auto trace = attacks::SweepThreshold(stats, labels);
    trace.round = ro.round;
    attacks::WriteTrace(trace, used,
                        run_dir / "attacks" / fmt::format("{}_round_{}.tsv", kind, ro.round));
    if (!any || trace.best_f1 > rep.best_f1) {
      rep.best_f1 = trace.best_f1;
      rep.best_round = trace.round;
      rep.auc = trace.auc;
      attacks::WriteRoc(trace, run_dir / "attacks" / fmt::format("{}_roc.csv", kind));
    }
    any = true;
    rep.traces.push_back(std::move(trace));
  }
  if (!any) {
    // Nothing to threshold: the best an attacker can do is answer "member".
    rep.fallback = true;
    const double p = static_cast<double>(f.candidates.num_members()) / static_cast<double>(cands.size());
    rep.best_f1 = 2.0 * p / (p + 1.0);
    rep.auc = 0.5;
    rep.warnings.push_back("no round had evaluable members and non-members; reporting the all-member F1");
  }

  auto out = OpenOut(run_dir / "attacks" / fmt::format("{}_summary", kind));
  out << "[summary]\n";
  out << "attack = " << kind << '\n';
  out << "best_f1 = " << Num(rep.best_f1) << '\n';
  out << "best_round = " << rep.best_round << '\n';
  out << "auc = " << Num(rep.auc) << '\n';
  out << "rounds = " << rep.traces.size() << '\n';
  out << "not_evaluable = " << rep.not_evaluable << '\n';
  if (kind == "si") out << "no_aux = " << rep.no_aux << '\n';
  out << "fallback = " << (rep.fallback ? "true" : "false") << '\n';
  out << "\n[rounds]\nround\tbest_f1\tbest_tau\tauc\n";
  for (const auto& t : rep.traces) {
    out << t.round << '\t' << Num(t.best_f1) << '\t' << Num(t.best_tau) << '\t' << Num(t.auc) << '\n';
  }
  for (const auto& w : rep.warnings) out << "# warning: " << w << '\n';
  return rep;
}

std::vector<AccountRow> CmdAccount(const dp::DpConfig& cfg, double q,
                                   std::span<const int> iterations,
                                   std::optional<int> released) {
  dp::ValidateDpConfig(cfg);
  if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("sampling rate must lie in [0, 1]");
  std::vector<int> sorted(iterations.begin(), iterations.end());
  for (int t : sorted) {
    if (t < 0) throw ConfigError("iteration counts must be >= 0");
  }
  std::vector<AccountRow> out;
  for (int target : sorted) {
    privacy::PrivacyLedger ledger(privacy::DefaultAlphaGrid(), cfg.lemma1);
    for (int i = 1; i <= target; ++i) {
      privacy::PrivacyEvent sel;
      sel.iter = i;
      sel.kind = privacy::EventKind::kSelection;
      sel.q = q;
      sel.sigma_r = cfg.sigma_r;
      sel.sigma_p = cfg.sigma_p;
      sel.delta_t = cfg.delta_t;
      ledger.Add(sel);
      if (!released || i <= *released) {
        privacy::PrivacyEvent g;
        g.iter = i;
        g.kind = privacy::EventKind::kGradient;
        g.q = q;
        g.sigma = cfg.sigma;
        ledger.Add(g);
      }
    }
    out.push_back({target, ledger.Convert(cfg.delta)});
  }
  return out;
}

eval::LinkPrediction CmdEval(const fs::path& run_dir) {
  const ExperimentConfig cfg = LoadConfig(run_dir / "config");
  const Federation f = BuildFederation(cfg);
  const fed::ServerState server = MakeServer(cfg, f);
  const auto clients = MakeClients(cfg, f, server);
  std::vector<kge::EmbeddingStore> stores;
  for (const auto& c : clients) {
    stores.push_back(kge::ReadCheckpoint(run_dir / FinalPath(c.data.client_id)));
  }
  const auto lp = EvaluateClients(clients, stores);
  auto out = OpenOut(run_dir / "eval");
  out << "model\tsetting\tmrr\thits1\thits3\thits10\tqueries\n";
  out << kge::ModelName(cfg.model) << '\t' << SettingName(cfg) << '\t' << Num(lp.mrr) << '\t'
      << Num(lp.hits1) << '\t' << Num(lp.hits3) << '\t' << Num(lp.hits10) << '\t' << lp.queries
      << '\n';
  return lp;
}

}  // namespace fkge::harness
