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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "fkge/attacks/attacks.h"
#include "fkge/common/errors.h"
#include "fkge/eval/metrics.h"

namespace fkge::attacks {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// A value strictly between a < b, finite whenever possible.
double Between(double a, double b) {
  if (a == -kInf && b == kInf) return 0.0;
  if (a == -kInf) return b - std::max(1.0, std::abs(b));
  if (b == kInf) return a + std::max(1.0, std::abs(a));
  const double m = a / 2 + b / 2;
  return (m > a && m < b) ? m : b;
}

}  // namespace

AttackTrace SweepThreshold(std::span<const double> statistics, const std::vector<bool>& labels) {
  if (statistics.size() != labels.size()) throw ArgumentError("statistics/labels size mismatch");
  const auto pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw ArgumentError("sweep needs both member and non-member labels");
  for (double s : statistics) {
    if (std::isnan(s)) throw ArgumentError("statistic is NaN");
  }

  // value -> (members, non-members) holding that value
  std::map<double, std::pair<std::size_t, std::size_t>> counts;
  for (std::size_t i = 0; i < statistics.size(); ++i) {
    auto& c = counts[statistics[i]];
    (labels[i] ? c.first : c.second)++;
  }

  AttackTrace tr;
  tr.statistic.assign(statistics.begin(), statistics.end());
  tr.labels = labels;
  std::vector<std::pair<std::size_t, std::size_t>> confusion;  // (tp, fp) per threshold
  auto emit = [&](double tau, std::size_t tp, std::size_t fp) {
    SweepPoint p;
    p.tau = tau;
    p.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    p.recall = static_cast<double>(tp) / static_cast<double>(pos);
    p.f1 = eval::F1(p.precision, p.recall);
    tr.sweep.push_back(p);
    confusion.emplace_back(tp, fp);
  };

  // Ascending thresholds: everything predicted positive first.
  std::size_t tp = pos, fp = neg;
  emit(-kInf, tp, fp);
  for (auto it = counts.begin(); it != counts.end(); ++it) {
    tp -= it->second.first;
    fp -= it->second.second;
    const auto next = std::next(it);
    emit(next == counts.end() ? kInf : Between(it->first, next->first), tp, fp);
  }

  for (auto it = confusion.rbegin(); it != confusion.rend(); ++it) {
    tr.roc.emplace_back(static_cast<double>(it->second) / static_cast<double>(neg),
                        static_cast<double>(it->first) / static_cast<double>(pos));
  }
  double auc = 0.0;
  for (std::size_t i = 1; i < tr.roc.size(); ++i) {
    auc += (tr.roc[i].first - tr.roc[i - 1].first) * (tr.roc[i].second + tr.roc[i - 1].second) / 2;
  }
  tr.auc = auc;
  for (const auto& p : tr.sweep) {
    if (p.f1 > tr.best_f1) {
      tr.best_f1 = p.f1;
      tr.best_tau = p.tau;
    }
  }
  return tr;
}

void WriteTrace(const AttackTrace& trace, std::span<const kg::Candidate> candidates,
                const std::filesystem::path& path) {
  if (candidates.size() != trace.statistic.size()) {
    throw ArgumentError("trace and candidate list differ in length");
  }
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot write " + path.string());
  out << "head\trel\ttail\tlabel\tstatistic\tround\n";
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    out << fmt::format("{}\t{}\t{}\t{}\t{:.17g}\t{}\n", c.head, c.rel, c.tail,
                       trace.labels[i] ? "member" : "non-member", trace.statistic[i], trace.round);
  }
  out << fmt::format("\n[summary]\nbest_f1 = {:.17g}\nbest_tau = {:.17g}\nauc = {:.17g}\n",
                     trace.best_f1, trace.best_tau, trace.auc);
}

void WriteRoc(const AttackTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot write " + path.string());
  out << "fpr,tpr\n";
  for (const auto& [f, t] : trace.roc) out << fmt::format("{:.17g},{:.17g}\n", f, t);
}

}  // namespace fkge::attacks
