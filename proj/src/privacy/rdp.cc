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

#include "fkge/privacy/rdp.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include <fmt/format.h>

#include "fkge/common/errors.h"

namespace fkge::privacy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double LogAddExp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

double LogBinomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// log(e^x - 1) for x > 0 without overflow.
double LogExpm1(double x) {
  if (x > 30.0) return x + std::log1p(-std::exp(-x));
  return std::log(std::expm1(x));
}

}  // namespace

Lemma1Denominator ParseLemma1Denominator(std::string_view s) {
  if (s == "sigma") return Lemma1Denominator::kSigma;
  if (s == "sigma_squared") return Lemma1Denominator::kSigmaSquared;
  throw ArgumentError("lemma1_denominator must be sigma or sigma_squared");
}

std::string_view Lemma1DenominatorName(Lemma1Denominator d) {
  return d == Lemma1Denominator::kSigma ? "sigma" : "sigma_squared";
}

bool Lemma1Valid(double q, double sigma, double alpha) {
  if (!(alpha > 1.0) || !(q > 0.0) || !(sigma > 0.0)) return false;
  const double s2 = sigma * sigma;
  const double L = std::log1p(1.0 / (q * (alpha - 1.0)));
  const double bound1 = 0.5 * s2 * L - 2.0 * std::log(sigma);
  const double denom = L + std::log(q * alpha) + 1.0 / (2.0 * s2);
  if (!(denom > 0.0)) return false;
  const double bound2 = (0.5 * s2 * L * L - std::log(5.0) - 2.0 * std::log(sigma)) / denom;
  return alpha <= std::min(bound1, bound2);
}

GaussianRdp RdpGaussianSubsampled(double q, double sigma, double alpha,
                                  Lemma1Denominator denom) {
  const double d = denom == Lemma1Denominator::kSigma ? sigma : sigma * sigma;
  GaussianRdp out;
  out.eps = 2.0 * q * q * alpha / d;
  out.valid = q == 0.0 ? alpha > 1.0 : Lemma1Valid(q, sigma, alpha);
  return out;
}

double RdpSelectionBase(double sigma_r, double sigma_p, double alpha) {
  return alpha / (8.0 * sigma_r * sigma_r) + alpha / (2.0 * sigma_p * sigma_p);
}

double RdpSelectionSubsampled(double q, double sigma_r, double sigma_p, int alpha) {
  if (alpha < 2) throw ArgumentError("subsampled selection needs an integer order >= 2");
  if (q < 0.0 || q > 1.0) throw ArgumentError("sampling rate must lie in [0, 1]");
  if (q == 0.0) return 0.0;
  const double lq = std::log(q);
  const double e2 = RdpSelectionBase(sigma_r, sigma_p, 2.0);
  // e^{eps(inf)} is infinite, so min{2, (e^{eps(inf)} - 1)^j} = 2.
  const double log_min2 = std::min(std::log(4.0) + LogExpm1(e2), e2 + std::log(2.0));
  double acc = 0.0;  // log(1)
  acc = LogAddExp(acc, 2.0 * lq + LogBinomial(alpha, 2) + log_min2);
  for (int j = 3; j <= alpha; ++j) {
    const double ej = RdpSelectionBase(sigma_r, sigma_p, j);
    acc = LogAddExp(acc, j * lq + LogBinomial(alpha, j) + (j - 1) * ej + std::log(2.0));
  }
  return acc / (alpha - 1.0);
}

std::vector<double> DefaultAlphaGrid() {
  std::vector<double> g = {1.25, 1.5, 1.75, 2.0, 2.5};
  for (int a = 3; a <= 64; ++a) g.push_back(a);
  for (double a : {128.0, 256.0, 512.0, 1024.0}) g.push_back(a);
  return g;
}

RdpCurve::RdpCurve(std::vector<double> grid) : alphas(std::move(grid)) {
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 1.0)) throw ArgumentError("RDP orders must exceed 1");
    if (i > 0 && !(alphas[i] > alphas[i - 1])) {
      throw ArgumentError("RDP grid must be strictly increasing");
    }
  }
  eps.assign(alphas.size(), 0.0);
}

bool RdpCurve::empty() const {
  return std::none_of(eps.begin(), eps.end(), [](double e) { return std::isfinite(e); });
}

std::string_view EventKindName(EventKind k) {
  return k == EventKind::kSelection ? "selection" : "gradient";
}

std::vector<double> EventEps(const PrivacyEvent& e, std::span<const double> alphas,
                             Lemma1Denominator denom) {
  std::vector<double> out(alphas.size());
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const double a = alphas[i];
    if (e.kind == EventKind::kGradient) {
      const auto g = RdpGaussianSubsampled(e.q, e.sigma, a, denom);
      out[i] = g.valid ? g.eps : kInf;
    } else {
      const int ia = std::max(2, static_cast<int>(std::ceil(a)));
      out[i] = RdpSelectionSubsampled(e.q, e.sigma_r, e.sigma_p, ia);
    }
  }
  return out;
}

DpGuarantee ToDp(const RdpCurve& curve, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("delta must lie in (0, 1)");
  if (curve.alphas.empty()) throw AccountingError("RDP grid is empty");
  DpGuarantee best{kInf, delta + curve.delta_hat, 0.0};
  const double log_inv = std::log(1.0 / delta);
  for (std::size_t i = 0; i < curve.alphas.size(); ++i) {
    if (!std::isfinite(curve.eps[i])) continue;
    const double v = curve.eps[i] + log_inv / (curve.alphas[i] - 1.0);
    if (v < best.epsilon) {
      best.epsilon = v;
      best.alpha = curve.alphas[i];
    }
  }
  return best;
}

PrivacyLedger::PrivacyLedger(std::vector<double> grid, Lemma1Denominator denom)
    : curve_(std::move(grid)), denom_(denom) {}

void PrivacyLedger::Add(const PrivacyEvent& e) {
  if (!(e.q >= 0.0 && e.q <= 1.0)) throw ArgumentError("event sampling rate out of range");
  const auto inc = EventEps(e, curve_.alphas, denom_);
  RdpCurve next = curve_;
  for (std::size_t i = 0; i < inc.size(); ++i) next.eps[i] += inc[i];
  if (e.kind == EventKind::kSelection) next.delta_hat += e.delta_t;
  if (next.empty()) {
    throw AccountingError(
        "no RDP order satisfies the gradient-event constraint; use a larger sigma "
        "or a smaller sampling rate");
  }
  curve_ = std::move(next);
  events_.push_back(e);
}

PrivacyLedger Compose(PrivacyLedger ledger, const PrivacyEvent& e) {
  ledger.Add(e);
  return ledger;
}

DpGuarantee PrivacyLedger::Convert(double delta) const {
  if (events_.empty()) {
    if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("delta must lie in (0, 1)");
    return DpGuarantee{0.0, delta, 0.0};
  }
  return ToDp(curve_, delta);
}

BudgetStatus CheckBudget(const PrivacyLedger& ledger, double epsilon_budget, double delta) {
  if (ledger.events().empty()) return BudgetStatus::kWithin;
  const auto g = ledger.Convert(delta);
  if (g.epsilon >= epsilon_budget || g.delta_total >= 1.0) return BudgetStatus::kExhausted;
  return BudgetStatus::kWithin;
}

void WriteLedger(const PrivacyLedger& ledger, double delta, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot write " + path.string());
  const auto& c = ledger.curve();
  out << "[curve]\nalpha\teps\n";
  for (std::size_t i = 0; i < c.alphas.size(); ++i) {
    out << fmt::format("{:.17g}\t{:.17g}\n", c.alphas[i], c.eps[i]);
  }
  std::size_t n_sel = 0, n_grad = 0;
  for (const auto& e : ledger.events()) (e.kind == EventKind::kSelection ? n_sel : n_grad)++;
  const auto g = ledger.Convert(delta);
  out << "\n[summary]\n";
  out << fmt::format("epsilon = {:.17g}\n", g.epsilon);
  out << fmt::format("delta = {:.17g}\n", delta);
  out << fmt::format("delta_total = {:.17g}\n", g.delta_total);
  out << fmt::format("alpha = {:.17g}\n", g.alpha);
  out << "events = " << ledger.events().size() << "\n";
  out << "selection_events = " << n_sel << "\n";
  out << "gradient_events = " << n_grad << "\n";
  out << "lemma1_denominator = " << Lemma1DenominatorName(ledger.denominator()) << "\n";
}

}  // namespace fkge::privacy
