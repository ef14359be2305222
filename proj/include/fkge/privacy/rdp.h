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

#ifndef FKGE_PRIVACY_RDP_H_
#define FKGE_PRIVACY_RDP_H_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace fkge::privacy {

// Which denominator the subsampled-Gaussian bound uses. The published form
// divides by sigma; kSigmaSquared is the textbook variant.
enum class Lemma1Denominator { kSigma, kSigmaSquared };

Lemma1Denominator ParseLemma1Denominator(std::string_view s);
std::string_view Lemma1DenominatorName(Lemma1Denominator d);

struct GaussianRdp {
  double eps = 0.0;
  bool valid = false;
};

// eps_g(alpha) = 2 q^2 alpha / sigma, valid only for
//   alpha <= min(sigma^2 L / 2 - 2 log sigma,
//                (sigma^2 L^2 / 2 - log 5 - 2 log sigma) / (L + log(q alpha) + 1/(2 sigma^2)))
// with L = log(1 + 1/(q (alpha - 1))).
GaussianRdp RdpGaussianSubsampled(double q, double sigma, double alpha,
                                  Lemma1Denominator denom = Lemma1Denominator::kSigma);
bool Lemma1Valid(double q, double sigma, double alpha);

// alpha/(8 sigma_r^2) + alpha/(2 sigma_p^2).
double RdpSelectionBase(double sigma_r, double sigma_p, double alpha);

// Amplification by Poisson subsampling at integer order alpha >= 2,
// evaluated in log space.
double RdpSelectionSubsampled(double q, double sigma_r, double sigma_p, int alpha);

// {1.25, 1.5, 1.75, 2, 2.5, 3, 4, ..., 64, 128, 256, 512, 1024}
std::vector<double> DefaultAlphaGrid();

// eps(alpha) over a grid; +infinity marks an order that is not usable.
struct RdpCurve {
  std::vector<double> alphas;
  std::vector<double> eps;
  double delta_hat = 0.0;

  explicit RdpCurve(std::vector<double> grid = DefaultAlphaGrid());
  bool empty() const;  // true when no order is usable
};

enum class EventKind { kSelection, kGradient };

std::string_view EventKindName(EventKind k);

struct PrivacyEvent {
  int client = 0;
  int round = 0;
  int iter = 0;
  EventKind kind = EventKind::kSelection;
  double q = 0.0;
  double sigma = 1.0;    // gradient events
  double sigma_r = 1.0;  // selection events
  double sigma_p = 1.0;
  double delta_t = 0.0;
};

// Contribution of one event on `alphas`. Selection events at fractional
// orders use the next integer order, an upper bound since RDP is monotone in
// alpha.
std::vector<double> EventEps(const PrivacyEvent& e, std::span<const double> alphas,
                             Lemma1Denominator denom);

struct DpGuarantee {
  double epsilon = 0.0;
  double delta_total = 0.0;
  double alpha = 0.0;  // minimizing order
};

// eps = min_alpha eps(alpha) + log(1/delta)/(alpha - 1); delta_total = delta + delta_hat.
DpGuarantee ToDp(const RdpCurve& curve, double delta);

class PrivacyLedger {
 public:
  explicit PrivacyLedger(std::vector<double> grid = DefaultAlphaGrid(),
                         Lemma1Denominator denom = Lemma1Denominator::kSigma);

  // Adds the event pointwise. Throws AccountingError when no usable order
  // remains.
  void Add(const PrivacyEvent& e);

  const RdpCurve& curve() const { return curve_; }
  std::span<const PrivacyEvent> events() const { return events_; }
  Lemma1Denominator denominator() const { return denom_; }
  // An empty ledger has released nothing: epsilon 0, delta_total = delta.
  DpGuarantee Convert(double delta) const;

 private:
  RdpCurve curve_;
  std::vector<PrivacyEvent> events_;
  Lemma1Denominator denom_;
};

// Value-returning composition.
PrivacyLedger Compose(PrivacyLedger ledger, const PrivacyEvent& e);

enum class BudgetStatus { kWithin, kExhausted };

BudgetStatus CheckBudget(const PrivacyLedger& ledger, double epsilon_budget, double delta);

// `{alpha, eps}` table followed by a summary block.
void WriteLedger(const PrivacyLedger& ledger, double delta, const std::filesystem::path& path);

}  // namespace fkge::privacy

#endif  // FKGE_PRIVACY_RDP_H_
