// Copyright 2026 The dpgan Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Moments accountant for the subsampled Gaussian mechanism.
//
// For integer order lambda the log-moment of one step with sampling ratio q
// and noise multiplier sigma is log max(E1, E2), where with
// mu0 = N(0, sigma^2), mu1 = N(1, sigma^2) and mu = (1 - q) mu0 + q mu1:
//
//   E1 = E_{z ~ mu0} [(mu0(z) / mu(z))^lambda]
//   E2 = E_{z ~ mu}  [(mu(z) / mu0(z))^lambda]
//
// Both expectations are integrated numerically in log space. Log-moments
// compose additively over steps; (epsilon, delta) follow from the tail
// bound delta = min_lambda exp(alpha(lambda) - lambda * epsilon).

#ifndef DPGAN_ACCOUNTANT_H_
#define DPGAN_ACCOUNTANT_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dpgan {

inline constexpr int kDefaultMaxLambda = 64;

struct PrivacyBudget {
  double epsilon0 = 1.0;
  double delta0 = 1e-5;

  // Throws ContractError unless epsilon0 > 0 and 0 < delta0 < 1.
  void Validate() const;
};

// How a step that clips k disjoint parameter groups is charged.
//   kSound: the k blocks together form one Gaussian mechanism with
//           sensitivity sqrt(k) at noise multiplier sigma, i.e. an effective
//           multiplier sigma / sqrt(k).
//   kPaper: grouping is charged nothing (parallel composition over
//           parameter blocks), effective multiplier sigma.
enum class AccountingMode : std::uint8_t { kSound, kPaper };

const char* AccountingModeName(AccountingMode mode);
AccountingMode ParseAccountingMode(const std::string& name);

double EffectiveSigma(double sigma, std::size_t groups, AccountingMode mode);

struct NoiseEvent {
  double sigma = 1.0;       // noise stddev / clipping bound
  double q = 0.01;          // sampling ratio m / n
  std::uint64_t count = 1;  // number of identical steps
  std::size_t groups = 1;   // clipping groups k
  AccountingMode mode = AccountingMode::kSound;
  // Discriminator parameter count. Kept for the record only; it does not
  // enter the log-moment.
  std::size_t n_param = 0;

  void Validate() const;
  friend bool operator==(const NoiseEvent&, const NoiseEvent&) = default;
};

// Integration range used for order `lambda`. The lower end is -B and the
// upper end lambda + 1 + B, with B = sigma * (sqrt(2 lambda log(1/tol)) + 10).
std::pair<double, double> LogMomentRange(double sigma, int lambda,
                                         double tolerance = 1e-12);

// alpha(lambda) for one subsampled Gaussian step. Throws AccountingError if
// the quadrature does not reach its tolerance.
double SubsampledGaussianLogMoment(double q, double sigma, int lambda);

// Log-moments of every order 1..max_lambda for one step.
std::vector<double> SubsampledGaussianLogMoments(double q, double sigma,
                                                 int max_lambda);

class LogMomentLedger {
 public:
  explicit LogMomentLedger(int max_lambda = kDefaultMaxLambda);

  void Accumulate(const NoiseEvent& event);

  int max_lambda() const { return max_lambda_; }
  // alpha()[i] is the accumulated log-moment of order i + 1.
  std::span<const double> alpha() const { return alpha_; }
  const std::vector<NoiseEvent>& history() const { return history_; }
  // Total step count over the history.
  std::uint64_t steps() const;

  // min over lambda of exp(alpha - lambda * epsilon), clamped to (0, 1].
  double DeltaForEpsilon(double epsilon) const;
  // min over lambda of (alpha + log(1 / delta)) / lambda.
  double EpsilonForDelta(double delta) const;

  // Recomputes alpha from the history alone.
  std::vector<double> RecomputeAlpha() const;

  // Plain-text export: one "event" line per history entry followed by the
  // alpha array. Import replays the events and rejects the text if the
  // stored alpha disagrees with the replay.
  std::string Export() const;
  static LogMomentLedger Import(const std::string& text);

 private:
  using Key = std::pair<double, double>;  // (effective sigma, q)

  const std::vector<double>& StepMoments(const Key& key);
  void Rebuild();

  int max_lambda_;
  std::vector<double> alpha_;
  std::vector<NoiseEvent> history_;
  std::map<Key, std::uint64_t> totals_;
  std::map<Key, std::vector<double>> cache_;
};

// Smallest sigma in [0.1, 100] (to within 1e-4) such that `steps` steps at
// sampling ratio q spend at most epsilon0 at delta0. Throws
// CalibrationError if even sigma = 100 is not enough.
double SigmaForBudget(double q, std::uint64_t steps, const PrivacyBudget& budget,
                      int max_lambda = kDefaultMaxLambda);

// epsilon spent by `steps` steps at (q, sigma) for the given delta.
double EpsilonAfter(double q, double sigma, std::uint64_t steps, double delta,
                    int max_lambda = kDefaultMaxLambda);

}  // namespace dpgan

#endif  // DPGAN_ACCOUNTANT_H_
