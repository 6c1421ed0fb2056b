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

#include "dpgan/accountant.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "dpgan/errors.h"
#include "dpgan/quadrature.h"

namespace dpgan {
namespace {

constexpr double kQuadTolerance = 1e-12;
constexpr std::size_t kMaxIntervals = 1'000'000;

double LogAddExp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// log of a Gaussian-integral expectation whose log integrand is `log_f`.
double LogIntegral(const std::function<double(double)>& log_f, double lower,
                   double upper, double sigma, const char* which, double q,
                   int lambda) {
  // Shift by the largest sampled log value so the integrand peaks near 1.
  const double step = sigma / 4.0;
  const auto samples =
      static_cast<std::size_t>(std::ceil((upper - lower) / step));
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i <= samples; ++i) {
    const double z = std::min(upper, lower + step * static_cast<double>(i));
    shift = std::max(shift, log_f(z));
  }
  QuadratureOptions options;
  options.abs_tolerance = kQuadTolerance;
  options.max_intervals = kMaxIntervals;
  // exp(log_f - shift) inherits the absolute rounding error of log_f.
  options.relative_noise =
      std::numeric_limits<double>::epsilon() * (1.0 + std::abs(shift));
  options.initial_pieces = std::min<std::size_t>(
      4096, std::max<std::size_t>(
                8, static_cast<std::size_t>(std::ceil((upper - lower) / (2 * step)))));
  const QuadratureResult r = IntegrateAdaptive(
      [&](double z) { return std::exp(log_f(z) - shift); }, lower, upper,
      options);
  if (!r.converged || !(r.value > 0.0) || !std::isfinite(r.value)) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "log-moment integral %s did not converge (q=%g sigma=%g "
                  "lambda=%d, error estimate %g after %zu intervals)",
                  which, q, sigma, lambda, r.error, r.intervals);
    throw AccountingError(buf);
  }
  return shift + std::log(r.value);
}

}  // namespace

void PrivacyBudget::Validate() const {
  if (!(epsilon0 > 0.0) || !std::isfinite(epsilon0)) {
    throw ContractError("privacy budget epsilon0 must be positive");
  }
  if (!(delta0 > 0.0 && delta0 < 1.0)) {
    throw ContractError("privacy budget delta0 must lie in (0, 1)");
  }
}

const char* AccountingModeName(AccountingMode mode) {
  return mode == AccountingMode::kSound ? "sound" : "paper";
}

AccountingMode ParseAccountingMode(const std::string& name) {
  if (name == "sound") return AccountingMode::kSound;
  if (name == "paper") return AccountingMode::kPaper;
  throw ContractError("unknown accounting mode '" + name + "'");
}

double EffectiveSigma(double sigma, std::size_t groups, AccountingMode mode) {
  if (groups < 1) throw ContractError("group count must be at least 1");
  if (mode == AccountingMode::kPaper || groups == 1) return sigma;
  return sigma / std::sqrt(static_cast<double>(groups));
}

void NoiseEvent::Validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ContractError("noise event sigma must be positive");
  }
  if (!(q > 0.0 && q <= 1.0)) {
    throw ContractError("noise event q must lie in (0, 1]");
  }
  if (count < 1) throw ContractError("noise event count must be at least 1");
  if (groups < 1) throw ContractError("noise event group count must be >= 1");
}

std::pair<double, double> LogMomentRange(double sigma, int lambda,
                                         double tolerance) {
  const double b =
      sigma * (std::sqrt(2.0 * lambda * std::log(1.0 / tolerance)) + 10.0);
  return {-b, static_cast<double>(lambda) + 1.0 + b};
}

double SubsampledGaussianLogMoment(double q, double sigma, int lambda) {
  if (!(q >= 0.0 && q <= 1.0)) throw ContractError("q must lie in [0, 1]");
  if (!(sigma > 0.0)) throw ContractError("sigma must be positive");
  if (lambda < 1) throw ContractError("lambda must be at least 1");
  if (q == 0.0) return 0.0;
  const double lam = static_cast<double>(lambda);
  if (q == 1.0) return lam * (lam + 1.0) / (2.0 * sigma * sigma);

  const double two_var = 2.0 * sigma * sigma;
  const double log_norm = -std::log(sigma * std::sqrt(2.0 * std::numbers::pi));
  const double log_keep = std::log1p(-q);
  const double log_q = std::log(q);
  // log(mu(z) / mu0(z))
  auto log_ratio = [=](double z) {
    return LogAddExp(log_keep, log_q + (2.0 * z - 1.0) / two_var);
  };
  auto log_mu0 = [=](double z) { return log_norm - z * z / two_var; };

  const auto [lower, upper] = LogMomentRange(sigma, lambda, kQuadTolerance);
  const double log_e1 = LogIntegral(
      [&](double z) { return log_mu0(z) - lam * log_ratio(z); }, lower, upper,
      sigma, "E1", q, lambda);
  const double log_e2 = LogIntegral(
      [&](double z) { return log_mu0(z) + (lam + 1.0) * log_ratio(z); },
      lower, upper, sigma, "E2", q, lambda);
  return std::max(0.0, std::max(log_e1, log_e2));
}

std::vector<double> SubsampledGaussianLogMoments(double q, double sigma,
                                                 int max_lambda) {
  std::vector<double> out(static_cast<std::size_t>(max_lambda));
  for (int l = 1; l <= max_lambda; ++l) {
    out[static_cast<std::size_t>(l - 1)] = SubsampledGaussianLogMoment(q, sigma, l);
  }
  return out;
}

LogMomentLedger::LogMomentLedger(int max_lambda)
    : max_lambda_(max_lambda),
      alpha_(static_cast<std::size_t>(std::max(max_lambda, 0)), 0.0) {
  if (max_lambda < 1) throw ContractError("max_lambda must be at least 1");
}

const std::vector<double>& LogMomentLedger::StepMoments(const Key& key) {
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    it = cache_
             .emplace(key, SubsampledGaussianLogMoments(key.second, key.first,
                                                        max_lambda_))
             .first;
  }
  return it->second;
}

void LogMomentLedger::Rebuild() {
  // Summing per distinct (sigma, q) in key order makes alpha independent of
  // the order in which events arrived.
  std::fill(alpha_.begin(), alpha_.end(), 0.0);
  for (const auto& [key, total] : totals_) {
    const std::vector<double>& per_step = cache_.at(key);
    for (std::size_t i = 0; i < alpha_.size(); ++i) {
      alpha_[i] += static_cast<double>(total) * per_step[i];
    }
  }
}

void LogMomentLedger::Accumulate(const NoiseEvent& event) {
  event.Validate();
  const Key key{EffectiveSigma(event.sigma, event.groups, event.mode), event.q};
  StepMoments(key);
  totals_[key] += event.count;
  history_.push_back(event);
  Rebuild();
}

std::uint64_t LogMomentLedger::steps() const {
  std::uint64_t n = 0;
  for (const NoiseEvent& e : history_) n += e.count;
  return n;
}

double LogMomentLedger::DeltaForEpsilon(double epsilon) const {
  if (!(epsilon > 0.0)) throw ContractError("epsilon must be positive");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < alpha_.size(); ++i) {
    const double lam = static_cast<double>(i + 1);
    best = std::min(best, alpha_[i] - lam * epsilon);
  }
  const double delta = std::exp(std::min(best, 0.0));
  return std::max(delta, std::numeric_limits<double>::min());
}

double LogMomentLedger::EpsilonForDelta(double delta) const {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ContractError("delta must lie in (0, 1)");
  }
  const double log_inv = std::log(1.0 / delta);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < alpha_.size(); ++i) {
    const double lam = static_cast<double>(i + 1);
    best = std::min(best, (alpha_[i] + log_inv) / lam);
  }
  return best;
}

std::vector<double> LogMomentLedger::RecomputeAlpha() const {
  LogMomentLedger replay(max_lambda_);
  for (const NoiseEvent& e : history_) replay.Accumulate(e);
  return replay.alpha_;
}

std::string LogMomentLedger::Export() const {
  std::ostringstream out;
  char buf[256];
  out << "dpgan-ledger 1\n";
  out << "max_lambda " << max_lambda_ << "\n";
  for (const NoiseEvent& e : history_) {
    std::snprintf(buf, sizeof buf,
                  "event sigma=%.17g q=%.17g count=%llu k=%zu mode=%s "
                  "n_param=%zu\n",
                  e.sigma, e.q, static_cast<unsigned long long>(e.count),
                  e.groups, AccountingModeName(e.mode), e.n_param);
    out << buf;
  }
  for (std::size_t i = 0; i < alpha_.size(); ++i) {
    std::snprintf(buf, sizeof buf, "alpha %zu %.17g\n", i + 1, alpha_[i]);
    out << buf;
  }
  return out.str();
}

LogMomentLedger LogMomentLedger::Import(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  auto next = [&]() {
    if (!std::getline(in, line)) return false;
    ++line_no;
    return true;
  };
  if (!next() || line != "dpgan-ledger 1") {
    throw FormatError("ledger header missing", line_no);
  }
  int max_lambda = 0;
  if (!next() || std::sscanf(line.c_str(), "max_lambda %d", &max_lambda) != 1 ||
      max_lambda < 1) {
    throw FormatError("ledger max_lambda line malformed", line_no);
  }
  LogMomentLedger ledger(max_lambda);
  std::vector<double> stored;
  std::vector<std::size_t> stored_lines;
  while (next()) {
    if (line.empty()) continue;
    if (line.rfind("event ", 0) == 0) {
      NoiseEvent e;
      unsigned long long count = 0;
      char mode[16] = {};
      if (std::sscanf(line.c_str(),
                      "event sigma=%lf q=%lf count=%llu k=%zu mode=%15s "
                      "n_param=%zu",
                      &e.sigma, &e.q, &count, &e.groups, mode,
                      &e.n_param) != 6) {
        throw FormatError("ledger event line malformed", line_no);
      }
      e.count = count;
      try {
        e.mode = ParseAccountingMode(mode);
        ledger.Accumulate(e);
      } catch (const ContractError& err) {
        throw FormatError(std::string("ledger event invalid: ") + err.what(),
                          line_no);
      }
    } else if (line.rfind("alpha ", 0) == 0) {
      std::size_t order = 0;
      double value = 0.0;
      if (std::sscanf(line.c_str(), "alpha %zu %lf", &order, &value) != 2 ||
          order != stored.size() + 1) {
        throw FormatError("ledger alpha line malformed", line_no);
      }
      stored.push_back(value);
      stored_lines.push_back(line_no);
    } else {
      throw FormatError("unrecognised ledger line", line_no);
    }
  }
  if (stored.size() != ledger.alpha_.size()) {
    throw FormatError("ledger alpha array has the wrong length", line_no);
  }
  for (std::size_t i = 0; i < stored.size(); ++i) {
    const double replayed = ledger.alpha_[i];
    if (std::abs(stored[i] - replayed) > 1e-12 * std::max(1.0, std::abs(replayed))) {
      throw FormatError("stored alpha disagrees with replayed events",
                        stored_lines[i]);
    }
  }
  return ledger;
}

double EpsilonAfter(double q, double sigma, std::uint64_t steps, double delta,
                    int max_lambda) {
  LogMomentLedger ledger(max_lambda);
  ledger.Accumulate({sigma, q, steps, 1, AccountingMode::kSound, 0});
  return ledger.EpsilonForDelta(delta);
}

double SigmaForBudget(double q, std::uint64_t steps, const PrivacyBudget& budget,
                      int max_lambda) {
  budget.Validate();
  if (!(q > 0.0 && q <= 1.0)) throw ContractError("q must lie in (0, 1]");
  if (steps < 1) throw ContractError("step count must be at least 1");
  constexpr double kLow = 0.1;
  constexpr double kHigh = 100.0;
  constexpr double kResolution = 1e-4;
  auto fits = [&](double sigma) {
    return EpsilonAfter(q, sigma, steps, budget.delta0, max_lambda) <=
           budget.epsilon0;
  };
  if (!fits(kHigh)) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "no sigma in [%g, %g] spends at most epsilon=%g at delta=%g "
                  "over %llu steps",
                  kLow, kHigh, budget.epsilon0, budget.delta0,
                  static_cast<unsigned long long>(steps));
    throw CalibrationError(buf);
  }
  if (fits(kLow)) return kLow;
  double lo = kLow;
  double hi = kHigh;
  while (hi - lo > kResolution) {
    const double mid = 0.5 * (lo + hi);
    if (fits(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace dpgan
