// Copyright 2026 The adpriv Authors
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

#include "adpriv/dp_stats.h"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace adpriv {

namespace {

// Geometric(1 - b) on {0, 1, ...} by inversion: P(G >= k) = b^k.
long long SampleGeometric(double b, RngStream& rng) {
  const double u = rng.NextUniformOpen();
  const double g = std::floor(std::log(u) / std::log(b));
  return g < 0.0 ? 0 : static_cast<long long>(g);
}

double BinomialLogPmf(long long x, long long n, double p) {
  return boost::math::lgamma(static_cast<double>(n) + 1.0) -
         boost::math::lgamma(static_cast<double>(x) + 1.0) -
         boost::math::lgamma(static_cast<double>(n - x) + 1.0) +
         static_cast<double>(x) * std::log(p) +
         static_cast<double>(n - x) * std::log1p(-p);
}

void ValidateCountAndTrials(long long k, long long n) {
  if (n < 1 || k < 0 || k > n) {
    throw ConfigError("invalid successes/trials: k=" + std::to_string(k) +
                      " n=" + std::to_string(n));
  }
}

void ValidateNullP(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw ModelError("null proportion must lie strictly inside (0, 1)");
  }
}

}  // namespace

TulapParams TulapParams::FromEpsilon(double epsilon) {
  if (!(epsilon > 0.0)) throw ModelError("tulap epsilon must be positive");
  TulapParams params;
  params.b = std::exp(-epsilon);
  params.q = 0.0;
  params.Validate();
  return params;
}

double TulapParams::epsilon() const { return -std::log(b); }

void TulapParams::Validate() const {
  if (!(b > 0.0 && b < 1.0)) throw ModelError("tulap b must lie in (0, 1)");
  if (q != 0.0) throw ModelError("tulap q must be 0 in this build");
}

double TulapSample(const TulapParams& params, RngStream& rng) {
  params.Validate();
  const long long g1 = SampleGeometric(params.b, rng);
  const long long g2 = SampleGeometric(params.b, rng);
  const double u = rng.NextUniform() - 0.5;
  return static_cast<double>(g1 - g2) + u;
}

double TulapCdf(const TulapParams& params, double t) {
  params.Validate();
  if (t > 0.0) return 1.0 - TulapCdf(params, -t);
  const double b = params.b;
  const double r = std::round(t);  // CDF is continuous, tie direction immaterial
  return std::pow(b, -r) / (1.0 + b) * (b + (t - r + 0.5) * (1.0 - b));
}

double BinomialUpperTail(long long k, long long n, double p) {
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  return boost::math::ibeta(static_cast<double>(k), static_cast<double>(n - k + 1), p);
}

double BinomialLowerTail(long long k, long long n, double p) {
  if (k < 0) return 0.0;
  if (k >= n) return 1.0;
  return boost::math::ibeta(static_cast<double>(n - k), static_cast<double>(k + 1), 1.0 - p);
}

TestResult BinomialTestExact(long long successes, long long trials, double null_p,
                             TestSide side, double level) {
  ValidateCountAndTrials(successes, trials);
  ValidateNullP(null_p);
  const double p = side == TestSide::kUpper ? BinomialUpperTail(successes, trials, null_p)
                                            : BinomialLowerTail(successes, trials, null_p);
  TestResult result;
  result.statistic = static_cast<double>(successes);
  result.p_value = std::clamp(p, 0.0, 1.0);
  result.level = level;
  result.reject = result.p_value <= level;
  return result;
}

TestResult UmpDpBinomialTest(double noisy_count, long long trials, double null_p,
                             const TulapParams& params, TestSide side, double level) {
  if (trials < 1) throw ConfigError("ump test needs at least one trial");
  ValidateNullP(null_p);
  params.Validate();

  // Outside a window of half-width K around the noisy count the Tulap CDF is
  // 0 or 1 to ~1e-18; those binomial outcomes contribute an exact tail.
  const double log_b = std::log(params.b);
  long long window = trials + 1;
  if (log_b < -1e-12) {
    window = static_cast<long long>(std::ceil(-18.0 * std::log(10.0) / -log_b)) + 2;
    window = std::min(window, trials + 1);
  }
  const long long lo = std::max<long long>(0, static_cast<long long>(std::floor(noisy_count)) - window);
  const long long hi = std::min<long long>(trials, static_cast<long long>(std::ceil(noisy_count)) + window);

  double p = 0.0;
  if (side == TestSide::kUpper) {
    p = BinomialUpperTail(hi + 1, trials, null_p);
    for (long long x = lo; x <= hi; ++x) {
      p += std::exp(BinomialLogPmf(x, trials, null_p)) *
           (1.0 - TulapCdf(params, noisy_count - static_cast<double>(x)));
    }
  } else {
    p = BinomialLowerTail(lo - 1, trials, null_p);
    for (long long x = lo; x <= hi; ++x) {
      p += std::exp(BinomialLogPmf(x, trials, null_p)) *
           TulapCdf(params, noisy_count - static_cast<double>(x));
    }
  }

  TestResult result;
  result.statistic = noisy_count;
  result.p_value = std::clamp(p, 0.0, 1.0);
  result.level = level;
  result.reject = result.p_value <= level;
  return result;
}

long long GeometricMechanism(long long count, double epsilon, RngStream& rng) {
  if (!(epsilon > 0.0)) throw ModelError("geometric mechanism epsilon must be positive");
  const double b = std::exp(-epsilon);
  return count + (SampleGeometric(b, rng) - SampleGeometric(b, rng));
}

double TwoSidedGeometricPmf(double epsilon, long long z) {
  if (!(epsilon > 0.0)) throw ModelError("geometric mechanism epsilon must be positive");
  const double b = std::exp(-epsilon);
  return (1.0 - b) / (1.0 + b) * std::pow(b, static_cast<double>(std::llabs(z)));
}

MetricsAlphaEstimate EstimateMetricsAlpha(const ReportTransform& f_r, const ReportTest& f_s,
                                          const Report& score_dataset, int trials,
                                          RngStream& rng) {
  if (trials < 1000) {
    throw ConfigError("metrics-alpha estimation needs at least 1000 trials");
  }
  long long raw_hits = 0;
  long long transformed_hits = 0;
  for (int t = 0; t < trials; ++t) {
    if (f_s(score_dataset, rng)) ++raw_hits;
    if (f_s(f_r(score_dataset, rng), rng)) ++transformed_hits;
  }
  const double n = static_cast<double>(trials);
  const double p1 = static_cast<double>(raw_hits) / n;
  const double p2 = static_cast<double>(transformed_hits) / n;
  MetricsAlphaEstimate est;
  est.estimate = std::abs(p1 - p2);
  est.half_width_3sigma = 3.0 * std::sqrt((p1 * (1.0 - p1) + p2 * (1.0 - p2)) / n);
  return est;
}

}  // namespace adpriv
