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

#ifndef ADPRIV_DP_STATS_H_
#define ADPRIV_DP_STATS_H_

#include <cstdint>
#include <functional>

#include "adpriv/ecosystem.h"
#include "adpriv/errors.h"
#include "adpriv/rng.h"

namespace adpriv {

// Tulap (truncated-uniform-Laplace) noise parameters. b = exp(-epsilon) for
// the configured pure-DP epsilon; q stays 0 in this project (no truncation).
struct TulapParams {
  double b = 0.5;
  double q = 0.0;

  static TulapParams FromEpsilon(double epsilon);
  double epsilon() const;
  void Validate() const;
};

enum class TestSide { kUpper, kLower };

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool reject = false;
  double level = 0.05;
};

// Draws T = G1 - G2 + U with G1, G2 iid geometric(1 - b) on {0, 1, ...} and
// U uniform on (-1/2, 1/2). Symmetric and zero mean; adding T to an integer
// count is an epsilon-DP release for sensitivity-1 neighbors.
double TulapSample(const TulapParams& params, RngStream& rng);

// Closed-form CDF of the draw above (q = 0). Continuous, F(0) = 1/2,
// F(t) + F(-t) = 1.
double TulapCdf(const TulapParams& params, double t);

// Exact binomial tail test, no normal approximation. Upper side:
// p = P(X >= k) under X ~ Binomial(trials, null_p).
TestResult BinomialTestExact(long long successes, long long trials, double null_p,
                             TestSide side, double level = 0.05);

// Uniformly-most-powerful test of a binomial proportion given only the
// Tulap-noised count z = X + T. Upper-side p-value:
//   p = sum_x Binom(x; n, null_p) * (1 - TulapCdf(z - x)),
// mirrored for the lower side. Under the null the p-value is uniform, so the
// test is valid at any level. `params` must match the noise that produced
// `noisy_count`; the formula has no way to detect a mismatch.
TestResult UmpDpBinomialTest(double noisy_count, long long trials, double null_p,
                             const TulapParams& params, TestSide side, double level = 0.05);

// count + Z with P(Z = z) proportional to exp(-epsilon * |z|): the discrete
// two-sided-geometric release, exactly epsilon-DP for sensitivity-1
// neighbors. Used only where an exact-DP mechanism is needed for
// verification.
long long GeometricMechanism(long long count, double epsilon, RngStream& rng);

// Closed-form noise pmf of the mechanism above.
double TwoSidedGeometricPmf(double epsilon, long long z);

// Exact binomial tails, exposed for calibration and tests.
double BinomialUpperTail(long long k, long long n, double p);  // P(X >= k)
double BinomialLowerTail(long long k, long long n, double p);  // P(X <= k)

struct MetricsAlphaEstimate {
  double estimate = 0.0;
  double half_width_3sigma = 0.0;
};

using ReportTransform = std::function<Report(const Report&, RngStream&)>;
using ReportTest = std::function<bool(const Report&, RngStream&)>;

// Monte-Carlo estimate of |Pr[f_s(d) = 1] - Pr[f_s(f_r(d)) = 1]| with a
// 3-sigma half-width. Measures how much the report transform disturbs the
// decision of the downstream statistical test.
MetricsAlphaEstimate EstimateMetricsAlpha(const ReportTransform& f_r, const ReportTest& f_s,
                                          const Report& score_dataset, int trials,
                                          RngStream& rng);

}  // namespace adpriv

#endif  // ADPRIV_DP_STATS_H_
