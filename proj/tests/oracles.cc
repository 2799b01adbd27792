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

#include "oracles.h"

#include <algorithm>
#include <cmath>

#include <boost/multiprecision/cpp_int.hpp>

#include "adpriv/rng.h"

namespace adpriv::oracles {

double BinomialUpperTailExact(long long k, long long n, long long p_num, long long p_den) {
  using boost::multiprecision::cpp_int;
  using boost::multiprecision::cpp_rational;
  const cpp_rational p(p_num, p_den);
  const cpp_rational q = 1 - p;
  cpp_rational tail = 0;
  // C(n, x) by multiplicative recurrence.
  cpp_int binom = 1;
  cpp_rational p_pow = 1;  // p^x
  // q^(n-x) built from q^n upward.
  cpp_rational q_pow = 1;
  for (long long i = 0; i < n; ++i) q_pow *= q;
  for (long long x = 0; x <= n; ++x) {
    if (x >= k) {
      tail += cpp_rational(binom) * p_pow * q_pow;
    }
    if (x < n) {
      binom = binom * (n - x) / (x + 1);
      p_pow *= p;
      q_pow /= q;
    }
  }
  return static_cast<double>(tail);
}

double BivariateOrthantP11(double rho) { return 0.25 + std::asin(rho) / (2.0 * M_PI); }

double SimulateFirstAdConversionRate(const ExplicitDistribution& d, const FeatureVector& ad_a,
                                     const FeatureVector& ad_b, double alpha_t, double alpha_e,
                                     long long draws, std::uint64_t seed) {
  RngStream rng(seed);
  long long hits = 0;
  for (long long i = 0; i < draws; ++i) {
    const FeatureVector x = d.Sample(rng);
    const double delta = Closeness(ad_a, x) - Closeness(ad_b, x);
    if (!rng.NextBernoulli(0.5 * (1.0 + alpha_t * delta))) continue;
    if (rng.NextBernoulli(alpha_e * Closeness(ad_a, x))) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(draws);
}

double KolmogorovDistance(std::vector<double> samples, const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    worst = std::max(worst, std::max(std::abs(f - lo), std::abs(f - hi)));
  }
  return worst;
}

}  // namespace adpriv::oracles
