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

#include "adpriv/analysis.h"

#include <cmath>

#include "adpriv/errors.h"

namespace adpriv {

double EngagementOutputDistribution::TotalMass() const {
  double total = 0.0;
  for (double m : masses) total += m;
  return total;
}

double HellingerSquared(const EngagementOutputDistribution& p,
                        const EngagementOutputDistribution& q) {
  if (p.dimension != q.dimension) {
    throw DimensionError("hellinger requires equal dimensions");
  }
  return HellingerSquared(std::span<const double>(p.masses), std::span<const double>(q.masses));
}

EngagementOutputDistribution EngagementOutput(const ExplicitDistribution& d,
                                              const ActiveAd& first, const ActiveAd& second,
                                              const BehaviorParams& params) {
  params.Validate();
  const int dim = d.dimension();
  if (first.ad.length() != dim || second.ad.length() != dim ||
      first.audience.length() != dim || second.audience.length() != dim) {
    throw DimensionError("campaign vectors do not match the distribution dimension");
  }
  EngagementOutputDistribution out;
  out.dimension = dim;
  out.masses.resize(d.size(), 0.0);
  for (std::uint32_t idx = 0; idx < d.size(); ++idx) {
    const FeatureVector x(idx, dim);
    const FeatureVector filtered = RhoApply(params.rho_mask, x);
    const double delta =
        Closeness(first.audience, filtered) - Closeness(second.audience, filtered);
    const double show_first = 0.5 * (1.0 + params.alpha_t * delta);
    const double convert = params.alpha_e * Closeness(first.ad, x);
    out.masses[idx] = d.prob(idx) * show_first * convert;
  }
  return out;
}

BoundsReport ScBounds(const EngagementOutputDistribution& r0,
                      const EngagementOutputDistribution& r1, double beta,
                      std::optional<double> epsilon) {
  if (!(beta > 0.0 && beta < 0.25)) {
    throw ModelError("distinguisher error beta must lie in (0, 1/4)");
  }
  const double h2 = HellingerSquared(r0, r1);
  if (h2 <= 0.0) {
    throw DegenerateError("hellinger distance is zero; sample complexity undefined");
  }
  BoundsReport report;
  report.h_squared = h2;
  report.sc_lower = std::log(1.0 / (4.0 * beta)) / (4.0 * h2);
  report.sc_upper = 1.0 / h2;
  report.beta = beta;
  report.epsilon = epsilon;
  if (epsilon.has_value()) {
    report.sc_private_upper = ScPrivateBound(report.sc_upper, *epsilon);
  }
  return report;
}

double ScPrivateBound(double sc_upper, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw ModelError("private bound requires epsilon in (0, 1)");
  }
  return 10.0 * sc_upper / epsilon;
}

ExpansionReport ExpansionFactor(const ExplicitDistribution& d0, const ExplicitDistribution& d1,
                                const ActiveAd& first, const ActiveAd& second, double alpha_t,
                                double alpha_t_prime, long long n_nonprivate,
                                std::optional<double> epsilon) {
  if (d0.dimension() != d1.dimension()) {
    throw DimensionError("distribution dimensions differ");
  }
  if (!(alpha_t >= 0.0 && alpha_t <= 1.0) || !(alpha_t_prime >= 0.0 && alpha_t_prime <= 1.0)) {
    throw ModelError("targeting accuracies must lie in [0, 1]");
  }
  const int dim = d0.dimension();
  double a = 0.0;
  double b = 0.0;
  for (std::uint32_t idx = 0; idx < d0.size(); ++idx) {
    const FeatureVector x(idx, dim);
    const double diff = std::sqrt(d0.prob(idx)) - std::sqrt(d1.prob(idx));
    const double weight = Closeness(first.ad, x) * diff * diff;
    const double delta = Closeness(first.audience, x) - Closeness(second.audience, x);
    a += weight;
    b += weight * delta;
  }
  if (a <= 0.0) {
    throw DegenerateError(
        "distributions agree wherever the first ad has closeness weight; expansion undefined");
  }
  ExpansionReport report;
  report.a = a;
  report.b = b;
  report.k = b / a;
  report.gamma = ExpansionGamma();
  report.z = report.gamma * (1.0 + alpha_t * report.k) / (1.0 + alpha_t_prime * report.k);
  if (n_nonprivate > 0 && epsilon.has_value()) {
    if (!(*epsilon > 0.0 && *epsilon < 1.0)) {
      throw ModelError("predicted private size requires epsilon in (0, 1)");
    }
    report.n_private_predicted = static_cast<long long>(
        std::ceil(10.0 * report.z * static_cast<double>(n_nonprivate) / *epsilon));
  }
  return report;
}

double AdvantageDegradation(double nonprivate_advantage) {
  if (!(nonprivate_advantage >= 0.0 && nonprivate_advantage <= 1.0)) {
    throw ModelError("advantage must lie in [0, 1]");
  }
  return (8.0 * nonprivate_advantage) / 10.0;
}

double ExpansionGamma() { return 4.0 / std::log(1.5); }

}  // namespace adpriv
