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

#ifndef ADPRIV_ANALYSIS_H_
#define ADPRIV_ANALYSIS_H_

#include <optional>
#include <vector>

#include "adpriv/behaviors.h"
#include "adpriv/ecosystem.h"
#include "adpriv/feature_space.h"

namespace adpriv {

// Closed-form counterparts of the simulator: the per-user joint
// sub-distribution of "features were x AND the first ad converted", the
// Hellinger sample-complexity bounds derived from a pair of them, and the
// campaign-size expansion factor between two targeting accuracies.

// Sub-distribution over {0,1}^dimension; total mass is the per-user
// probability of the event, at most 1.
struct EngagementOutputDistribution {
  int dimension = 0;
  std::vector<double> masses;

  double TotalMass() const;
};

double HellingerSquared(const EngagementOutputDistribution& p,
                        const EngagementOutputDistribution& q);

// masses[x] = d(x) * (1 + alpha_t * delta_x) / 2 * alpha_e * closeness(first.ad, x)
// where delta_x compares the two audiences against the rho-filtered x. This
// is the exact one-round distribution of (user features, converted on the
// first ad) induced by the standard behaviors.
EngagementOutputDistribution EngagementOutput(const ExplicitDistribution& d,
                                              const ActiveAd& first, const ActiveAd& second,
                                              const BehaviorParams& params);

struct BoundsReport {
  double h_squared = 0.0;
  double sc_lower = 0.0;          // ln(1/(4 beta)) / (4 H^2)
  double sc_upper = 0.0;          // 1 / H^2
  double sc_private_upper = 0.0;  // 10 * sc_upper / epsilon, 0 when no epsilon
  double beta = 0.0;
  std::optional<double> epsilon;
};

// Sample-complexity bounds for distinguishing r0 from r1 with distinguisher
// error beta in (0, 1/4). Throws DegenerateError when the Hellinger distance
// vanishes.
BoundsReport ScBounds(const EngagementOutputDistribution& r0,
                      const EngagementOutputDistribution& r1, double beta,
                      std::optional<double> epsilon = std::nullopt);

// Sample-complexity upper bound under epsilon-DP (epsilon < 1): 10 * sc_upper / epsilon.
double ScPrivateBound(double sc_upper, double epsilon);

struct ExpansionReport {
  double a = 0.0;       // sum_x close(ad_1, x) (sqrt(d0) - sqrt(d1))^2
  double b = 0.0;       // same, weighted by delta_x
  double k = 0.0;       // b / a
  double gamma = 0.0;   // 4 / ln(3/2)
  double z = 0.0;       // gamma * (1 + alpha_t k) / (1 + alpha_t_prime k)
  long long n_private_predicted = 0;  // ceil(10 * z * n_nonprivate / epsilon)
};

// Campaign-size expansion factor between a targeting accuracy alpha_t and a
// degraded alpha_t_prime, for the given distribution pair and two-ad
// campaign. Pass n_nonprivate and epsilon to also predict the amplified
// private campaign size. Throws DegenerateError when the distributions agree
// everywhere the first ad has positive closeness weight (a = 0).
ExpansionReport ExpansionFactor(const ExplicitDistribution& d0, const ExplicitDistribution& d1,
                                const ActiveAd& first, const ActiveAd& second, double alpha_t,
                                double alpha_t_prime, long long n_nonprivate = 0,
                                std::optional<double> epsilon = std::nullopt);

// Advantage surviving the switch to a utility-preserving private reporter:
// (8/10) of the non-private advantage.
double AdvantageDegradation(double nonprivate_advantage);

// 4 / ln(3/2).
double ExpansionGamma();

}  // namespace adpriv

#endif  // ADPRIV_ANALYSIS_H_
