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

#ifndef ADPRIV_BEHAVIORS_H_
#define ADPRIV_BEHAVIORS_H_

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "adpriv/ecosystem.h"
#include "adpriv/feature_space.h"
#include "adpriv/rng.h"

namespace adpriv {

// Tunable knobs of the concrete parameterizing functions. alpha_t scales how
// strongly ad choice tracks audience closeness, alpha_e how strongly
// conversion probability tracks ad closeness, alpha_a is fixed at 1 because
// last-touch attribution is exact against this simulator's single-touch
// ground truth. A set epsilon switches reporting from identity to
// Tulap-noised differentially private release. rho_mask, when present, zeroes
// the masked feature positions before targeting sees them.
struct BehaviorParams {
  double alpha_t = 1.0;
  double alpha_e = 0.2;
  double alpha_a = 1.0;
  std::optional<double> epsilon;
  std::optional<FeatureVector> rho_mask;

  void Validate() const;
};

// rho: identity when no mask, otherwise zero the positions set in the mask.
FeatureVector RhoApply(const std::optional<FeatureVector>& rho_mask,
                       const FeatureVector& features);

// f_t for the two-ad case: returns the first ad with probability
// (1 + alpha_t * delta) / 2 where delta is the closeness difference of the
// two audiences to the filtered features. Anything other than exactly two
// active ads falls back to a uniform choice (no utility guarantee there).
FeatureVector TargetingPairwise(const BehaviorParams& params,
                                std::span<const ActiveAd> active_ads,
                                const FeatureVector& filtered_features, SiteId site,
                                RngStream& rng);

// f_b: one constant site.
SiteId BrowsingConstant(const FeatureVector& features, std::span<const BrowsingEntry> history);

// f_e: converts with probability alpha_e * closeness(ad, features).
bool EngagementBernoulli(const BehaviorParams& params, const FeatureVector& features,
                         SiteId site, const FeatureVector& ad, RngStream& rng);

// f_a: all credit to the converting impression (the last entry of the slice
// that carries a conversion). Empty result if the slice has none.
std::vector<std::pair<FeatureVector, double>> AttributionLastTouch(
    std::span<const BrowsingEntry> slice);

// f_r variants.
Report ReportingIdentity(const Report& scores);
// Per-ad score + Tulap(b = exp(-epsilon)) noise, iterated in the map's
// canonical ad order so a fixed seed reproduces the release.
Report ReportingDp(const BehaviorParams& params, const Report& scores, RngStream& rng);

// Wires the functions above into a suite for the ecosystem; reporting is
// identity unless params.epsilon is set.
BehaviorSuite MakeStandardBehaviors(const BehaviorParams& params);

}  // namespace adpriv

#endif  // ADPRIV_BEHAVIORS_H_
