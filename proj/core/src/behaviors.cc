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

#include "adpriv/behaviors.h"

#include <algorithm>

#include "adpriv/dp_stats.h"
#include "adpriv/errors.h"

namespace adpriv {

void BehaviorParams::Validate() const {
  if (!(alpha_t >= 0.0 && alpha_t <= 1.0)) throw ConfigError("alpha_t must lie in [0, 1]");
  if (!(alpha_e >= 0.0 && alpha_e <= 1.0)) throw ConfigError("alpha_e must lie in [0, 1]");
  if (!(alpha_a >= 0.0 && alpha_a <= 1.0)) throw ConfigError("alpha_a must lie in [0, 1]");
  if (epsilon.has_value() && !(*epsilon > 0.0 && *epsilon < 1.0)) {
    throw ConfigError("reporting epsilon must lie in (0, 1)");
  }
}

FeatureVector RhoApply(const std::optional<FeatureVector>& rho_mask,
                       const FeatureVector& features) {
  if (!rho_mask.has_value()) return features;
  if (rho_mask->length() != features.length()) {
    throw DimensionError("rho mask length does not match features");
  }
  return FeatureVector(features.bits() & ~rho_mask->bits(), features.length());
}

FeatureVector TargetingPairwise(const BehaviorParams& params,
                                std::span<const ActiveAd> active_ads,
                                const FeatureVector& filtered_features, SiteId /*site*/,
                                RngStream& rng) {
  if (active_ads.empty()) {
    throw ConfigError("targeting invoked with no active ads");
  }
  if (active_ads.size() != 2) {
    const auto pick = rng.NextIndex(active_ads.size());
    return active_ads[static_cast<std::size_t>(pick)].ad;
  }
  const double delta = Closeness(active_ads[0].audience, filtered_features) -
                       Closeness(active_ads[1].audience, filtered_features);
  const double p_first = std::clamp(0.5 * (1.0 + params.alpha_t * delta), 0.0, 1.0);
  return rng.NextBernoulli(p_first) ? active_ads[0].ad : active_ads[1].ad;
}

SiteId BrowsingConstant(const FeatureVector& /*features*/,
                        std::span<const BrowsingEntry> /*history*/) {
  return kDefaultSite;
}

bool EngagementBernoulli(const BehaviorParams& params, const FeatureVector& features,
                         SiteId /*site*/, const FeatureVector& ad, RngStream& rng) {
  const double p = std::clamp(params.alpha_e * Closeness(ad, features), 0.0, 1.0);
  return rng.NextBernoulli(p);
}

std::vector<std::pair<FeatureVector, double>> AttributionLastTouch(
    std::span<const BrowsingEntry> slice) {
  for (auto it = slice.rbegin(); it != slice.rend(); ++it) {
    if (it->conversion == Conversion::kConverted && it->ad.has_value()) {
      return {{*it->ad, 1.0}};
    }
  }
  return {};
}

Report ReportingIdentity(const Report& scores) { return scores; }

Report ReportingDp(const BehaviorParams& params, const Report& scores, RngStream& rng) {
  if (!params.epsilon.has_value()) {
    throw ConfigError("dp reporting requires epsilon");
  }
  params.Validate();
  const TulapParams noise = TulapParams::FromEpsilon(*params.epsilon);
  Report out;
  for (const auto& [ad, score] : scores) {
    out[ad] = score + TulapSample(noise, rng);
  }
  return out;
}

BehaviorSuite MakeStandardBehaviors(const BehaviorParams& params) {
  params.Validate();
  BehaviorSuite suite;
  suite.browse_site = [](const FeatureVector& features, std::span<const BrowsingEntry> history) {
    return BrowsingConstant(features, history);
  };
  suite.targeting_filter = [mask = params.rho_mask](const FeatureVector& features) {
    return RhoApply(mask, features);
  };
  suite.select_ad = [params](std::span<const ActiveAd> active_ads,
                             const FeatureVector& filtered, SiteId site, RngStream& rng) {
    return TargetingPairwise(params, active_ads, filtered, site, rng);
  };
  suite.engage = [params](const FeatureVector& features, SiteId site, const FeatureVector& ad,
                          RngStream& rng) {
    return EngagementBernoulli(params, features, site, ad, rng);
  };
  suite.attribute = [](std::span<const BrowsingEntry> slice) {
    return AttributionLastTouch(slice);
  };
  if (params.epsilon.has_value()) {
    suite.report = [params](const Report& scores, RngStream& rng) {
      return ReportingDp(params, scores, rng);
    };
  } else {
    suite.report = [](const Report& scores, RngStream& /*rng*/) {
      return ReportingIdentity(scores);
    };
  }
  return suite;
}

}  // namespace adpriv
