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

#ifndef ADPRIV_ECOSYSTEM_H_
#define ADPRIV_ECOSYSTEM_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "adpriv/feature_space.h"
#include "adpriv/rng.h"

namespace adpriv {

// The ecosystem models a single publisher site.
using SiteId = std::uint32_t;
inline constexpr SiteId kDefaultSite = 0;

// Conversion state of a browsing entry. Unresolved until an engagement step
// decides; engagement may decide "no conversion".
enum class Conversion : std::uint8_t { kUnresolved = 0, kNone = 1, kConverted = 2 };

struct BrowsingEntry {
  SiteId site = kDefaultSite;
  std::optional<FeatureVector> ad;  // absent until a targeting step overwrites the entry
  Conversion conversion = Conversion::kUnresolved;
};

// Per-user state. The three indices partition the browsing history into
// attributed / engaged / targeted / pending prefixes and satisfy
// attribution_idx <= engagement_idx <= targeting_idx <= history size.
struct UserRecord {
  std::optional<FeatureVector> features;
  std::vector<BrowsingEntry> browsing_history;
  std::uint32_t targeting_idx = 0;
  std::uint32_t engagement_idx = 0;
  std::uint32_t attribution_idx = 0;
  bool initialized = false;  // first browse populates features and indices
};

struct Campaign {
  FeatureVector audience;
  std::vector<FeatureVector> ads;  // non-empty, all matching audience length
};

// One targetable unit: an ad together with the audience of the campaign that
// registered it. Duplicate registrations yield duplicate entries.
struct ActiveAd {
  FeatureVector audience;
  FeatureVector ad;
};

using AdScores = std::map<FeatureVector, double>;
using Report = std::map<FeatureVector, double>;

struct SocietyConfig {
  int user_count = 0;
  ExplicitDistribution distribution;
};

// The parameterizing functions. All are pure given the passed rng stream.
struct BehaviorSuite {
  // f_b: which site the user visits next.
  std::function<SiteId(const FeatureVector& features, std::span<const BrowsingEntry> history)>
      browse_site;
  // rho: filter applied to features before targeting sees them.
  std::function<FeatureVector(const FeatureVector& features)> targeting_filter;
  // f_t: ad selection over the active (audience, ad) pairs.
  std::function<FeatureVector(std::span<const ActiveAd> active_ads,
                              const FeatureVector& filtered_features, SiteId site,
                              RngStream& rng)>
      select_ad;
  // f_e: whether an impression converts.
  std::function<bool(const FeatureVector& features, SiteId site, const FeatureVector& ad,
                     RngStream& rng)>
      engage;
  // f_a: credit allocation over a history slice ending at a conversion.
  std::function<std::vector<std::pair<FeatureVector, double>>(
      std::span<const BrowsingEntry> slice)>
      attribute;
  // f_r: report generation (identity or privatized).
  std::function<Report(const Report& scores, RngStream& rng)> report;
};

enum class OpStatus { kOk, kFail };

struct TargetResult {
  OpStatus status = OpStatus::kFail;
  std::optional<FeatureVector> ad;
};

struct EngageResult {
  OpStatus status = OpStatus::kFail;
  bool converted = false;
};

struct AttributeResult {
  OpStatus status = OpStatus::kFail;
};

// The five composed functionalities as one state machine: user features are
// sampled just in time on first browse, targeting/engagement/attribution
// advance the per-user indices, and reports restrict the cumulative ad-score
// map to one campaign. Every fail condition returns a fail outcome without
// mutating state. One instance is a single logical thread; independent
// instances may run in parallel.
class Ecosystem {
 public:
  Ecosystem(SocietyConfig society, BehaviorSuite behaviors, std::uint64_t seed);

  // Appends the campaign; duplicates are retained.
  void RegisterCampaign(const Campaign& campaign);

  // Samples features on first contact, asks f_b for a site, appends an entry.
  SiteId Browse(int user_id);

  // Targets the oldest un-targeted entry. Fails if the user never browsed or
  // every entry already carries an ad.
  TargetResult TargetAd(int user_id);

  // Resolves the conversion of the oldest targeted-but-unresolved entry.
  // Fails when all impressions are resolved.
  EngageResult Engage(int user_id);

  // Scans from attribution_idx for the next conversion, passes the history
  // slice (inclusive of the converting entry) to f_a, and folds the returned
  // scores into the ad-score map. Fails, leaving state untouched, when no
  // unattributed conversion exists.
  AttributeResult Attribute(int user_id);

  // Restricts ad-scores to the campaign's ads (missing ads score 0) and
  // applies f_r. The campaign must have been registered.
  Report GenerateReport(const Campaign& campaign);

  std::span<const ActiveAd> active_ads() const { return active_ads_; }
  const AdScores& ad_scores() const { return ad_scores_; }
  const UserRecord& user(int user_id) const;
  int user_count() const { return society_.user_count; }
  int dimension() const { return society_.distribution.dimension(); }

  // Textual digest of the full mutable state; equal digests mean replaying a
  // schedule reproduced the state bit for bit.
  std::string StateFingerprint() const;

 private:
  UserRecord& CheckedUser(int user_id);

  SocietyConfig society_;
  BehaviorSuite behaviors_;
  RngStream rng_;
  std::vector<UserRecord> users_;
  std::vector<Campaign> campaigns_;
  std::vector<ActiveAd> active_ads_;
  AdScores ad_scores_;
};

}  // namespace adpriv

#endif  // ADPRIV_ECOSYSTEM_H_
