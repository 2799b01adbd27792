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

#include "adpriv/ecosystem.h"

#include <sstream>
#include <utility>

namespace adpriv {

Ecosystem::Ecosystem(SocietyConfig society, BehaviorSuite behaviors, std::uint64_t seed)
    : society_(std::move(society)), behaviors_(std::move(behaviors)), rng_(seed) {
  if (society_.user_count < 1) {
    throw ConfigError("society needs at least one user");
  }
  users_.resize(static_cast<std::size_t>(society_.user_count));
}

UserRecord& Ecosystem::CheckedUser(int user_id) {
  if (user_id < 0 || user_id >= society_.user_count) {
    throw ConfigError("user id " + std::to_string(user_id) + " out of range");
  }
  return users_[static_cast<std::size_t>(user_id)];
}

const UserRecord& Ecosystem::user(int user_id) const {
  return const_cast<Ecosystem*>(this)->CheckedUser(user_id);
}

void Ecosystem::RegisterCampaign(const Campaign& campaign) {
  if (campaign.ads.empty()) {
    throw ConfigError("campaign must contain at least one ad");
  }
  if (campaign.audience.length() != dimension()) {
    throw DimensionError("campaign audience length does not match the ecosystem");
  }
  for (const FeatureVector& ad : campaign.ads) {
    if (ad.length() != dimension()) {
      throw DimensionError("campaign ad length does not match the ecosystem");
    }
  }
  campaigns_.push_back(campaign);
  for (const FeatureVector& ad : campaign.ads) {
    active_ads_.push_back(ActiveAd{campaign.audience, ad});
  }
}

SiteId Ecosystem::Browse(int user_id) {
  UserRecord& user = CheckedUser(user_id);
  if (!user.initialized) {
    // Society initializes features just in time on first contact.
    user.features = society_.distribution.Sample(rng_);
    user.targeting_idx = user.engagement_idx = user.attribution_idx = 0;
    user.initialized = true;
  }
  const SiteId site = behaviors_.browse_site(*user.features, user.browsing_history);
  user.browsing_history.push_back(BrowsingEntry{site, std::nullopt, Conversion::kUnresolved});
  return site;
}

TargetResult Ecosystem::TargetAd(int user_id) {
  UserRecord& user = CheckedUser(user_id);
  if (!user.initialized || user.targeting_idx >= user.browsing_history.size()) {
    return TargetResult{OpStatus::kFail, std::nullopt};
  }
  const FeatureVector filtered = behaviors_.targeting_filter(*user.features);
  BrowsingEntry& entry = user.browsing_history[user.targeting_idx];
  const FeatureVector ad = behaviors_.select_ad(active_ads_, filtered, entry.site, rng_);
  entry.ad = ad;
  ++user.targeting_idx;
  return TargetResult{OpStatus::kOk, ad};
}

EngageResult Ecosystem::Engage(int user_id) {
  UserRecord& user = CheckedUser(user_id);
  if (!user.initialized || user.engagement_idx >= user.targeting_idx) {
    return EngageResult{OpStatus::kFail, false};
  }
  BrowsingEntry& entry = user.browsing_history[user.engagement_idx];
  const bool converted = behaviors_.engage(*user.features, entry.site, *entry.ad, rng_);
  entry.conversion = converted ? Conversion::kConverted : Conversion::kNone;
  ++user.engagement_idx;
  return EngageResult{OpStatus::kOk, converted};
}

AttributeResult Ecosystem::Attribute(int user_id) {
  UserRecord& user = CheckedUser(user_id);
  if (!user.initialized) {
    return AttributeResult{OpStatus::kFail};
  }
  const std::uint32_t start = user.attribution_idx;
  std::uint32_t idx = start;
  while (idx < user.browsing_history.size() &&
         user.browsing_history[idx].conversion != Conversion::kConverted) {
    ++idx;
  }
  if (idx >= user.browsing_history.size()) {
    return AttributeResult{OpStatus::kFail};
  }
  // Slice runs from the previous attribution point through the converting
  // entry inclusive; credit allocation needs the conversion itself.
  const std::span<const BrowsingEntry> slice(user.browsing_history.data() + start,
                                             idx - start + 1);
  const auto scores = behaviors_.attribute(slice);
  for (const auto& [ad, score] : scores) {
    ad_scores_[ad] += score;
  }
  user.attribution_idx = idx + 1;
  return AttributeResult{OpStatus::kOk};
}

Report Ecosystem::GenerateReport(const Campaign& campaign) {
  bool registered = false;
  for (const Campaign& c : campaigns_) {
    if (c.audience == campaign.audience && c.ads == campaign.ads) {
      registered = true;
      break;
    }
  }
  if (!registered) {
    throw ConfigError("report requested for an unregistered campaign");
  }
  Report restricted;
  for (const FeatureVector& ad : campaign.ads) {
    const auto it = ad_scores_.find(ad);
    restricted[ad] = it == ad_scores_.end() ? 0.0 : it->second;
  }
  return behaviors_.report(restricted, rng_);
}

std::string Ecosystem::StateFingerprint() const {
  std::ostringstream out;
  out.precision(17);
  for (const UserRecord& user : users_) {
    if (!user.initialized) {
      out << "u:-;";
      continue;
    }
    out << "u:" << user.features->ToString() << ':' << user.targeting_idx << ':'
        << user.engagement_idx << ':' << user.attribution_idx << '[';
    for (const BrowsingEntry& e : user.browsing_history) {
      out << e.site << ',' << (e.ad.has_value() ? e.ad->ToString() : "-") << ','
          << static_cast<int>(e.conversion) << '|';
    }
    out << "];";
  }
  out << "scores{";
  for (const auto& [ad, score] : ad_scores_) {
    out << ad.ToString() << '=' << score << ';';
  }
  out << '}';
  return out.str();
}

}  // namespace adpriv
