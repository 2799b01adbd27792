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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "adpriv/behaviors.h"
#include "adpriv/dp_stats.h"

using namespace adpriv;

namespace {

double EstimateFirstAdRate(const BehaviorParams& params, const std::vector<ActiveAd>& actives,
                           const FeatureVector& features, int draws, std::uint64_t seed) {
  RngStream rng(seed);
  int first = 0;
  for (int i = 0; i < draws; ++i) {
    if (TargetingPairwise(params, actives, features, kDefaultSite, rng) == actives[0].ad) {
      ++first;
    }
  }
  return static_cast<double>(first) / draws;
}

}  // namespace

TEST_CASE("rho filtering") {
  const FeatureVector features = FeatureVector::FromString("1011");
  CHECK(RhoApply(std::nullopt, features) == features);
  CHECK(RhoApply(FeatureVector::FromString("1111"), features) ==
        FeatureVector::FromString("0000"));
  CHECK(RhoApply(FeatureVector::FromString("0000"), features) == features);
  CHECK(RhoApply(FeatureVector::FromString("0011"), features) ==
        FeatureVector::FromString("1000"));
  CHECK_THROWS_AS(RhoApply(FeatureVector::FromString("11"), features), DimensionError);
}

TEST_CASE("pairwise targeting hits its closeness-weighted probabilities") {
  const FeatureVector ad_a = FeatureVector::FromString("1111");
  const FeatureVector ad_b = FeatureVector::FromString("0111");
  const std::vector<ActiveAd> actives = {{ad_a, ad_a}, {ad_b, ad_b}};

  SUBCASE("alpha_t zero is a coin flip regardless of features") {
    BehaviorParams params;
    params.alpha_t = 0.0;
    const double rate =
        EstimateFirstAdRate(params, actives, FeatureVector::FromString("1111"), 200000, 1);
    CHECK(rate == doctest::Approx(0.5).epsilon(0.01));
  }

  SUBCASE("zero closeness difference is a coin flip") {
    BehaviorParams params;
    params.alpha_t = 1.0;
    // Ads two bits apart; 0111 matches exactly one differing bit of each.
    const FeatureVector far_b = FeatureVector::FromString("0011");
    const std::vector<ActiveAd> split = {{ad_a, ad_a}, {far_b, far_b}};
    const double rate =
        EstimateFirstAdRate(params, split, FeatureVector::FromString("0111"), 200000, 2);
    CHECK(rate == doctest::Approx(0.5).epsilon(0.01));
  }

  SUBCASE("delta 0.25 at alpha_t one gives 0.625") {
    BehaviorParams params;
    params.alpha_t = 1.0;
    const double rate =
        EstimateFirstAdRate(params, actives, FeatureVector::FromString("1111"), 400000, 3);
    CHECK(rate == doctest::Approx(0.625).epsilon(0.01));
  }

  SUBCASE("other active-ad counts fall back to uniform") {
    BehaviorParams params;
    const std::vector<ActiveAd> three = {{ad_a, ad_a}, {ad_b, ad_b}, {ad_a, ad_a}};
    RngStream rng(4);
    int first = 0;
    for (int i = 0; i < 90000; ++i) {
      const FeatureVector pick =
          TargetingPairwise(params, three, ad_a, kDefaultSite, rng);
      if (pick == ad_b) ++first;
    }
    CHECK(static_cast<double>(first) / 90000 == doctest::Approx(1.0 / 3).epsilon(0.05));
    CHECK_THROWS_AS(TargetingPairwise(params, {}, ad_a, kDefaultSite, rng), ConfigError);
  }
}

TEST_CASE("pairwise targeting satisfies the utility contract over the whole cube") {
  // P(first ad | x) - P(second ad | x) must equal alpha_t * delta_x for
  // every feature vector, up to Monte-Carlo error.
  const FeatureVector ad_a = FeatureVector::FromString("1111");
  const FeatureVector ad_b = FeatureVector::FromString("1110");
  const std::vector<ActiveAd> actives = {{ad_a, ad_a}, {ad_b, ad_b}};
  BehaviorParams params;
  params.alpha_t = 0.6;
  const int draws = 40000;
  for (std::uint32_t bits = 0; bits < 16; ++bits) {
    const FeatureVector x(bits, 4);
    const double delta = Closeness(ad_a, x) - Closeness(ad_b, x);
    const double rate = EstimateFirstAdRate(params, actives, x, draws, 100 + bits);
    const double expected = 0.5 * (1.0 + params.alpha_t * delta);
    const double sigma = std::sqrt(expected * (1.0 - expected) / draws);
    CHECK(std::abs(rate - expected) < 3.5 * sigma + 1e-9);
  }
}

TEST_CASE("bernoulli engagement follows alpha_e times closeness") {
  const FeatureVector features = FeatureVector::FromString("1111");

  SUBCASE("alpha_e zero never converts") {
    BehaviorParams params;
    params.alpha_e = 0.0;
    RngStream rng(5);
    for (int i = 0; i < 1000; ++i) {
      CHECK_FALSE(EngagementBernoulli(params, features, kDefaultSite, features, rng));
    }
  }

  SUBCASE("alpha_e one on an identical ad always converts") {
    BehaviorParams params;
    params.alpha_e = 1.0;
    RngStream rng(6);
    for (int i = 0; i < 1000; ++i) {
      CHECK(EngagementBernoulli(params, features, kDefaultSite, features, rng));
    }
  }

  SUBCASE("product of alpha_e and closeness within monte-carlo error") {
    BehaviorParams params;
    params.alpha_e = 0.05;
    // closeness 0.8 at length 5.
    const FeatureVector x = FeatureVector::FromString("11111");
    const FeatureVector ad = FeatureVector::FromString("11110");
    RngStream rng(7);
    const int draws = 1000000;
    int hits = 0;
    for (int i = 0; i < draws; ++i) {
      if (EngagementBernoulli(params, x, kDefaultSite, ad, rng)) ++hits;
    }
    const double rate = static_cast<double>(hits) / draws;
    const double expected = 0.04;
    const double sigma = std::sqrt(expected * (1.0 - expected) / draws);
    CHECK(std::abs(rate - expected) < 3.0 * sigma);
  }

  SUBCASE("engagement differences track closeness differences") {
    BehaviorParams params;
    params.alpha_e = 0.5;
    const FeatureVector ad_a = FeatureVector::FromString("1111");
    const FeatureVector ad_b = FeatureVector::FromString("0011");
    const int draws = 200000;
    for (std::uint32_t bits = 0; bits < 16; ++bits) {
      const FeatureVector x(bits, 4);
      RngStream rng(900 + bits);
      int a_hits = 0, b_hits = 0;
      for (int i = 0; i < draws; ++i) {
        if (EngagementBernoulli(params, x, kDefaultSite, ad_a, rng)) ++a_hits;
        if (EngagementBernoulli(params, x, kDefaultSite, ad_b, rng)) ++b_hits;
      }
      const double diff = static_cast<double>(a_hits - b_hits) / draws;
      const double expected = params.alpha_e * (Closeness(ad_a, x) - Closeness(ad_b, x));
      CHECK(std::abs(diff - expected) < 3.5 * std::sqrt(0.5 / draws));
    }
  }
}

TEST_CASE("last-touch attribution credits the converting impression") {
  const FeatureVector ad_a = FeatureVector::FromString("1111");
  const FeatureVector ad_b = FeatureVector::FromString("0111");

  SUBCASE("single converting entry") {
    std::vector<BrowsingEntry> slice = {{kDefaultSite, ad_a, Conversion::kConverted}};
    const auto scores = AttributionLastTouch(slice);
    REQUIRE(scores.size() == 1);
    CHECK(scores[0].first == ad_a);
    CHECK(scores[0].second == doctest::Approx(1.0));
  }

  SUBCASE("earlier unconverted impressions get nothing") {
    std::vector<BrowsingEntry> slice = {{kDefaultSite, ad_b, Conversion::kNone},
                                        {kDefaultSite, ad_a, Conversion::kConverted}};
    const auto scores = AttributionLastTouch(slice);
    REQUIRE(scores.size() == 1);
    CHECK(scores[0].first == ad_a);
  }

  SUBCASE("no conversion yields an empty allocation") {
    std::vector<BrowsingEntry> slice = {{kDefaultSite, ad_b, Conversion::kNone}};
    CHECK(AttributionLastTouch(slice).empty());
  }
}

TEST_CASE("identity reporting returns its input") {
  for (double a : {0.0, 3.0, 17.5}) {
    Report scores;
    scores[FeatureVector::FromString("11")] = a;
    scores[FeatureVector::FromString("01")] = a * 2;
    CHECK(ReportingIdentity(scores) == scores);
  }
}

TEST_CASE("dp reporting") {
  Report scores;
  scores[FeatureVector::FromString("11")] = 50.0;

  SUBCASE("requires epsilon") {
    BehaviorParams params;
    RngStream rng(1);
    CHECK_THROWS_AS(ReportingDp(params, scores, rng), ConfigError);
  }

  SUBCASE("fixed seed reproduces the release") {
    BehaviorParams params;
    params.epsilon = 0.5;
    RngStream a(2), b(2);
    CHECK(ReportingDp(params, scores, a) == ReportingDp(params, scores, b));
  }

  SUBCASE("noise is centered: mean of many releases returns the score") {
    BehaviorParams params;
    params.epsilon = 0.5;
    RngStream rng(3);
    double sum = 0.0;
    const int reps = 100000;
    for (int i = 0; i < reps; ++i) {
      sum += ReportingDp(params, scores, rng).at(FeatureVector::FromString("11"));
    }
    CHECK(sum / reps == doctest::Approx(50.0).epsilon(0.002));
  }
}
