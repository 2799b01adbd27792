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

#ifndef ADPRIV_DISTINGUISHING_H_
#define ADPRIV_DISTINGUISHING_H_

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "adpriv/analysis.h"
#include "adpriv/behaviors.h"
#include "adpriv/dp_stats.h"
#include "adpriv/ecosystem.h"
#include "adpriv/feature_space.h"

namespace adpriv {

// One A/B distinguishing instance: a ground-truth distribution d0, the
// challenger's alternate d1 (same correlation, shifted marginal on test_bit),
// and two ads differing in exactly that bit. Each ad is registered as its
// own single-ad campaign with the ad as audience, so the active pairs are
// (ad_a, ad_a) and (ad_b, ad_b) and targeting can discriminate on test_bit.
struct AbInstance {
  ExplicitDistribution d0;
  ExplicitDistribution d1;
  FeatureVector ad_a;
  FeatureVector ad_b;
  int test_bit = 0;
};

// Standard builder: ad_a is all-ones (test bit 1), ad_b flips only the test
// bit; d1 derives from the base spec by moving the test bit's marginal.
AbInstance MakeAbInstance(const CorrelatedBernoulliSpec& base, int test_bit,
                          double alt_marginal);

struct GameConfig {
  AbInstance instance;
  BehaviorParams behavior;
  int campaign_size = 0;
  int rounds_per_user = 1;
  double level = 0.05;
  std::uint64_t master_seed = 0;

  void Validate() const;
};

// What the adversary precomputes from public knowledge (d0, d1, the campaign
// and the behavior parameters): the per-impression probability that the
// first ad collects an attributed conversion under either distribution,
// which side of the test is informative, and the noise model when reporting
// is privatized.
struct AdversaryCalibration {
  double null_p = 0.0;
  double alt_p = 0.0;
  TestSide side = TestSide::kUpper;
  std::optional<TulapParams> noise;
};

AdversaryCalibration CalibrateAdversary(const GameConfig& config);

// One full pass through the ecosystem: fresh instance with society
// distribution d_b, both single-ad campaigns registered, for every user
// rounds_per_user browse/target/engage rounds, then attribution of every
// conversion, then one report per campaign merged into a single map keyed by
// the two ads.
Report RunExec(const GameConfig& config, int society_bit, RngStream& rng);

// The adversary's processing function f_s: a one-sided test of the first
// ad's (possibly noisy) reported count against the calibrated null.
bool AdversaryRejects(const GameConfig& config, const AdversaryCalibration& calibration,
                      const Report& report);

// One distinguishing trial: b uniform, run EXEC with d_b, guess b = 1 iff
// the test rejects. Returns whether the guess was correct.
bool RunTrial(const GameConfig& config, const AdversaryCalibration& calibration, RngStream& rng);
bool RunTrial(const GameConfig& config, RngStream& rng);

struct AdvantageEstimate {
  double advantage = 0.0;  // 2 * P(correct) - 1
  int trials = 0;
  double half_width_3sigma = 0.0;
};

// Monte-Carlo advantage over `trials` independent games; per-trial streams
// derive from config.master_seed, so results are independent of thread count.
AdvantageEstimate EstimateAdvantage(const GameConfig& config, int trials, int threads = 1);

struct SCResult {
  long long minimal_n = 0;
  double power_at_n = 0.0;
  double level = 0.05;
  double target_power = 0.8;
  // Every (n, power) probe evaluated by the search, ascending in n. The probe
  // just below minimal_n documents the bracketing evidence.
  std::vector<std::pair<long long, double>> search_trace;
};

struct SampleComplexitySearch {
  explicit SampleComplexitySearch(GameConfig game_config) : game(std::move(game_config)) {}

  GameConfig game;  // campaign_size is overwritten per probe

  // kEcosystem runs the full simulator; kBaseline draws the test bit
  // directly from d_b and applies the exact binomial test, bypassing the
  // ecosystem entirely.
  enum class Mode { kEcosystem, kBaseline };
  Mode mode = Mode::kEcosystem;

  double target_power = 0.8;
  int trials_per_point = 400;
  long long ceiling = 10'000'000;
  int threads = 1;
  // Extra seed path component. Searches sharing a salt evaluate identical
  // user randomness at equal n, which pairs arms for ordering comparisons.
  std::uint64_t seed_salt = 0;
};

// Fraction of d1-runs rejected by the level test at campaign size n.
double EstimatePower(const SampleComplexitySearch& search, long long n);

// Minimal campaign size whose power reaches target_power: exponential
// doubling from 16 to bracket, then binary search. Throws DegenerateError if
// d0 and d1 are indistinguishable (TV <= 1e-6) and CeilingError (with the
// partial trace) if the bracket exceeds the ceiling.
SCResult FindSampleComplexity(const SampleComplexitySearch& search);

}  // namespace adpriv

#endif  // ADPRIV_DISTINGUISHING_H_
