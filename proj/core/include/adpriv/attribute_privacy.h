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

#ifndef ADPRIV_ATTRIBUTE_PRIVACY_H_
#define ADPRIV_ATTRIBUTE_PRIVACY_H_

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "adpriv/behaviors.h"
#include "adpriv/distinguishing.h"
#include "adpriv/feature_space.h"

namespace adpriv {

// Brute-force verification machinery for distributional (Pufferfish-style)
// privacy of small mechanisms, plus the leakage witness that ties a positive
// distinguishing advantage to a concrete violated attribute.

using Dataset = std::vector<FeatureVector>;

// Fraction of records whose attribute `bit` is 1.
double AttributeFraction(const Dataset& dataset, int bit);

struct SecretPredicate {
  std::string name;
  std::function<bool(const Dataset&)> holds;
};

SecretPredicate FractionAtLeast(int bit, double tau);
SecretPredicate FractionAtMost(int bit, double tau);

// One candidate data-generating process: record_count iid draws from the
// record distribution.
struct DatasetPrior {
  std::string name;
  ExplicitDistribution record_distribution;
  int record_count = 0;
};

struct PufferfishFramework {
  std::vector<SecretPredicate> secrets;
  std::vector<std::pair<int, int>> secret_pairs;  // index pairs into secrets
  std::vector<DatasetPrior> priors;
};

// A mechanism under audit: maps a concrete dataset to its exact output
// distribution over `num_cells` discrete output cells.
using Mechanism = std::function<std::vector<double>(const Dataset&)>;

struct PufferfishWitness {
  int prior_index = 0;
  int pair_index = 0;
  int cell = 0;
  double p_first = 0.0;   // P(M(X) = cell | first secret, prior)
  double p_second = 0.0;  // P(M(X) = cell | second secret, prior)
  double epsilon = 0.0;
};

struct PufferfishVerdict {
  bool satisfied = false;
  std::optional<PufferfishWitness> witness;  // the first violating triple
};

// Checks e^-eps <= P(M=w | s_i, theta) / P(M=w | s_j, theta) <= e^eps for
// every prior, secret pair, and output cell by full enumeration of the
// dataset space. Requires record_count * dimension small enough to
// enumerate; throws InfeasibleSecretError when a paired secret has zero
// probability under a prior.
PufferfishVerdict PufferfishVerify(const Mechanism& mechanism, int num_cells,
                                   const PufferfishFramework& framework, double epsilon);

// P(M = cell | secret, prior) for every cell; the exact quantity whose
// ratios PufferfishVerify checks, exposed so witnesses can be re-derived
// independently.
std::vector<double> ConditionalOutputPmf(const Mechanism& mechanism, int num_cells,
                                         const DatasetPrior& prior,
                                         const SecretPredicate& secret);

struct SensitivitySpec {
  std::function<double(const Dataset&)> statistic;  // F
  int attribute_index = 0;
};

// max over priors and secret pairs of |E[F | s_a] - E[F | s_b]|, by exact
// enumeration of the dataset space.
double Sensitivity(const SensitivitySpec& spec, const PufferfishFramework& framework);

// Same quantity by rejection-sampled Monte Carlo, for spaces too large to
// enumerate; draws until every condition has at least min_accepted accepted
// samples.
double SensitivityMonteCarlo(const SensitivitySpec& spec, const PufferfishFramework& framework,
                             long long min_accepted, std::uint64_t seed);

// Exact pmf over 0..n of the first ad's attributed conversion count when the
// n user feature vectors are fixed to `dataset` (one round per user,
// last-touch attribution, identity report restricted to the first ad).
std::vector<double> AbFirstAdCountPmf(const AbInstance& instance, const BehaviorParams& params,
                                      const Dataset& dataset);

// The pmf above as a mechanism with record_count + 1 output cells.
Mechanism MakeAbCountMechanism(const AbInstance& instance, const BehaviorParams& params);

// Fixed-width bucketing of a real-valued release.
struct OutputGrid {
  double lo = 0.0;
  double width = 0.25;
  int cells = 0;

  // Buckets spanning [-pad, count_range + pad]; the outermost cells absorb
  // the tails.
  static OutputGrid ForCounts(int max_count, double width = 0.25, double pad = 20.0);
  int CellOf(double value) const;
};

// Tulap-noised first-ad count release, discretized onto the grid with exact
// bucket probabilities from the noise CDF.
Mechanism MakeTulapCountMechanism(const AbInstance& instance, const BehaviorParams& params,
                                  double epsilon, const OutputGrid& grid);

struct WitnessVerdict {
  bool violation = false;
  AdvantageEstimate estimate;
  int test_bit = 0;
  // The implied secret pair: the fraction statistic over test_bit expected
  // under either distribution.
  double g_under_d0 = 0.0;
  double g_under_d1 = 0.0;
};

// Runs the distinguishing game; a positive advantage beyond its 3-sigma
// half-width is evidence that the ecosystem's report depends on the
// distribution over test_bit, i.e. that no attribute-privacy guarantee can
// hold for that attribute. Returns inconclusive (violation = false)
// otherwise.
WitnessVerdict ViolationWitness(const GameConfig& config, int trials, int threads = 1);

}  // namespace adpriv

#endif  // ADPRIV_ATTRIBUTE_PRIVACY_H_
