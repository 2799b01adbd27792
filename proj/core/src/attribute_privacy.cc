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

#include "adpriv/attribute_privacy.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "adpriv/dp_stats.h"
#include "adpriv/errors.h"

namespace adpriv {

namespace {

constexpr std::uint64_t kMaxEnumeratedDatasets = std::uint64_t{1} << 20;

// Iterates every dataset of `record_count` records over {0,1}^dim, invoking
// visit(dataset, prior_probability).
template <typename Visitor>
void EnumerateDatasets(const DatasetPrior& prior, Visitor&& visit) {
  const int dim = prior.record_distribution.dimension();
  const std::uint64_t outcomes = std::uint64_t{1} << dim;
  if (prior.record_count < 1) throw ConfigError("prior needs at least one record");
  const double total_bits = static_cast<double>(prior.record_count) * dim;
  if (total_bits > 20.0) {
    throw CapacityError("dataset space too large to enumerate: 2^" +
                        std::to_string(static_cast<int>(total_bits)) + " datasets");
  }
  const std::uint64_t total = std::uint64_t{1} << (prior.record_count * dim);
  if (total > kMaxEnumeratedDatasets) {
    throw CapacityError("dataset space too large to enumerate");
  }
  Dataset dataset;
  dataset.reserve(static_cast<std::size_t>(prior.record_count));
  for (std::uint64_t code = 0; code < total; ++code) {
    dataset.clear();
    double weight = 1.0;
    std::uint64_t rest = code;
    for (int r = 0; r < prior.record_count; ++r) {
      const std::uint32_t outcome = static_cast<std::uint32_t>(rest % outcomes);
      rest /= outcomes;
      dataset.emplace_back(outcome, dim);
      weight *= prior.record_distribution.prob(outcome);
    }
    visit(static_cast<const Dataset&>(dataset), weight);
  }
}

void ValidateFramework(const PufferfishFramework& framework) {
  if (framework.priors.empty()) throw ConfigError("framework needs at least one prior");
  if (framework.secret_pairs.empty()) throw ConfigError("framework needs at least one secret pair");
  for (const auto& [i, j] : framework.secret_pairs) {
    const int count = static_cast<int>(framework.secrets.size());
    if (i < 0 || j < 0 || i >= count || j >= count) {
      throw ConfigError("secret pair index out of range");
    }
    if (i == j) throw ConfigError("secret pair must name two distinct predicates");
  }
}

}  // namespace

double AttributeFraction(const Dataset& dataset, int bit) {
  if (dataset.empty()) throw ConfigError("fraction of an empty dataset is undefined");
  int count = 0;
  for (const FeatureVector& record : dataset) {
    if (record.bit(bit)) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(dataset.size());
}

SecretPredicate FractionAtLeast(int bit, double tau) {
  return SecretPredicate{
      "frac(bit " + std::to_string(bit) + ") >= " + std::to_string(tau),
      [bit, tau](const Dataset& d) { return AttributeFraction(d, bit) >= tau; }};
}

SecretPredicate FractionAtMost(int bit, double tau) {
  return SecretPredicate{
      "frac(bit " + std::to_string(bit) + ") <= " + std::to_string(tau),
      [bit, tau](const Dataset& d) { return AttributeFraction(d, bit) <= tau; }};
}

std::vector<double> ConditionalOutputPmf(const Mechanism& mechanism, int num_cells,
                                         const DatasetPrior& prior,
                                         const SecretPredicate& secret) {
  std::vector<double> conditional(static_cast<std::size_t>(num_cells), 0.0);
  double mass = 0.0;
  EnumerateDatasets(prior, [&](const Dataset& dataset, double weight) {
    if (weight <= 0.0 || !secret.holds(dataset)) return;
    mass += weight;
    const std::vector<double> out = mechanism(dataset);
    if (out.size() != static_cast<std::size_t>(num_cells)) {
      throw ConfigError("mechanism produced an unexpected number of output cells");
    }
    for (int c = 0; c < num_cells; ++c) {
      conditional[static_cast<std::size_t>(c)] += weight * out[static_cast<std::size_t>(c)];
    }
  });
  if (mass <= 0.0) {
    throw InfeasibleSecretError("secret '" + secret.name + "' has zero probability under prior '" +
                                prior.name + "'");
  }
  for (double& p : conditional) p /= mass;
  return conditional;
}

PufferfishVerdict PufferfishVerify(const Mechanism& mechanism, int num_cells,
                                   const PufferfishFramework& framework, double epsilon) {
  ValidateFramework(framework);
  if (epsilon < 0.0) throw ConfigError("epsilon must be nonnegative");
  const double upper = std::exp(epsilon);
  // Slack for accumulated floating-point error in the exact enumeration.
  constexpr double kSlack = 1.0 + 1e-9;
  constexpr double kNegligible = 1e-15;

  for (std::size_t prior_idx = 0; prior_idx < framework.priors.size(); ++prior_idx) {
    const DatasetPrior& prior = framework.priors[prior_idx];
    // Conditionals per secret are shared across the pairs that use them.
    std::map<int, std::vector<double>> conditionals;
    auto conditional_for = [&](int secret_idx) -> const std::vector<double>& {
      auto it = conditionals.find(secret_idx);
      if (it == conditionals.end()) {
        it = conditionals
                 .emplace(secret_idx,
                          ConditionalOutputPmf(mechanism, num_cells, prior,
                                               framework.secrets[static_cast<std::size_t>(
                                                   secret_idx)]))
                 .first;
      }
      return it->second;
    };

    for (std::size_t pair_idx = 0; pair_idx < framework.secret_pairs.size(); ++pair_idx) {
      const auto [first, second] = framework.secret_pairs[pair_idx];
      const std::vector<double>& p_first = conditional_for(first);
      const std::vector<double>& p_second = conditional_for(second);
      for (int cell = 0; cell < num_cells; ++cell) {
        const double a = p_first[static_cast<std::size_t>(cell)];
        const double b = p_second[static_cast<std::size_t>(cell)];
        if (a <= kNegligible && b <= kNegligible) continue;
        const bool violated =
            (b <= kNegligible) || (a <= kNegligible) || (a > b * upper * kSlack) ||
            (b > a * upper * kSlack);
        if (violated) {
          PufferfishWitness witness;
          witness.prior_index = static_cast<int>(prior_idx);
          witness.pair_index = static_cast<int>(pair_idx);
          witness.cell = cell;
          witness.p_first = a;
          witness.p_second = b;
          witness.epsilon = epsilon;
          return PufferfishVerdict{false, witness};
        }
      }
    }
  }
  return PufferfishVerdict{true, std::nullopt};
}

double Sensitivity(const SensitivitySpec& spec, const PufferfishFramework& framework) {
  ValidateFramework(framework);
  double worst = 0.0;
  for (const DatasetPrior& prior : framework.priors) {
    std::map<int, std::pair<double, double>> moments;  // secret -> (mass, weighted F)
    for (const auto& [i, j] : framework.secret_pairs) {
      moments.emplace(i, std::make_pair(0.0, 0.0));
      moments.emplace(j, std::make_pair(0.0, 0.0));
    }
    EnumerateDatasets(prior, [&](const Dataset& dataset, double weight) {
      if (weight <= 0.0) return;
      double value = 0.0;
      bool computed = false;
      for (auto& [secret_idx, acc] : moments) {
        if (!framework.secrets[static_cast<std::size_t>(secret_idx)].holds(dataset)) continue;
        if (!computed) {
          value = spec.statistic(dataset);
          computed = true;
        }
        acc.first += weight;
        acc.second += weight * value;
      }
    });
    for (const auto& [i, j] : framework.secret_pairs) {
      const auto& [mass_i, sum_i] = moments.at(i);
      const auto& [mass_j, sum_j] = moments.at(j);
      if (mass_i <= 0.0 || mass_j <= 0.0) {
        throw InfeasibleSecretError("a paired secret has zero probability under prior '" +
                                    prior.name + "'");
      }
      worst = std::max(worst, std::abs(sum_i / mass_i - sum_j / mass_j));
    }
  }
  return worst;
}

double SensitivityMonteCarlo(const SensitivitySpec& spec, const PufferfishFramework& framework,
                             long long min_accepted, std::uint64_t seed) {
  ValidateFramework(framework);
  if (min_accepted < 1) throw ConfigError("need at least one accepted sample");
  double worst = 0.0;
  for (std::size_t prior_idx = 0; prior_idx < framework.priors.size(); ++prior_idx) {
    const DatasetPrior& prior = framework.priors[prior_idx];
    std::map<int, std::pair<long long, double>> moments;  // secret -> (count, sum)
    for (const auto& [i, j] : framework.secret_pairs) {
      moments.emplace(i, std::make_pair(0LL, 0.0));
      moments.emplace(j, std::make_pair(0LL, 0.0));
    }
    RngStream rng(DeriveSeed(seed, {0x5E45, prior_idx}));
    Dataset dataset(static_cast<std::size_t>(prior.record_count),
                    FeatureVector(0, prior.record_distribution.dimension()));
    const long long max_draws = min_accepted * 100000;
    long long draws = 0;
    auto unfinished = [&]() {
      for (const auto& [idx, acc] : moments) {
        if (acc.first < min_accepted) return true;
      }
      return false;
    };
    while (unfinished()) {
      if (++draws > max_draws) {
        throw InfeasibleSecretError(
            "rejection sampling did not reach the acceptance floor; a secret is too rare under "
            "prior '" +
            prior.name + "'");
      }
      for (int r = 0; r < prior.record_count; ++r) {
        dataset[static_cast<std::size_t>(r)] = prior.record_distribution.Sample(rng);
      }
      double value = 0.0;
      bool computed = false;
      for (auto& [secret_idx, acc] : moments) {
        if (!framework.secrets[static_cast<std::size_t>(secret_idx)].holds(dataset)) continue;
        if (!computed) {
          value = spec.statistic(dataset);
          computed = true;
        }
        acc.first += 1;
        acc.second += value;
      }
    }
    for (const auto& [i, j] : framework.secret_pairs) {
      const auto& [count_i, sum_i] = moments.at(i);
      const auto& [count_j, sum_j] = moments.at(j);
      worst = std::max(worst, std::abs(sum_i / static_cast<double>(count_i) -
                                       sum_j / static_cast<double>(count_j)));
    }
  }
  return worst;
}

std::vector<double> AbFirstAdCountPmf(const AbInstance& instance, const BehaviorParams& params,
                                      const Dataset& dataset) {
  params.Validate();
  const std::size_t n = dataset.size();
  if (n == 0) throw ConfigError("dataset must be non-empty");
  std::vector<double> pmf(n + 1, 0.0);
  pmf[0] = 1.0;
  for (std::size_t u = 0; u < n; ++u) {
    const FeatureVector& x = dataset[u];
    const FeatureVector filtered = RhoApply(params.rho_mask, x);
    const double delta = Closeness(instance.ad_a, filtered) - Closeness(instance.ad_b, filtered);
    const double show_first = std::clamp(0.5 * (1.0 + params.alpha_t * delta), 0.0, 1.0);
    const double p_hit = show_first * params.alpha_e * Closeness(instance.ad_a, x);
    for (std::size_t c = u + 1; c > 0; --c) {
      pmf[c] = pmf[c] * (1.0 - p_hit) + pmf[c - 1] * p_hit;
    }
    pmf[0] *= 1.0 - p_hit;
  }
  return pmf;
}

Mechanism MakeAbCountMechanism(const AbInstance& instance, const BehaviorParams& params) {
  return [instance, params](const Dataset& dataset) {
    return AbFirstAdCountPmf(instance, params, dataset);
  };
}

OutputGrid OutputGrid::ForCounts(int max_count, double width, double pad) {
  OutputGrid grid;
  grid.lo = -pad;
  grid.width = width;
  grid.cells = static_cast<int>(std::ceil((static_cast<double>(max_count) + 2.0 * pad) / width)) + 1;
  return grid;
}

int OutputGrid::CellOf(double value) const {
  const int cell = static_cast<int>(std::floor((value - lo) / width));
  return std::clamp(cell, 0, cells - 1);
}

Mechanism MakeTulapCountMechanism(const AbInstance& instance, const BehaviorParams& params,
                                  double epsilon, const OutputGrid& grid) {
  const TulapParams noise = TulapParams::FromEpsilon(epsilon);
  return [instance, params, noise, grid](const Dataset& dataset) {
    const std::vector<double> counts = AbFirstAdCountPmf(instance, params, dataset);
    std::vector<double> out(static_cast<std::size_t>(grid.cells), 0.0);
    for (std::size_t count = 0; count < counts.size(); ++count) {
      if (counts[count] <= 0.0) continue;
      for (int cell = 0; cell < grid.cells; ++cell) {
        const double a = grid.lo + cell * grid.width - static_cast<double>(count);
        const double b = a + grid.width;
        // Outermost cells absorb the tails so the bucket pmf sums to one.
        const double mass_lo = cell == 0 ? 0.0 : TulapCdf(noise, a);
        const double mass_hi = cell == grid.cells - 1 ? 1.0 : TulapCdf(noise, b);
        out[static_cast<std::size_t>(cell)] += counts[count] * (mass_hi - mass_lo);
      }
    }
    return out;
  };
}

WitnessVerdict ViolationWitness(const GameConfig& config, int trials, int threads) {
  WitnessVerdict verdict;
  verdict.test_bit = config.instance.test_bit;
  verdict.g_under_d0 = config.instance.d0.Marginal(config.instance.test_bit);
  verdict.g_under_d1 = config.instance.d1.Marginal(config.instance.test_bit);
  verdict.estimate = EstimateAdvantage(config, trials, threads);
  verdict.violation =
      verdict.estimate.advantage - verdict.estimate.half_width_3sigma > 0.0;
  return verdict;
}

}  // namespace adpriv
