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

#ifndef ADPRIV_FEATURE_SPACE_H_
#define ADPRIV_FEATURE_SPACE_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "adpriv/errors.h"
#include "adpriv/rng.h"

namespace adpriv {

// A binary feature vector of fixed length. The same type carries user
// features, ad content, and target audiences; position i means the same
// attribute in all three roles. Bits are packed so that Hamming work is a
// single popcount.
class FeatureVector {
 public:
  static constexpr int kMaxLength = 20;

  FeatureVector(std::uint32_t bits, int length);

  // Parses e.g. "1010": character i becomes bit i.
  static FeatureVector FromString(const std::string& s);

  static FeatureVector Zeros(int length) { return FeatureVector(0, length); }
  static FeatureVector Ones(int length);

  int length() const { return length_; }
  std::uint32_t bits() const { return bits_; }
  bool bit(int i) const;
  FeatureVector WithBit(int i, bool value) const;
  int CountOnes() const;
  std::string ToString() const;

  friend bool operator==(const FeatureVector& a, const FeatureVector& b) {
    return a.length_ == b.length_ && a.bits_ == b.bits_;
  }
  friend bool operator!=(const FeatureVector& a, const FeatureVector& b) { return !(a == b); }
  friend bool operator<(const FeatureVector& a, const FeatureVector& b) {
    return a.length_ != b.length_ ? a.length_ < b.length_ : a.bits_ < b.bits_;
  }

 private:
  std::uint32_t bits_;
  int length_;
};

// Normalized Hamming similarity: 1 - hammingDistance(a, b) / length. Symmetric,
// 1 on identical inputs, 0 on complements, values on the grid {0, 1/l, ..., 1}.
double Closeness(const FeatureVector& a, const FeatureVector& b);

// An explicit probability mass function over {0,1}^dimension. Outcome index
// encodes the vector: bit i of the index is feature i. Validated on
// construction: masses nonnegative, total within 1e-9 of one. Immutable after
// construction and therefore freely shareable across threads.
class ExplicitDistribution {
 public:
  static constexpr int kMaxDimension = FeatureVector::kMaxLength;
  static constexpr double kNormalizationTolerance = 1e-9;

  ExplicitDistribution(int dimension, std::vector<double> pmf);

  static ExplicitDistribution PointMass(const FeatureVector& v);
  static ExplicitDistribution Uniform(int dimension);
  // Product of independent Bernoulli marginals.
  static ExplicitDistribution FromMarginals(std::span<const double> marginals);

  int dimension() const { return dimension_; }
  std::size_t size() const { return pmf_.size(); }
  const std::vector<double>& pmf() const { return pmf_; }
  double prob(std::uint32_t outcome) const { return pmf_[outcome]; }
  double prob(const FeatureVector& v) const;

  // P(bit i = 1).
  double Marginal(int bit) const;

  // Inverse-CDF draw; deterministic given the stream state.
  FeatureVector Sample(RngStream& rng) const;

 private:
  int dimension_;
  std::vector<double> pmf_;
  std::vector<double> cdf_;
};

double TotalVariation(const ExplicitDistribution& p, const ExplicitDistribution& q);

// 1/2 * sum_x (sqrt(p(x)) - sqrt(q(x)))^2. Inputs may be sub-distributions
// (total mass <= 1); the formula is applied verbatim without renormalization.
double HellingerSquared(const ExplicitDistribution& p, const ExplicitDistribution& q);
double HellingerSquared(std::span<const double> p, std::span<const double> q);

// A correlated-Bernoulli generator: per-bit marginals plus a latent Gaussian
// copula correlation matrix (symmetric, unit diagonal, entries in [-1, 1],
// positive semidefinite). Bit i is 1 iff the i-th latent normal falls below
// the quantile of marginals[i].
struct CorrelatedBernoulliSpec {
  std::vector<double> marginals;
  std::vector<double> correlation;  // row-major length x length

  int length() const { return static_cast<int>(marginals.size()); }
  double corr(int i, int j) const { return correlation[static_cast<std::size_t>(i) * marginals.size() + j]; }

  static CorrelatedBernoulliSpec Independent(std::vector<double> marginals);
  // Constant off-diagonal latent correlation rho.
  static CorrelatedBernoulliSpec Exchangeable(std::vector<double> marginals, double rho);
};

// How Materialize computed its result.
struct MaterializeReport {
  enum class Method { kProduct, kOneFactorQuadrature, kMonteCarlo };
  Method method = Method::kProduct;
  std::uint64_t mc_draws = 0;
  std::uint64_t mc_seed = 0;
};

// Expands the generator into an exact PMF over {0,1}^length (length <= 12).
//
// Independent and one-factor correlation structures (which include the
// exchangeable family) are integrated by quadrature over the shared latent
// factor and are exact to near machine precision. General PSD matrices fall
// back to a seeded Monte Carlo histogram (seed derived from the spec itself,
// draw count recorded in `report`) followed by iterative proportional
// fitting, which pins every per-bit marginal to the spec far inside the 1e-6
// contract while keeping the sampled dependence structure.
ExplicitDistribution Materialize(const CorrelatedBernoulliSpec& spec,
                                 MaterializeReport* report = nullptr);

// Same spec with marginals[test_bit] replaced; correlation untouched.
CorrelatedBernoulliSpec DeriveAlternate(const CorrelatedBernoulliSpec& spec, int test_bit,
                                        double new_marginal);

}  // namespace adpriv

#endif  // ADPRIV_FEATURE_SPACE_H_
