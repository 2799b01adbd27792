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

#include "adpriv/feature_space.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>

namespace adpriv {

namespace {

constexpr int kMaterializeMaxDimension = 12;
constexpr std::uint64_t kMonteCarloDraws = std::uint64_t{1} << 22;
constexpr double kLatentIntegrationBound = 8.5;
constexpr int kQuadratureNodes = 256;

double NormalCdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double NormalQuantile(double p) {
  static const boost::math::normal_distribution<double> kStdNormal(0.0, 1.0);
  return boost::math::quantile(kStdNormal, p);
}

}  // namespace

FeatureVector::FeatureVector(std::uint32_t bits, int length) : bits_(bits), length_(length) {
  if (length < 1 || length > kMaxLength) {
    throw DimensionError("feature vector length must be in [1, " +
                         std::to_string(kMaxLength) + "], got " + std::to_string(length));
  }
  bits_ &= (std::uint32_t{1} << length) - 1;
}

FeatureVector FeatureVector::FromString(const std::string& s) {
  std::uint32_t bits = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '1') {
      bits |= std::uint32_t{1} << i;
    } else if (s[i] != '0') {
      throw DimensionError("feature vector string must be binary, got '" + s + "'");
    }
  }
  return FeatureVector(bits, static_cast<int>(s.size()));
}

FeatureVector FeatureVector::Ones(int length) {
  FeatureVector v(0, length);
  v.bits_ = (std::uint32_t{1} << length) - 1;
  return v;
}

bool FeatureVector::bit(int i) const {
  if (i < 0 || i >= length_) {
    throw DimensionError("bit index " + std::to_string(i) + " out of range for length " +
                         std::to_string(length_));
  }
  return (bits_ >> i) & 1u;
}

FeatureVector FeatureVector::WithBit(int i, bool value) const {
  if (i < 0 || i >= length_) {
    throw DimensionError("bit index " + std::to_string(i) + " out of range for length " +
                         std::to_string(length_));
  }
  std::uint32_t bits = bits_;
  if (value) {
    bits |= std::uint32_t{1} << i;
  } else {
    bits &= ~(std::uint32_t{1} << i);
  }
  return FeatureVector(bits, length_);
}

int FeatureVector::CountOnes() const { return std::popcount(bits_); }

std::string FeatureVector::ToString() const {
  std::string s(static_cast<std::size_t>(length_), '0');
  for (int i = 0; i < length_; ++i) {
    if ((bits_ >> i) & 1u) s[static_cast<std::size_t>(i)] = '1';
  }
  return s;
}

double Closeness(const FeatureVector& a, const FeatureVector& b) {
  if (a.length() != b.length()) {
    throw DimensionError("closeness requires equal lengths, got " +
                         std::to_string(a.length()) + " and " + std::to_string(b.length()));
  }
  const int hamming = std::popcount(a.bits() ^ b.bits());
  return 1.0 - static_cast<double>(hamming) / a.length();
}

ExplicitDistribution::ExplicitDistribution(int dimension, std::vector<double> pmf)
    : dimension_(dimension), pmf_(std::move(pmf)) {
  if (dimension < 1 || dimension > kMaxDimension) {
    throw DimensionError("distribution dimension must be in [1, " +
                         std::to_string(kMaxDimension) + "], got " + std::to_string(dimension));
  }
  if (pmf_.size() != (std::size_t{1} << dimension)) {
    throw DimensionError("pmf must enumerate all 2^dimension outcomes");
  }
  double total = 0.0;
  for (double& p : pmf_) {
    if (p < 0.0) {
      if (p < -1e-12) throw ModelError("negative probability mass");
      p = 0.0;
    }
    total += p;
  }
  if (std::abs(total - 1.0) > kNormalizationTolerance) {
    throw ModelError("pmf sums to " + std::to_string(total) + ", expected 1 within 1e-9");
  }
  cdf_.resize(pmf_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < pmf_.size(); ++i) {
    acc += pmf_[i];
    cdf_[i] = acc;
  }
}

ExplicitDistribution ExplicitDistribution::PointMass(const FeatureVector& v) {
  std::vector<double> pmf(std::size_t{1} << v.length(), 0.0);
  pmf[v.bits()] = 1.0;
  return ExplicitDistribution(v.length(), std::move(pmf));
}

ExplicitDistribution ExplicitDistribution::Uniform(int dimension) {
  const std::size_t n = std::size_t{1} << dimension;
  return ExplicitDistribution(dimension, std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

ExplicitDistribution ExplicitDistribution::FromMarginals(std::span<const double> marginals) {
  const int dim = static_cast<int>(marginals.size());
  if (dim < 1 || dim > kMaxDimension) {
    throw DimensionError("marginal count out of range");
  }
  std::vector<double> pmf(std::size_t{1} << dim, 0.0);
  pmf[0] = 1.0;
  std::size_t sz = 1;
  for (int bit = 0; bit < dim; ++bit) {
    const double p = marginals[static_cast<std::size_t>(bit)];
    if (p < 0.0 || p > 1.0) throw ModelError("marginal outside [0, 1]");
    for (std::size_t idx = 0; idx < sz; ++idx) {
      pmf[idx | sz] = pmf[idx] * p;
      pmf[idx] *= 1.0 - p;
    }
    sz <<= 1;
  }
  return ExplicitDistribution(dim, std::move(pmf));
}

double ExplicitDistribution::prob(const FeatureVector& v) const {
  if (v.length() != dimension_) throw DimensionError("outcome length mismatch");
  return pmf_[v.bits()];
}

double ExplicitDistribution::Marginal(int bit) const {
  if (bit < 0 || bit >= dimension_) throw DimensionError("marginal bit out of range");
  const std::uint32_t mask = std::uint32_t{1} << bit;
  double total = 0.0;
  for (std::size_t i = 0; i < pmf_.size(); ++i) {
    if (i & mask) total += pmf_[i];
  }
  return total;
}

FeatureVector ExplicitDistribution::Sample(RngStream& rng) const {
  const double u = rng.NextUniform() * cdf_.back();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  std::size_t idx = static_cast<std::size_t>(it - cdf_.begin());
  if (idx >= pmf_.size()) idx = pmf_.size() - 1;
  return FeatureVector(static_cast<std::uint32_t>(idx), dimension_);
}

double TotalVariation(const ExplicitDistribution& p, const ExplicitDistribution& q) {
  if (p.dimension() != q.dimension()) {
    throw DimensionError("total variation requires equal dimensions");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    sum += std::abs(p.pmf()[i] - q.pmf()[i]);
  }
  return 0.5 * sum;
}

double HellingerSquared(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw DimensionError("hellinger requires equal support sizes");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < -1e-12 || q[i] < -1e-12) throw ModelError("negative mass in hellinger input");
    const double d = std::sqrt(std::max(p[i], 0.0)) - std::sqrt(std::max(q[i], 0.0));
    sum += d * d;
  }
  return 0.5 * sum;
}

double HellingerSquared(const ExplicitDistribution& p, const ExplicitDistribution& q) {
  if (p.dimension() != q.dimension()) {
    throw DimensionError("hellinger requires equal dimensions");
  }
  return HellingerSquared(std::span<const double>(p.pmf()), std::span<const double>(q.pmf()));
}

CorrelatedBernoulliSpec CorrelatedBernoulliSpec::Independent(std::vector<double> marginals) {
  const std::size_t n = marginals.size();
  CorrelatedBernoulliSpec spec;
  spec.marginals = std::move(marginals);
  spec.correlation.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) spec.correlation[i * n + i] = 1.0;
  return spec;
}

CorrelatedBernoulliSpec CorrelatedBernoulliSpec::Exchangeable(std::vector<double> marginals,
                                                              double rho) {
  const std::size_t n = marginals.size();
  CorrelatedBernoulliSpec spec;
  spec.marginals = std::move(marginals);
  spec.correlation.assign(n * n, rho);
  for (std::size_t i = 0; i < n; ++i) spec.correlation[i * n + i] = 1.0;
  return spec;
}

namespace {

void ValidateSpec(const CorrelatedBernoulliSpec& spec) {
  const int n = spec.length();
  if (n < 1) throw DimensionError("spec must have at least one marginal");
  if (n > kMaterializeMaxDimension) {
    throw CapacityError("materialize supports at most " +
                        std::to_string(kMaterializeMaxDimension) + " bits, got " +
                        std::to_string(n));
  }
  if (spec.correlation.size() != static_cast<std::size_t>(n) * n) {
    throw DimensionError("correlation matrix size does not match marginals");
  }
  for (double m : spec.marginals) {
    if (!(m >= 0.0 && m <= 1.0)) throw ModelError("marginal outside [0, 1]");
  }
  for (int i = 0; i < n; ++i) {
    if (std::abs(spec.corr(i, i) - 1.0) > 1e-12) {
      throw ModelError("correlation diagonal must be 1");
    }
    for (int j = 0; j < n; ++j) {
      const double r = spec.corr(i, j);
      if (std::abs(r) > 1.0 + 1e-12) throw ModelError("correlation entry outside [-1, 1]");
      if (std::abs(r - spec.corr(j, i)) > 1e-12) throw ModelError("correlation not symmetric");
    }
  }
}

Eigen::MatrixXd ToEigen(const CorrelatedBernoulliSpec& spec) {
  const int n = spec.length();
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = spec.corr(i, j);
  }
  return m;
}

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration.
void GaussLegendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 0; k < n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k + 1.0) * x * p1 - k * p2) / (k + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[static_cast<std::size_t>(i)] = -x;
    nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    weights[static_cast<std::size_t>(i)] = w;
    weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
}

// Attempts an exact one-factor decomposition of the off-diagonal part:
// corr(i, j) = loading[i] * loading[j] for all i != j. Exchangeable matrices
// with rho >= 0 and every rank-one structure land here.
bool FitOneFactor(const CorrelatedBernoulliSpec& spec, std::vector<double>& loading) {
  const int n = spec.length();
  loading.assign(static_cast<std::size_t>(n), 0.0);
  bool any_offdiag = false;
  for (int i = 0; i < n && !any_offdiag; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(spec.corr(i, j)) > 1e-14) {
        any_offdiag = true;
        break;
      }
    }
  }
  if (!any_offdiag) return true;  // independent: all loadings zero
  if (n == 2) {
    const double r = spec.corr(0, 1);
    loading[0] = std::sqrt(std::abs(r));
    loading[1] = std::copysign(std::sqrt(std::abs(r)), r);
    return true;
  }

  // Principal-factor iteration on the communalities.
  Eigen::MatrixXd m = ToEigen(spec);
  Eigen::VectorXd h2(n);
  for (int i = 0; i < n; ++i) {
    double best = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j != i) best = std::max(best, std::abs(spec.corr(i, j)));
    }
    h2(i) = best;
  }
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(n);
  for (int iter = 0; iter < 300; ++iter) {
    for (int i = 0; i < n; ++i) m(i, i) = h2(i);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    const int top = n - 1;
    const double eig = std::max(solver.eigenvalues()(top), 0.0);
    lambda = solver.eigenvectors().col(top) * std::sqrt(eig);
    double delta = 0.0;
    for (int i = 0; i < n; ++i) {
      const double next = lambda(i) * lambda(i);
      delta = std::max(delta, std::abs(next - h2(i)));
      h2(i) = next;
    }
    if (delta < 1e-15) break;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(spec.corr(i, j) - lambda(i) * lambda(j)) > 1e-10) return false;
    }
  }
  for (int i = 0; i < n; ++i) {
    if (std::abs(lambda(i)) > 1.0 + 1e-12) return false;
    loading[static_cast<std::size_t>(i)] = std::clamp(lambda(i), -1.0, 1.0);
  }
  return true;
}

// Expands per-bit probabilities into the product PMF in place.
void AccumulateProduct(std::span<const double> bit_probs, double weight,
                       std::vector<double>& scratch, std::vector<double>& out) {
  scratch[0] = weight;
  std::size_t sz = 1;
  for (double p : bit_probs) {
    for (std::size_t idx = 0; idx < sz; ++idx) {
      scratch[idx | sz] = scratch[idx] * p;
      scratch[idx] *= 1.0 - p;
    }
    sz <<= 1;
  }
  for (std::size_t idx = 0; idx < sz; ++idx) out[idx] += scratch[idx];
}

ExplicitDistribution MaterializeOneFactor(const CorrelatedBernoulliSpec& spec,
                                          std::span<const double> loading) {
  const int n = spec.length();
  const std::size_t outcomes = std::size_t{1} << n;
  std::vector<double> thresholds(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    const double p = spec.marginals[static_cast<std::size_t>(i)];
    if (p <= 0.0) {
      thresholds[static_cast<std::size_t>(i)] = -std::numeric_limits<double>::infinity();
    } else if (p >= 1.0) {
      thresholds[static_cast<std::size_t>(i)] = std::numeric_limits<double>::infinity();
    } else {
      thresholds[static_cast<std::size_t>(i)] = NormalQuantile(p);
    }
  }

  std::vector<double> nodes, weights;
  GaussLegendre(kQuadratureNodes, nodes, weights);
  std::vector<double> pmf(outcomes, 0.0);
  std::vector<double> scratch(outcomes, 0.0);
  std::vector<double> bit_probs(static_cast<std::size_t>(n), 0.0);
  double weight_total = 0.0;
  for (int k = 0; k < kQuadratureNodes; ++k) {
    const double w = kLatentIntegrationBound * nodes[static_cast<std::size_t>(k)];
    const double phi = std::exp(-0.5 * w * w) / std::sqrt(2.0 * M_PI);
    const double node_weight =
        weights[static_cast<std::size_t>(k)] * kLatentIntegrationBound * phi;
    weight_total += node_weight;
    for (int i = 0; i < n; ++i) {
      const double t = thresholds[static_cast<std::size_t>(i)];
      const double lam = loading[static_cast<std::size_t>(i)];
      const double s2 = std::max(1.0 - lam * lam, 0.0);
      double q;
      if (std::isinf(t)) {
        q = t > 0 ? 1.0 : 0.0;
      } else if (s2 < 1e-24) {
        q = (lam * w <= t) ? 1.0 : 0.0;
      } else {
        q = NormalCdf((t - lam * w) / std::sqrt(s2));
      }
      bit_probs[static_cast<std::size_t>(i)] = q;
    }
    AccumulateProduct(bit_probs, node_weight, scratch, pmf);
  }
  // The latent integral over [-bound, bound] misses ~1e-17 tail mass; rescale
  // so the output is an exact PMF.
  for (double& p : pmf) p /= weight_total;
  return ExplicitDistribution(n, std::move(pmf));
}

std::uint64_t HashSpec(const CorrelatedBernoulliSpec& spec) {
  std::uint64_t state = Mix64(0x414450524956ULL + static_cast<std::uint64_t>(spec.length()));
  auto absorb = [&state](double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    state = Mix64(state ^ bits);
  };
  for (double m : spec.marginals) absorb(m);
  for (double r : spec.correlation) absorb(r);
  return state;
}

ExplicitDistribution MaterializeMonteCarlo(const CorrelatedBernoulliSpec& spec,
                                           MaterializeReport* report) {
  const int n = spec.length();
  const std::size_t outcomes = std::size_t{1} << n;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(ToEigen(spec));
  Eigen::MatrixXd factor = solver.eigenvectors();
  for (int j = 0; j < n; ++j) {
    factor.col(j) *= std::sqrt(std::max(solver.eigenvalues()(j), 0.0));
  }

  std::vector<double> thresholds(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    const double p = spec.marginals[static_cast<std::size_t>(i)];
    if (p <= 0.0) {
      thresholds[static_cast<std::size_t>(i)] = -std::numeric_limits<double>::infinity();
    } else if (p >= 1.0) {
      thresholds[static_cast<std::size_t>(i)] = std::numeric_limits<double>::infinity();
    } else {
      thresholds[static_cast<std::size_t>(i)] = NormalQuantile(p);
    }
  }

  const std::uint64_t seed = HashSpec(spec);
  RngStream rng(seed);
  std::vector<std::uint64_t> counts(outcomes, 0);
  Eigen::VectorXd g(n);
  for (std::uint64_t draw = 0; draw < kMonteCarloDraws; ++draw) {
    for (int i = 0; i < n; ++i) g(i) = rng.NextGaussian();
    std::uint32_t idx = 0;
    for (int i = 0; i < n; ++i) {
      const double z = factor.row(i).dot(g);
      if (z <= thresholds[static_cast<std::size_t>(i)]) idx |= std::uint32_t{1} << i;
    }
    ++counts[idx];
  }
  std::vector<double> pmf(outcomes, 0.0);
  for (std::size_t i = 0; i < outcomes; ++i) {
    pmf[i] = static_cast<double>(counts[i]) / static_cast<double>(kMonteCarloDraws);
  }

  // Iterative proportional fitting pins every per-bit marginal to the spec
  // while retaining the sampled dependence structure.
  for (int iter = 0; iter < 500; ++iter) {
    double worst = 0.0;
    for (int bit = 0; bit < n; ++bit) {
      const double target = spec.marginals[static_cast<std::size_t>(bit)];
      const std::uint32_t mask = std::uint32_t{1} << bit;
      double current = 0.0;
      for (std::size_t i = 0; i < outcomes; ++i) {
        if (i & mask) current += pmf[i];
      }
      worst = std::max(worst, std::abs(current - target));
      if (target <= 0.0 || target >= 1.0) continue;  // threshold already deterministic
      if (current <= 0.0 || current >= 1.0) {
        throw ModelError("monte carlo materialization produced empty support for bit " +
                         std::to_string(bit));
      }
      const double up = target / current;
      const double down = (1.0 - target) / (1.0 - current);
      for (std::size_t i = 0; i < outcomes; ++i) {
        pmf[i] *= (i & mask) ? up : down;
      }
    }
    if (worst < 1e-13) break;
  }
  double total = std::accumulate(pmf.begin(), pmf.end(), 0.0);
  for (double& p : pmf) p /= total;

  if (report != nullptr) {
    report->method = MaterializeReport::Method::kMonteCarlo;
    report->mc_draws = kMonteCarloDraws;
    report->mc_seed = seed;
  }
  return ExplicitDistribution(n, std::move(pmf));
}

}  // namespace

ExplicitDistribution Materialize(const CorrelatedBernoulliSpec& spec, MaterializeReport* report) {
  ValidateSpec(spec);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(ToEigen(spec));
  if (solver.eigenvalues().minCoeff() < -1e-9) {
    throw ModelError("correlation matrix is not positive semidefinite");
  }

  std::vector<double> loading;
  if (FitOneFactor(spec, loading)) {
    bool independent = true;
    for (double lam : loading) {
      if (lam != 0.0) {
        independent = false;
        break;
      }
    }
    if (report != nullptr) {
      report->method = independent ? MaterializeReport::Method::kProduct
                                   : MaterializeReport::Method::kOneFactorQuadrature;
      report->mc_draws = 0;
      report->mc_seed = 0;
    }
    if (independent) {
      return ExplicitDistribution::FromMarginals(spec.marginals);
    }
    return MaterializeOneFactor(spec, loading);
  }
  return MaterializeMonteCarlo(spec, report);
}

CorrelatedBernoulliSpec DeriveAlternate(const CorrelatedBernoulliSpec& spec, int test_bit,
                                        double new_marginal) {
  if (test_bit < 0 || test_bit >= spec.length()) {
    throw DimensionError("test bit " + std::to_string(test_bit) + " out of range");
  }
  if (!(new_marginal >= 0.0 && new_marginal <= 1.0)) {
    throw ModelError("new marginal outside [0, 1]");
  }
  CorrelatedBernoulliSpec alt = spec;
  alt.marginals[static_cast<std::size_t>(test_bit)] = new_marginal;
  return alt;
}

}  // namespace adpriv
