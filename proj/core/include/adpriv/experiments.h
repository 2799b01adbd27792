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

#ifndef ADPRIV_EXPERIMENTS_H_
#define ADPRIV_EXPERIMENTS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adpriv/analysis.h"
#include "adpriv/attribute_privacy.h"
#include "adpriv/behaviors.h"
#include "adpriv/distinguishing.h"
#include "adpriv/feature_space.h"

namespace adpriv {

// Experiment configuration, sweep orchestration, CSV emission and the
// self-contained SVG plotter. Every run is a pure function of its config
// (seed included), and output rows are canonically ordered, so reruns and
// thread-count changes reproduce files byte for byte.

struct CorrelationSpec {
  enum class Kind { kIdentity, kExchangeable, kMatrix };
  Kind kind = Kind::kExchangeable;
  double rho = 0.4;
  std::vector<double> matrix;  // row-major, only for kMatrix
};

struct ArmSpec {
  enum class Kind { kBaseline, kEcosystem };
  std::string name;
  Kind kind = Kind::kEcosystem;
  BehaviorParams params;
};

struct ExperimentConfig {
  std::string experiment = "tv_sweep";  // tv_sweep | epsilon_sweep | alpha_e_sweep |
                                        // alpha_t_sweep | bounds | audit
  int ell = 8;
  int b_test = 0;
  std::vector<double> base_marginals;  // defaults to 0.5 everywhere
  CorrelationSpec correlation;

  // tv_sweep: alternate marginals for the test bit.
  std::vector<double> marginal_grid = {0.55, 0.6375, 0.725, 0.8125, 0.9};
  // parameter sweeps: fixed alternate marginal and swept values.
  double sweep_marginal = 0.9;
  std::vector<double> param_grid;

  std::vector<ArmSpec> arms;  // defaults to baseline / non_private / private

  double level = 0.05;
  double target_power = 0.8;
  int trials_per_point = 400;
  int rounds_per_user = 1;
  long long sc_ceiling = 10'000'000;
  double beta = 1.0 / 6.0;  // distinguisher error for analytic bounds

  // audit parameters
  double audit_tv = 0.3;
  int audit_trials = 800;
  int audit_mini_users = 4;
  int audit_mini_ell = 3;
  double audit_mini_epsilon = 1.0;

  std::uint64_t master_seed = 0;
  bool seed_set = false;
  int threads = 0;  // 0 = all hardware threads
  std::string output;

  void Validate() const;
};

ExperimentConfig DefaultExperimentConfig();

// Parses and validates a config document, filling documented defaults.
// Unknown keys are rejected. Throws ConfigError with a descriptive message.
ExperimentConfig LoadExperimentConfigFromJsonText(const std::string& text);
ExperimentConfig LoadExperimentConfigFromFile(const std::string& path);

CorrelatedBernoulliSpec BuildBaseSpec(const ExperimentConfig& config);

// Canonical serialization (sorted keys) and its FNV-1a hash; the hash lands
// in every CSV row so a single row pins the exact configuration.
std::string CanonicalConfigJson(const ExperimentConfig& config);
std::string ConfigHashHex(const ExperimentConfig& config);

// Fixed, versioned sweep row schema.
struct CsvRow {
  std::string experiment;
  std::string arm;
  double tv_distance = 0.0;
  std::string param_name;
  double param_value = 0.0;
  long long minimal_n = -1;  // -1: search hit the ceiling for this row
  double power = 0.0;
  double level = 0.05;
  std::uint64_t seed = 0;
  std::string config_hash;
};

std::string CsvHeader();
std::string FormatCsvRow(const CsvRow& row);

// Fig-style sweep over the alternate-marginal grid: every (grid point, arm)
// pair gets a sample-complexity search. Ceiling errors are recorded per row,
// not fatal.
std::vector<CsvRow> RunTvSweep(const ExperimentConfig& config);

// Single-parameter sweep (epsilon, alpha_e or alpha_t) at a fixed alternate
// marginal.
std::vector<CsvRow> RunParamSweep(const ExperimentConfig& config);

void WriteCsvFile(const std::string& path, const std::vector<CsvRow>& rows);
std::string RowsToCsvText(const std::vector<CsvRow>& rows);

// Strict parser for the schema above; errors carry 1-based line numbers.
std::vector<CsvRow> ParseCsvText(const std::string& text);
std::vector<CsvRow> ParseCsvFile(const std::string& path);

// One line chart, log-scaled sample-complexity axis, one polyline per arm.
// Pure text output: identical rows give identical bytes.
std::string RenderSvgPlot(const std::vector<CsvRow>& rows);

// Analytic bounds per grid point.
struct BoundsRow {
  double marginal = 0.0;
  double tv = 0.0;
  double h_squared = 0.0;
  double sc_lower = 0.0;
  double sc_upper = 0.0;
  double sc_private_upper = 0.0;
  double a = 0.0;
  double b = 0.0;
  double k = 0.0;
  double gamma = 0.0;
  double z = 0.0;
  long long n_private_predicted = 0;
};

std::vector<BoundsRow> RunBounds(const ExperimentConfig& config);
std::string BoundsCsvText(const std::vector<BoundsRow>& rows);

// Smallest alternate marginal (>= the base one) whose materialized total
// variation from the base distribution reaches target_tv, by bisection.
double FindMarginalForTv(const CorrelatedBernoulliSpec& base, int test_bit, double target_tv);

// The end-to-end audit: leakage witnesses at the searched campaign sizes for
// identity and DP reporting, plus brute-force Pufferfish verdicts on an
// enumerable miniature.
struct AuditResult {
  double tv = 0.0;
  double alt_marginal = 0.0;
  long long identity_n = 0;
  long long private_n = 0;
  double expansion_z = 0.0;
  WitnessVerdict identity_witness;
  WitnessVerdict private_witness;
  PufferfishVerdict miniature_identity;  // expected: violated
  std::vector<std::pair<double, bool>> constant_mechanism_satisfied;  // (epsilon, verdict)
};

AuditResult RunAudit(const ExperimentConfig& config);
std::string AuditJson(const AuditResult& result);

}  // namespace adpriv

#endif  // ADPRIV_EXPERIMENTS_H_
