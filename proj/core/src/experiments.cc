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

#include "adpriv/experiments.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "adpriv/errors.h"
#include "adpriv/parallel.h"

namespace adpriv {

namespace {

using nlohmann::json;

std::string FormatDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::string(buf);
}

const std::set<std::string>& KnownExperiments() {
  static const std::set<std::string> kinds = {"tv_sweep",      "epsilon_sweep", "alpha_e_sweep",
                                              "alpha_t_sweep", "bounds",        "audit"};
  return kinds;
}

void CheckName(const std::string& name, const std::string& what) {
  if (name.empty()) throw ConfigError(what + " must be non-empty");
  for (char c : name) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) {
      throw ConfigError(what + " '" + name + "' may only contain [A-Za-z0-9_-]");
    }
  }
}

void RejectUnknownKeys(const json& j, const std::set<std::string>& allowed,
                       const std::string& where) {
  for (const auto& item : j.items()) {
    if (allowed.find(item.key()) == allowed.end()) {
      throw ConfigError("unknown key '" + item.key() + "' in " + where);
    }
  }
}

double GetDouble(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ConfigError("'" + key + "' must be a number");
  return j[key].get<double>();
}

long long GetInt(const json& j, const std::string& key, long long fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer()) throw ConfigError("'" + key + "' must be an integer");
  return j[key].get<long long>();
}

ArmSpec ParseArm(const json& j) {
  if (!j.is_object()) throw ConfigError("arm entries must be objects");
  RejectUnknownKeys(
      j, {"name", "kind", "alpha_t", "alpha_e", "alpha_a", "epsilon", "rho_mask"}, "arm");
  ArmSpec arm;
  if (!j.contains("name") || !j["name"].is_string()) {
    throw ConfigError("every arm needs a string 'name'");
  }
  arm.name = j["name"].get<std::string>();
  CheckName(arm.name, "arm name");
  const std::string kind = j.value("kind", std::string("ecosystem"));
  if (kind == "baseline") {
    arm.kind = ArmSpec::Kind::kBaseline;
  } else if (kind == "ecosystem") {
    arm.kind = ArmSpec::Kind::kEcosystem;
  } else {
    throw ConfigError("arm kind must be 'baseline' or 'ecosystem'");
  }
  arm.params.alpha_t = GetDouble(j, "alpha_t", 1.0);
  arm.params.alpha_e = GetDouble(j, "alpha_e", 0.2);
  arm.params.alpha_a = GetDouble(j, "alpha_a", 1.0);
  if (j.contains("epsilon")) arm.params.epsilon = GetDouble(j, "epsilon", 0.0);
  if (j.contains("rho_mask")) {
    if (!j["rho_mask"].is_string()) throw ConfigError("rho_mask must be a bit string");
    arm.params.rho_mask = FeatureVector::FromString(j["rho_mask"].get<std::string>());
  }
  arm.params.Validate();
  return arm;
}

json ArmToJson(const ArmSpec& arm) {
  json j;
  j["name"] = arm.name;
  j["kind"] = arm.kind == ArmSpec::Kind::kBaseline ? "baseline" : "ecosystem";
  j["alpha_t"] = arm.params.alpha_t;
  j["alpha_e"] = arm.params.alpha_e;
  j["alpha_a"] = arm.params.alpha_a;
  if (arm.params.epsilon.has_value()) j["epsilon"] = *arm.params.epsilon;
  if (arm.params.rho_mask.has_value()) j["rho_mask"] = arm.params.rho_mask->ToString();
  return j;
}

GameConfig MakeGameConfig(const ExperimentConfig& config, const AbInstance& instance,
                          const BehaviorParams& params, int campaign_size) {
  return GameConfig{instance, params, campaign_size, config.rounds_per_user, config.level,
                    config.master_seed};
}

const ArmSpec* FindEcosystemArm(const ExperimentConfig& config, bool with_epsilon) {
  for (const ArmSpec& arm : config.arms) {
    if (arm.kind != ArmSpec::Kind::kEcosystem) continue;
    if (arm.params.epsilon.has_value() == with_epsilon) return &arm;
  }
  return nullptr;
}

void SortRows(std::vector<CsvRow>& rows) {
  std::sort(rows.begin(), rows.end(), [](const CsvRow& a, const CsvRow& b) {
    if (a.experiment != b.experiment) return a.experiment < b.experiment;
    if (a.param_name != b.param_name) return a.param_name < b.param_name;
    if (a.param_value != b.param_value) return a.param_value < b.param_value;
    return a.arm < b.arm;
  });
}

CsvRow SearchToRow(const ExperimentConfig& config, const std::string& arm_name, double tv,
                   const std::string& param_name, double param_value,
                   const SampleComplexitySearch& search) {
  CsvRow row;
  row.experiment = config.experiment;
  row.arm = arm_name;
  row.tv_distance = tv;
  row.param_name = param_name;
  row.param_value = param_value;
  row.level = config.level;
  row.seed = config.master_seed;
  row.config_hash = ConfigHashHex(config);
  try {
    const SCResult result = FindSampleComplexity(search);
    row.minimal_n = result.minimal_n;
    row.power = result.power_at_n;
  } catch (const CeilingError& e) {
    row.minimal_n = -1;
    row.power = e.partial_trace().empty() ? 0.0 : e.partial_trace().back().second;
  }
  return row;
}

}  // namespace

void ExperimentConfig::Validate() const {
  if (KnownExperiments().find(experiment) == KnownExperiments().end()) {
    throw ConfigError("unknown experiment kind '" + experiment + "'");
  }
  if (ell < 1 || ell > 12) throw ConfigError("ell must lie in [1, 12]");
  if (b_test < 0 || b_test >= ell) throw ConfigError("b_test out of range");
  if (!base_marginals.empty() && static_cast<int>(base_marginals.size()) != ell) {
    throw ConfigError("base marginals must have exactly ell entries");
  }
  for (double m : base_marginals) {
    if (!(m >= 0.0 && m <= 1.0)) throw ConfigError("base marginal outside [0, 1]");
  }
  for (double m : marginal_grid) {
    if (!(m >= 0.0 && m <= 1.0)) throw ConfigError("grid marginal outside [0, 1]");
  }
  if (!(sweep_marginal >= 0.0 && sweep_marginal <= 1.0)) {
    throw ConfigError("sweep marginal outside [0, 1]");
  }
  if (correlation.kind == CorrelationSpec::Kind::kExchangeable &&
      !(correlation.rho >= -1.0 && correlation.rho <= 1.0)) {
    throw ConfigError("rho outside [-1, 1]");
  }
  if (correlation.kind == CorrelationSpec::Kind::kMatrix &&
      correlation.matrix.size() != static_cast<std::size_t>(ell) * ell) {
    throw ConfigError("correlation matrix must be ell x ell");
  }
  std::set<std::string> names;
  for (const ArmSpec& arm : arms) {
    CheckName(arm.name, "arm name");
    arm.params.Validate();
    if (!names.insert(arm.name).second) throw ConfigError("duplicate arm name '" + arm.name + "'");
  }
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("level must lie in (0, 1)");
  if (!(target_power > 0.5 && target_power < 1.0)) {
    throw ConfigError("target power must lie in (0.5, 1)");
  }
  if (trials_per_point < 1) throw ConfigError("trials_per_point must be positive");
  if (rounds_per_user < 1) throw ConfigError("rounds_per_user must be positive");
  if (sc_ceiling < 1) throw ConfigError("sc_ceiling must be positive");
  if (!(beta > 0.0 && beta < 0.25)) throw ConfigError("beta must lie in (0, 1/4)");
  if (!(audit_tv > 0.0 && audit_tv < 1.0)) throw ConfigError("audit_tv must lie in (0, 1)");
  if (audit_trials < 1) throw ConfigError("audit_trials must be positive");
  if (audit_mini_users < 1) throw ConfigError("audit_mini_users must be positive");
  if (audit_mini_ell < 1 || audit_mini_users * audit_mini_ell > 20) {
    throw ConfigError("miniature dataset space must stay enumerable (users * ell <= 20)");
  }
  if (audit_mini_epsilon < 0.0) throw ConfigError("audit_mini_epsilon must be nonnegative");
  if (threads < 0) throw ConfigError("threads must be nonnegative");
}

ExperimentConfig DefaultExperimentConfig() {
  ExperimentConfig config;
  ArmSpec baseline;
  baseline.name = "baseline";
  baseline.kind = ArmSpec::Kind::kBaseline;
  ArmSpec non_private;
  non_private.name = "non_private";
  non_private.kind = ArmSpec::Kind::kEcosystem;
  non_private.params.alpha_t = 1.0;
  non_private.params.alpha_e = 0.2;
  ArmSpec dp;
  dp.name = "private";
  dp.kind = ArmSpec::Kind::kEcosystem;
  dp.params.alpha_t = 0.5;
  dp.params.alpha_e = 0.2;
  dp.params.epsilon = 0.5;
  config.arms = {baseline, non_private, dp};
  return config;
}

ExperimentConfig LoadExperimentConfigFromJsonText(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RejectUnknownKeys(j,
                    {"experiment", "ell", "b_test", "base", "marginal_grid", "sweep_marginal",
                     "param_grid", "arms", "level", "target_power", "trials_per_point",
                     "rounds_per_user", "sc_ceiling", "beta", "audit_tv", "audit_trials",
                     "audit_mini_users", "audit_mini_ell", "audit_mini_epsilon", "master_seed",
                     "threads", "output"},
                    "config");

  ExperimentConfig config = DefaultExperimentConfig();
  if (j.contains("experiment")) {
    if (!j["experiment"].is_string()) throw ConfigError("'experiment' must be a string");
    config.experiment = j["experiment"].get<std::string>();
  }
  config.ell = static_cast<int>(GetInt(j, "ell", config.ell));
  config.b_test = static_cast<int>(GetInt(j, "b_test", config.b_test));

  if (j.contains("base")) {
    const json& base = j["base"];
    if (!base.is_object()) throw ConfigError("'base' must be an object");
    RejectUnknownKeys(base, {"marginals", "correlation"}, "base");
    if (base.contains("marginals")) {
      if (!base["marginals"].is_array()) throw ConfigError("'base.marginals' must be an array");
      config.base_marginals = base["marginals"].get<std::vector<double>>();
    }
    if (base.contains("correlation")) {
      const json& corr = base["correlation"];
      if (!corr.is_object()) throw ConfigError("'base.correlation' must be an object");
      RejectUnknownKeys(corr, {"kind", "rho", "matrix"}, "base.correlation");
      const std::string kind = corr.value("kind", std::string("exchangeable"));
      if (kind == "identity") {
        config.correlation.kind = CorrelationSpec::Kind::kIdentity;
      } else if (kind == "exchangeable") {
        config.correlation.kind = CorrelationSpec::Kind::kExchangeable;
        config.correlation.rho = GetDouble(corr, "rho", config.correlation.rho);
      } else if (kind == "matrix") {
        config.correlation.kind = CorrelationSpec::Kind::kMatrix;
        if (!corr.contains("matrix") || !corr["matrix"].is_array()) {
          throw ConfigError("'base.correlation.matrix' must be an array");
        }
        config.correlation.matrix = corr["matrix"].get<std::vector<double>>();
      } else {
        throw ConfigError("correlation kind must be identity, exchangeable or matrix");
      }
    }
  }

  if (j.contains("marginal_grid")) {
    if (!j["marginal_grid"].is_array()) throw ConfigError("'marginal_grid' must be an array");
    config.marginal_grid = j["marginal_grid"].get<std::vector<double>>();
  }
  config.sweep_marginal = GetDouble(j, "sweep_marginal", config.sweep_marginal);
  if (j.contains("param_grid")) {
    if (!j["param_grid"].is_array()) throw ConfigError("'param_grid' must be an array");
    config.param_grid = j["param_grid"].get<std::vector<double>>();
  }
  if (j.contains("arms")) {
    if (!j["arms"].is_array()) throw ConfigError("'arms' must be an array");
    config.arms.clear();
    for (const json& arm : j["arms"]) config.arms.push_back(ParseArm(arm));
  }
  config.level = GetDouble(j, "level", config.level);
  config.target_power = GetDouble(j, "target_power", config.target_power);
  config.trials_per_point = static_cast<int>(GetInt(j, "trials_per_point", config.trials_per_point));
  config.rounds_per_user = static_cast<int>(GetInt(j, "rounds_per_user", config.rounds_per_user));
  config.sc_ceiling = GetInt(j, "sc_ceiling", config.sc_ceiling);
  config.beta = GetDouble(j, "beta", config.beta);
  config.audit_tv = GetDouble(j, "audit_tv", config.audit_tv);
  config.audit_trials = static_cast<int>(GetInt(j, "audit_trials", config.audit_trials));
  config.audit_mini_users = static_cast<int>(GetInt(j, "audit_mini_users", config.audit_mini_users));
  config.audit_mini_ell = static_cast<int>(GetInt(j, "audit_mini_ell", config.audit_mini_ell));
  config.audit_mini_epsilon = GetDouble(j, "audit_mini_epsilon", config.audit_mini_epsilon);
  if (j.contains("master_seed")) {
    if (!j["master_seed"].is_number_unsigned() && !j["master_seed"].is_number_integer()) {
      throw ConfigError("'master_seed' must be an integer");
    }
    config.master_seed = j["master_seed"].get<std::uint64_t>();
    config.seed_set = true;
  }
  config.threads = static_cast<int>(GetInt(j, "threads", config.threads));
  if (j.contains("output")) {
    if (!j["output"].is_string()) throw ConfigError("'output' must be a string");
    config.output = j["output"].get<std::string>();
  }
  config.Validate();
  return config;
}

ExperimentConfig LoadExperimentConfigFromFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return LoadExperimentConfigFromJsonText(buffer.str());
}

CorrelatedBernoulliSpec BuildBaseSpec(const ExperimentConfig& config) {
  std::vector<double> marginals = config.base_marginals;
  if (marginals.empty()) marginals.assign(static_cast<std::size_t>(config.ell), 0.5);
  switch (config.correlation.kind) {
    case CorrelationSpec::Kind::kIdentity:
      return CorrelatedBernoulliSpec::Independent(std::move(marginals));
    case CorrelationSpec::Kind::kExchangeable:
      return CorrelatedBernoulliSpec::Exchangeable(std::move(marginals), config.correlation.rho);
    case CorrelationSpec::Kind::kMatrix: {
      CorrelatedBernoulliSpec spec;
      spec.marginals = std::move(marginals);
      spec.correlation = config.correlation.matrix;
      return spec;
    }
  }
  throw ConfigError("unreachable correlation kind");
}

std::string CanonicalConfigJson(const ExperimentConfig& config) {
  json j;
  j["experiment"] = config.experiment;
  j["ell"] = config.ell;
  j["b_test"] = config.b_test;
  json base;
  base["marginals"] = config.base_marginals.empty()
                          ? std::vector<double>(static_cast<std::size_t>(config.ell), 0.5)
                          : config.base_marginals;
  switch (config.correlation.kind) {
    case CorrelationSpec::Kind::kIdentity:
      base["correlation"] = {{"kind", "identity"}};
      break;
    case CorrelationSpec::Kind::kExchangeable:
      base["correlation"] = {{"kind", "exchangeable"}, {"rho", config.correlation.rho}};
      break;
    case CorrelationSpec::Kind::kMatrix:
      base["correlation"] = {{"kind", "matrix"}, {"matrix", config.correlation.matrix}};
      break;
  }
  j["base"] = base;
  j["marginal_grid"] = config.marginal_grid;
  j["sweep_marginal"] = config.sweep_marginal;
  j["param_grid"] = config.param_grid;
  json arms = json::array();
  for (const ArmSpec& arm : config.arms) arms.push_back(ArmToJson(arm));
  j["arms"] = arms;
  j["level"] = config.level;
  j["target_power"] = config.target_power;
  j["trials_per_point"] = config.trials_per_point;
  j["rounds_per_user"] = config.rounds_per_user;
  j["sc_ceiling"] = config.sc_ceiling;
  j["beta"] = config.beta;
  j["audit_tv"] = config.audit_tv;
  j["audit_trials"] = config.audit_trials;
  j["audit_mini_users"] = config.audit_mini_users;
  j["audit_mini_ell"] = config.audit_mini_ell;
  j["audit_mini_epsilon"] = config.audit_mini_epsilon;
  j["master_seed"] = config.master_seed;
  return j.dump();
}

std::string ConfigHashHex(const ExperimentConfig& config) {
  const std::string text = CanonicalConfigJson(config);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return std::string(buf);
}

std::string CsvHeader() {
  return "experiment,arm,tv_distance,param_name,param_value,minimal_n,power,level,seed,"
         "config_hash";
}

std::string FormatCsvRow(const CsvRow& row) {
  std::ostringstream out;
  out << row.experiment << ',' << row.arm << ',' << FormatDouble(row.tv_distance) << ','
      << row.param_name << ',' << FormatDouble(row.param_value) << ',' << row.minimal_n << ','
      << FormatDouble(row.power) << ',' << FormatDouble(row.level) << ',' << row.seed << ','
      << row.config_hash;
  return out.str();
}

std::vector<CsvRow> RunTvSweep(const ExperimentConfig& config) {
  config.Validate();
  if (config.experiment != "tv_sweep") throw ConfigError("config is not a tv_sweep");
  if (!config.seed_set) throw ConfigError("tv_sweep requires a master seed");
  if (config.marginal_grid.size() < 3) throw ConfigError("tv_sweep needs at least 3 grid points");
  if (config.arms.empty()) throw ConfigError("tv_sweep needs at least one arm");

  const CorrelatedBernoulliSpec base = BuildBaseSpec(config);
  const int threads = ResolveThreadCount(config.threads);
  std::vector<CsvRow> rows;
  for (std::size_t gi = 0; gi < config.marginal_grid.size(); ++gi) {
    const double marginal = config.marginal_grid[gi];
    const AbInstance instance = MakeAbInstance(base, config.b_test, marginal);
    const double tv = TotalVariation(instance.d0, instance.d1);
    for (const ArmSpec& arm : config.arms) {
      SampleComplexitySearch search(MakeGameConfig(config, instance, arm.params,
                                                   /*campaign_size=*/1));
      search.mode = arm.kind == ArmSpec::Kind::kBaseline
                        ? SampleComplexitySearch::Mode::kBaseline
                        : SampleComplexitySearch::Mode::kEcosystem;
      search.target_power = config.target_power;
      search.trials_per_point = config.trials_per_point;
      search.ceiling = config.sc_ceiling;
      search.threads = threads;
      search.seed_salt = gi;
      rows.push_back(SearchToRow(config, arm.name, tv, "marginal", marginal, search));
    }
  }
  SortRows(rows);
  return rows;
}

std::vector<CsvRow> RunParamSweep(const ExperimentConfig& config) {
  config.Validate();
  std::string param_name;
  bool wants_epsilon_arm = false;
  if (config.experiment == "epsilon_sweep") {
    param_name = "epsilon";
    wants_epsilon_arm = true;
  } else if (config.experiment == "alpha_e_sweep") {
    param_name = "alpha_e";
  } else if (config.experiment == "alpha_t_sweep") {
    param_name = "alpha_t";
  } else {
    throw ConfigError("config is not a parameter sweep");
  }
  if (!config.seed_set) throw ConfigError("parameter sweeps require a master seed");
  if (config.param_grid.empty()) throw ConfigError("param_grid must not be empty");

  const ArmSpec* tmpl = FindEcosystemArm(config, wants_epsilon_arm);
  if (tmpl == nullptr) {
    throw ConfigError(wants_epsilon_arm
                          ? "epsilon_sweep needs an ecosystem arm with epsilon set"
                          : "alpha sweeps need an ecosystem arm without epsilon");
  }

  const CorrelatedBernoulliSpec base = BuildBaseSpec(config);
  const AbInstance instance = MakeAbInstance(base, config.b_test, config.sweep_marginal);
  const double tv = TotalVariation(instance.d0, instance.d1);
  const int threads = ResolveThreadCount(config.threads);

  std::vector<CsvRow> rows;
  for (std::size_t pi = 0; pi < config.param_grid.size(); ++pi) {
    const double value = config.param_grid[pi];
    BehaviorParams params = tmpl->params;
    if (param_name == "epsilon") {
      params.epsilon = value;
    } else if (param_name == "alpha_e") {
      params.alpha_e = value;
    } else {
      params.alpha_t = value;
    }
    params.Validate();

    SampleComplexitySearch search(MakeGameConfig(config, instance, params, /*campaign_size=*/1));
    search.mode = SampleComplexitySearch::Mode::kEcosystem;
    search.target_power = config.target_power;
    search.trials_per_point = config.trials_per_point;
    search.ceiling = config.sc_ceiling;
    search.threads = threads;
    // One shared salt: sweep points reuse user randomness at equal campaign
    // sizes, which pairs the grid values for trend comparisons.
    search.seed_salt = 0x9A55;
    rows.push_back(SearchToRow(config, tmpl->name, tv, param_name, value, search));
  }
  SortRows(rows);
  return rows;
}

std::string RowsToCsvText(const std::vector<CsvRow>& rows) {
  std::ostringstream out;
  out << CsvHeader() << '\n';
  for (const CsvRow& row : rows) out << FormatCsvRow(row) << '\n';
  return out.str();
}

void WriteCsvFile(const std::string& path, const std::vector<CsvRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file '" + path + "'");
  out << RowsToCsvText(rows);
}

namespace {

std::vector<std::string> SplitLine(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else {
      field += c;
    }
  }
  fields.push_back(field);
  return fields;
}

double ParseDoubleField(const std::string& s, std::size_t line_no, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    throw ConfigError("csv line " + std::to_string(line_no) + ": bad " + what + " '" + s + "'");
  }
  return v;
}

long long ParseIntField(const std::string& s, std::size_t line_no, const std::string& what) {
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0') {
    throw ConfigError("csv line " + std::to_string(line_no) + ": bad " + what + " '" + s + "'");
  }
  return v;
}

}  // namespace

std::vector<CsvRow> ParseCsvText(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<CsvRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != CsvHeader()) {
        throw ConfigError("csv line 1: header does not match the sweep schema");
      }
      continue;
    }
    const std::vector<std::string> fields = SplitLine(line);
    if (fields.size() != 10) {
      throw ConfigError("csv line " + std::to_string(line_no) + ": expected 10 fields, got " +
                        std::to_string(fields.size()));
    }
    CsvRow row;
    row.experiment = fields[0];
    row.arm = fields[1];
    row.tv_distance = ParseDoubleField(fields[2], line_no, "tv_distance");
    row.param_name = fields[3];
    row.param_value = ParseDoubleField(fields[4], line_no, "param_value");
    row.minimal_n = ParseIntField(fields[5], line_no, "minimal_n");
    row.power = ParseDoubleField(fields[6], line_no, "power");
    row.level = ParseDoubleField(fields[7], line_no, "level");
    row.seed = static_cast<std::uint64_t>(ParseIntField(fields[8], line_no, "seed"));
    row.config_hash = fields[9];
    rows.push_back(row);
  }
  if (line_no == 0) throw ConfigError("csv line 1: file is empty");
  if (rows.empty()) throw ConfigError("csv has no data rows");
  return rows;
}

std::vector<CsvRow> ParseCsvFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open csv file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseCsvText(buffer.str());
}

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string Coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return std::string(buf);
}

}  // namespace

std::string RenderSvgPlot(const std::vector<CsvRow>& rows) {
  if (rows.empty()) throw ConfigError("no rows to plot");
  bool tv_axis = true;
  for (const CsvRow& row : rows) {
    if (row.param_name != "marginal") tv_axis = false;
  }
  const std::string x_label = tv_axis ? "total variation distance" : rows.front().param_name;

  struct Point {
    double x;
    double y;  // log10(minimal_n)
  };
  std::map<std::string, std::vector<Point>> series;
  double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;
  bool first = true;
  for (const CsvRow& row : rows) {
    if (row.minimal_n <= 0) continue;  // ceiling rows leave a gap
    const double x = tv_axis ? row.tv_distance : row.param_value;
    const double y = std::log10(static_cast<double>(row.minimal_n));
    series[row.arm].push_back({x, y});
    if (first) {
      x_min = x_max = x;
      y_min = y_max = y;
      first = false;
    } else {
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  }
  if (series.empty()) throw ConfigError("no plottable rows (every search hit its ceiling)");
  if (x_max - x_min < 1e-12) {
    x_min -= 0.5;
    x_max += 0.5;
  }
  y_min = std::floor(y_min);
  y_max = std::ceil(y_max + 1e-9);
  if (y_max - y_min < 1.0) y_max = y_min + 1.0;

  const double width = 720.0, height = 480.0;
  const double ml = 80.0, mr = 170.0, mt = 30.0, mb = 55.0;
  const double pw = width - ml - mr, ph = height - mt - mb;
  auto sx = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * pw; };
  auto sy = [&](double y) { return mt + (y_max - y) / (y_max - y_min) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  svg << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";

  // y grid and tick labels at powers of ten
  for (double y = y_min; y <= y_max + 1e-9; y += 1.0) {
    const double py = sy(y);
    svg << "<line x1=\"" << Coord(ml) << "\" y1=\"" << Coord(py) << "\" x2=\""
        << Coord(ml + pw) << "\" y2=\"" << Coord(py)
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << Coord(ml - 8) << "\" y=\"" << Coord(py + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">1e"
        << static_cast<long long>(y) << "</text>\n";
  }
  // x ticks
  for (int i = 0; i <= 4; ++i) {
    const double x = x_min + (x_max - x_min) * i / 4.0;
    const double px = sx(x);
    svg << "<line x1=\"" << Coord(px) << "\" y1=\"" << Coord(mt + ph) << "\" x2=\"" << Coord(px)
        << "\" y2=\"" << Coord(mt + ph + 5) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    char label[32];
    std::snprintf(label, sizeof(label), "%.4g", x);
    svg << "<text x=\"" << Coord(px) << "\" y=\"" << Coord(mt + ph + 20)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << label
        << "</text>\n";
  }
  // axes
  svg << "<line x1=\"" << Coord(ml) << "\" y1=\"" << Coord(mt) << "\" x2=\"" << Coord(ml)
      << "\" y2=\"" << Coord(mt + ph) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg << "<line x1=\"" << Coord(ml) << "\" y1=\"" << Coord(mt + ph) << "\" x2=\""
      << Coord(ml + pw) << "\" y2=\"" << Coord(mt + ph)
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg << "<text x=\"" << Coord(ml + pw / 2) << "\" y=\"" << Coord(height - 12)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << x_label
      << "</text>\n";
  svg << "<text x=\"18\" y=\"" << Coord(mt + ph / 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
         "transform=\"rotate(-90 18 "
      << Coord(mt + ph / 2) << ")\">sample complexity</text>\n";

  int color_index = 0;
  double legend_y = mt + 10;
  for (auto& [arm, points] : series) {
    std::sort(points.begin(), points.end(),
              [](const Point& a, const Point& b) { return a.x < b.x; });
    const std::string color =
        kPalette[static_cast<std::size_t>(color_index) % (sizeof(kPalette) / sizeof(kPalette[0]))];
    ++color_index;
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const Point& p : points) {
      svg << Coord(sx(p.x)) << ',' << Coord(sy(p.y)) << ' ';
    }
    svg << "\"/>\n";
    for (const Point& p : points) {
      svg << "<circle cx=\"" << Coord(sx(p.x)) << "\" cy=\"" << Coord(sy(p.y))
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    svg << "<line x1=\"" << Coord(ml + pw + 12) << "\" y1=\"" << Coord(legend_y) << "\" x2=\""
        << Coord(ml + pw + 34) << "\" y2=\"" << Coord(legend_y) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << Coord(ml + pw + 40) << "\" y=\"" << Coord(legend_y + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << arm << "</text>\n";
    legend_y += 18;
  }
  svg << "</svg>\n";
  return svg.str();
}

std::vector<BoundsRow> RunBounds(const ExperimentConfig& config) {
  config.Validate();
  const ArmSpec* non_private = FindEcosystemArm(config, /*with_epsilon=*/false);
  const ArmSpec* dp_arm = FindEcosystemArm(config, /*with_epsilon=*/true);
  if (non_private == nullptr || dp_arm == nullptr) {
    throw ConfigError("bounds needs one identity-report arm and one dp arm");
  }
  if (config.marginal_grid.empty()) throw ConfigError("bounds needs a marginal grid");

  const CorrelatedBernoulliSpec base = BuildBaseSpec(config);
  std::vector<BoundsRow> rows;
  for (double marginal : config.marginal_grid) {
    const AbInstance instance = MakeAbInstance(base, config.b_test, marginal);
    const ActiveAd first{instance.ad_a, instance.ad_a};
    const ActiveAd second{instance.ad_b, instance.ad_b};
    const EngagementOutputDistribution r0 =
        EngagementOutput(instance.d0, first, second, non_private->params);
    const EngagementOutputDistribution r1 =
        EngagementOutput(instance.d1, first, second, non_private->params);
    const BoundsReport bounds = ScBounds(r0, r1, config.beta, dp_arm->params.epsilon);
    // The predicted private size is anchored at the analytic upper bound for
    // the non-private campaign; an empirical anchor comes from the sweeps.
    const long long n_ref = static_cast<long long>(std::ceil(bounds.sc_upper));
    const ExpansionReport expansion =
        ExpansionFactor(instance.d0, instance.d1, first, second, non_private->params.alpha_t,
                        dp_arm->params.alpha_t, n_ref, dp_arm->params.epsilon);
    BoundsRow row;
    row.marginal = marginal;
    row.tv = TotalVariation(instance.d0, instance.d1);
    row.h_squared = bounds.h_squared;
    row.sc_lower = bounds.sc_lower;
    row.sc_upper = bounds.sc_upper;
    row.sc_private_upper = bounds.sc_private_upper;
    row.a = expansion.a;
    row.b = expansion.b;
    row.k = expansion.k;
    row.gamma = expansion.gamma;
    row.z = expansion.z;
    row.n_private_predicted = expansion.n_private_predicted;
    rows.push_back(row);
  }
  std::sort(rows.begin(), rows.end(),
            [](const BoundsRow& a, const BoundsRow& b) { return a.marginal < b.marginal; });
  return rows;
}

std::string BoundsCsvText(const std::vector<BoundsRow>& rows) {
  std::ostringstream out;
  out << "marginal,tv_distance,h_squared,sc_lower,sc_upper,sc_private_upper,a,b,k,gamma,z,"
         "n_private_predicted\n";
  for (const BoundsRow& r : rows) {
    out << FormatDouble(r.marginal) << ',' << FormatDouble(r.tv) << ','
        << FormatDouble(r.h_squared) << ',' << FormatDouble(r.sc_lower) << ','
        << FormatDouble(r.sc_upper) << ',' << FormatDouble(r.sc_private_upper) << ','
        << FormatDouble(r.a) << ',' << FormatDouble(r.b) << ',' << FormatDouble(r.k) << ','
        << FormatDouble(r.gamma) << ',' << FormatDouble(r.z) << ',' << r.n_private_predicted
        << '\n';
  }
  return out.str();
}

double FindMarginalForTv(const CorrelatedBernoulliSpec& base, int test_bit, double target_tv) {
  if (!(target_tv > 0.0 && target_tv < 1.0)) {
    throw ConfigError("target tv must lie in (0, 1)");
  }
  const ExplicitDistribution d0 = Materialize(base);
  auto tv_at = [&](double m) {
    return TotalVariation(d0, Materialize(DeriveAlternate(base, test_bit, m)));
  };
  double lo = base.marginals[static_cast<std::size_t>(test_bit)];
  double hi = 1.0;
  if (tv_at(hi) < target_tv) {
    throw DegenerateError("target tv unreachable by raising the test-bit marginal");
  }
  for (int iter = 0; iter < 60; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (tv_at(mid) >= target_tv) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

AuditResult RunAudit(const ExperimentConfig& config) {
  config.Validate();
  if (!config.seed_set) throw ConfigError("audit requires a master seed");
  const ArmSpec* non_private = FindEcosystemArm(config, /*with_epsilon=*/false);
  const ArmSpec* dp_arm = FindEcosystemArm(config, /*with_epsilon=*/true);
  if (non_private == nullptr || dp_arm == nullptr) {
    throw ConfigError("audit needs one identity-report arm and one dp arm");
  }
  const int threads = ResolveThreadCount(config.threads);

  AuditResult result;
  const CorrelatedBernoulliSpec base = BuildBaseSpec(config);
  result.alt_marginal = FindMarginalForTv(base, config.b_test, config.audit_tv);
  const AbInstance instance = MakeAbInstance(base, config.b_test, result.alt_marginal);
  result.tv = TotalVariation(instance.d0, instance.d1);

  SampleComplexitySearch search(
      MakeGameConfig(config, instance, non_private->params, /*campaign_size=*/1));
  search.mode = SampleComplexitySearch::Mode::kEcosystem;
  search.target_power = config.target_power;
  search.trials_per_point = config.trials_per_point;
  search.ceiling = config.sc_ceiling;
  search.threads = threads;
  search.seed_salt = 0xA0D1;
  result.identity_n = FindSampleComplexity(search).minimal_n;

  const GameConfig identity_game =
      MakeGameConfig(config, instance, non_private->params, static_cast<int>(result.identity_n));
  result.identity_witness = ViolationWitness(identity_game, config.audit_trials, threads);

  const ActiveAd first{instance.ad_a, instance.ad_a};
  const ActiveAd second{instance.ad_b, instance.ad_b};
  const ExpansionReport expansion =
      ExpansionFactor(instance.d0, instance.d1, first, second, non_private->params.alpha_t,
                      dp_arm->params.alpha_t, result.identity_n, dp_arm->params.epsilon);
  result.expansion_z = expansion.z;
  result.private_n = expansion.n_private_predicted;

  const GameConfig private_game =
      MakeGameConfig(config, instance, dp_arm->params, static_cast<int>(result.private_n));
  result.private_witness = ViolationWitness(private_game, config.audit_trials, threads);

  // Desk-scale miniature: small enough to enumerate every dataset, strong
  // enough utility that the report plainly tracks the secret.
  std::vector<double> mini_marginals(static_cast<std::size_t>(config.audit_mini_ell), 0.5);
  CorrelatedBernoulliSpec mini_base =
      config.correlation.kind == CorrelationSpec::Kind::kExchangeable
          ? CorrelatedBernoulliSpec::Exchangeable(mini_marginals, config.correlation.rho)
          : CorrelatedBernoulliSpec::Independent(mini_marginals);
  const AbInstance mini_instance = MakeAbInstance(mini_base, 0, 0.9);
  BehaviorParams mini_params;
  mini_params.alpha_t = 1.0;
  mini_params.alpha_e = 1.0;

  PufferfishFramework framework;
  framework.secrets = {FractionAtLeast(0, 1.0), FractionAtMost(0, 0.0)};
  framework.secret_pairs = {{0, 1}};
  framework.priors = {
      DatasetPrior{"base", Materialize(mini_base), config.audit_mini_users}};

  const Mechanism identity_mechanism = MakeAbCountMechanism(mini_instance, mini_params);
  const int cells = config.audit_mini_users + 1;
  result.miniature_identity =
      PufferfishVerify(identity_mechanism, cells, framework, config.audit_mini_epsilon);

  const Mechanism constant_mechanism = [cells](const Dataset&) {
    std::vector<double> out(static_cast<std::size_t>(cells), 0.0);
    out[0] = 1.0;
    return out;
  };
  for (double eps : {0.0, 0.5, 1.0, 5.0}) {
    const PufferfishVerdict verdict =
        PufferfishVerify(constant_mechanism, cells, framework, eps);
    result.constant_mechanism_satisfied.emplace_back(eps, verdict.satisfied);
  }
  return result;
}

std::string AuditJson(const AuditResult& result) {
  json j;
  j["tv"] = result.tv;
  j["alt_marginal"] = result.alt_marginal;
  j["identity_n"] = result.identity_n;
  j["private_n"] = result.private_n;
  j["expansion_z"] = result.expansion_z;
  auto witness_json = [](const WitnessVerdict& w) {
    json v;
    v["verdict"] = w.violation ? "violation-evidence" : "inconclusive";
    v["advantage"] = w.estimate.advantage;
    v["half_width_3sigma"] = w.estimate.half_width_3sigma;
    v["trials"] = w.estimate.trials;
    v["test_bit"] = w.test_bit;
    v["fraction_under_d0"] = w.g_under_d0;
    v["fraction_under_d1"] = w.g_under_d1;
    return v;
  };
  j["identity_witness"] = witness_json(result.identity_witness);
  j["private_witness"] = witness_json(result.private_witness);
  json mini;
  mini["verdict"] = result.miniature_identity.satisfied ? "satisfied" : "violated";
  if (result.miniature_identity.witness.has_value()) {
    const PufferfishWitness& w = *result.miniature_identity.witness;
    mini["witness"] = {{"prior_index", w.prior_index},
                       {"pair_index", w.pair_index},
                       {"cell", w.cell},
                       {"p_first", w.p_first},
                       {"p_second", w.p_second},
                       {"epsilon", w.epsilon}};
  }
  j["miniature_identity"] = mini;
  json constant = json::array();
  for (const auto& [eps, satisfied] : result.constant_mechanism_satisfied) {
    constant.push_back({{"epsilon", eps}, {"satisfied", satisfied}});
  }
  j["constant_mechanism"] = constant;
  return j.dump(2) + "\n";
}

}  // namespace adpriv
